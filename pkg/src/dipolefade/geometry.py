"""
Deterministic dipole-to-dipole channel model.

Field vectors, alignment factors, the channel coefficient and its bilinear
(matrix) form, the optimal arrangements, physical prefactors and the SIMO
combining magnitude. All array-valued helpers broadcast over leading axes:
a direction argument may be a single 3-vector, a ``UnitVector3`` or an
``(..., 3)`` array.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

DEFAULT_ALPHA_BAR = 1e-2
WEAK_COUPLING_THRESHOLD = 1e-2

_NORM_REJECT = 1e-9
_DEGENERATE_DOT_TOL = 1e-9
_DEGENERATE_RHO_TOL = 1e-9
_DEGENERATE_NORM_REL = 1e-15


class RegionKind(enum.Enum):
    NEAR_FIELD = "near"
    FAR_FIELD = "far"
    TRANSITION = "transition"

    @classmethod
    def parse(cls, value: "RegionKind | str") -> "RegionKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown region {value!r}; expected near, far or transition") from None


@dataclass(frozen=True)
class UnitVector3:
    """Real 3-vector of unit length. Input is normalized on construction."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        n = math.sqrt(self.x**2 + self.y**2 + self.z**2)
        if not np.isfinite(n) or n < _NORM_REJECT:
            raise ValueError(f"cannot normalize vector with norm {n:g}")
        object.__setattr__(self, "x", float(self.x) / n)
        object.__setattr__(self, "y", float(self.y) / n)
        object.__setattr__(self, "z", float(self.z) / n)

    @classmethod
    def of(cls, v: ArrayLike) -> "UnitVector3":
        if isinstance(v, cls):
            return v
        a = np.asarray(v, dtype=float)
        if a.shape != (3,):
            raise ValueError(f"expected a 3-vector, got shape {a.shape}")
        return cls(*a)

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y, self.z], dtype=dtype)

    def as_array(self) -> NDArray:
        return np.array([self.x, self.y, self.z])

    def dot(self, other: ArrayLike) -> float:
        return float(np.dot(self.as_array(), np.asarray(other, dtype=float)))


E_X = UnitVector3(1.0, 0.0, 0.0)
E_Y = UnitVector3(0.0, 1.0, 0.0)
E_Z = UnitVector3(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class LinkGeometry:
    kr: float
    o_tx: UnitVector3
    o_rx: UnitVector3
    d: UnitVector3 = E_Z
    alpha_bar: complex = DEFAULT_ALPHA_BAR

    def __post_init__(self):
        if not (self.kr > 0 and np.isfinite(self.kr)):
            raise ValueError(f"kr must be positive and finite, got {self.kr!r}")
        for name in ("o_tx", "o_rx", "d"):
            object.__setattr__(self, name, UnitVector3.of(getattr(self, name)))
        object.__setattr__(self, "alpha_bar", complex(self.alpha_bar))

    @property
    def alpha(self) -> complex:
        return prefactor(self.kr, self.alpha_bar)


@dataclass(frozen=True)
class ComplexFieldVector:
    """The complex field vector at the receiver, with its real/imaginary statistics.

    ``scale`` sets the absolute floor below which a component norm counts as
    zero; ``field_vector`` passes ``|alpha|``.
    """

    components: NDArray = field(repr=False)
    scale: float | None = None
    dot_tx: float | None = None

    def __post_init__(self):
        c = np.array(self.components, dtype=complex).reshape(3)
        c.setflags(write=False)
        object.__setattr__(self, "components", c)

    @property
    def re(self) -> NDArray:
        return self.components.real

    @property
    def im(self) -> NDArray:
        return self.components.imag

    @property
    def v_re_norm(self) -> float:
        return float(np.linalg.norm(self.re))

    @property
    def v_im_norm(self) -> float:
        return float(np.linalg.norm(self.im))

    @property
    def rho(self) -> float:
        den = self.v_re_norm * self.v_im_norm
        if den == 0.0:
            return 0.0
        return float(np.clip(np.dot(self.re, self.im) / den, -1.0, 1.0))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    @property
    def linearly_independent(self) -> bool:
        """False when the real and imaginary parts span only a line (or less)."""
        if self.dot_tx is not None:
            x = abs(self.dot_tx)
            if x < _DEGENERATE_DOT_TOL or abs(1.0 - x) < _DEGENERATE_DOT_TOL:
                return False
        scale = self.scale if self.scale is not None else self.norm
        floor = _DEGENERATE_NORM_REL * scale
        if self.v_re_norm <= floor or self.v_im_norm <= floor:
            return False
        return abs(self.rho) <= 1.0 - _DEGENERATE_RHO_TOL


@dataclass(frozen=True)
class ChannelCoefficient:
    value: complex

    @property
    def pte(self) -> float:
        return abs(self.value) ** 2


def prefactor(kr: float, alpha_bar: complex = DEFAULT_ALPHA_BAR) -> complex:
    """Full prefactor ``alpha_bar * exp(-j kr)``."""
    return complex(alpha_bar) * np.exp(-1j * kr)


def _near_coeff(kr):
    return 1.0 / kr**3 + 1j / kr**2


def _far_coeff(kr):
    return 1.0 / (2.0 * kr)


def _vec(a: ArrayLike) -> NDArray:
    return np.asarray(a, dtype=float)


def scaled_near_field(d: ArrayLike, o_tx: ArrayLike) -> NDArray:
    """b_nf = (3 d d^T - I) o_tx / 2."""
    d, o = _vec(d), _vec(o_tx)
    x = np.sum(d * o, axis=-1, keepdims=True)
    return 0.5 * (3.0 * x * d - o)


def scaled_far_field(d: ArrayLike, o_tx: ArrayLike) -> NDArray:
    """b_ff = (I - d d^T) o_tx."""
    d, o = _vec(d), _vec(o_tx)
    x = np.sum(d * o, axis=-1, keepdims=True)
    return o - x * d


def beta_nf(dot_tx: ArrayLike) -> NDArray:
    """Near-field magnitude as a function of d^T o_tx."""
    x = np.asarray(dot_tx, dtype=float)
    return 0.5 * np.sqrt(1.0 + 3.0 * x * x)


def beta_ff(dot_tx: ArrayLike) -> NDArray:
    x = np.asarray(dot_tx, dtype=float)
    return np.sqrt(np.clip(1.0 - x * x, 0.0, None))


def alignment_factors_arrays(d: ArrayLike, o_tx: ArrayLike, o_rx: ArrayLike) -> tuple[NDArray, NDArray]:
    o_rx = _vec(o_rx)
    j_nf = np.sum(o_rx * scaled_near_field(d, o_tx), axis=-1)
    j_ff = np.sum(o_rx * scaled_far_field(d, o_tx), axis=-1)
    return j_nf, j_ff


def alignment_factors(g: LinkGeometry) -> tuple[float, float]:
    j_nf, j_ff = alignment_factors_arrays(g.d, g.o_tx, g.o_rx)
    return float(j_nf), float(j_ff)


def channel_from_alignment(kr, alpha_bar, j_nf, j_ff):
    """h from the two alignment factors; broadcasts over arrays."""
    alpha = prefactor(kr, alpha_bar)
    return alpha * (_near_coeff(kr) * j_nf + _far_coeff(kr) * j_ff)


def channel_coefficient(g: LinkGeometry) -> ChannelCoefficient:
    j_nf, j_ff = alignment_factors(g)
    return ChannelCoefficient(complex(channel_from_alignment(g.kr, g.alpha_bar, j_nf, j_ff)))


def field_vector_array(kr, alpha_bar, d: ArrayLike, o_tx: ArrayLike) -> NDArray:
    alpha = prefactor(kr, alpha_bar)
    return alpha * (_near_coeff(kr) * scaled_near_field(d, o_tx) + _far_coeff(kr) * scaled_far_field(d, o_tx))


def field_vector(kr: float, alpha_bar: complex, d: ArrayLike, o_tx: ArrayLike) -> ComplexFieldVector:
    if not kr > 0:
        raise ValueError(f"kr must be positive, got {kr!r}")
    d, o_tx = UnitVector3.of(d), UnitVector3.of(o_tx)
    v = field_vector_array(kr, alpha_bar, d, o_tx)
    return ComplexFieldVector(v, scale=abs(prefactor(kr, alpha_bar)), dot_tx=d.dot(o_tx))


def h_coax(kr: float, alpha_bar: complex = DEFAULT_ALPHA_BAR) -> complex:
    return complex(prefactor(kr, alpha_bar) * _near_coeff(kr))


def h_copl(kr: float, alpha_bar: complex = DEFAULT_ALPHA_BAR) -> complex:
    return complex(prefactor(kr, alpha_bar) * (_far_coeff(kr) - 0.5 * _near_coeff(kr)))


def kr_threshold() -> float:
    """kr at which the coaxial and parallel arrangements couple equally well."""
    return math.sqrt((math.sqrt(37.0) + 5.0) / 2.0)


def optimal_pte(kr: float, alpha_bar: complex = DEFAULT_ALPHA_BAR) -> float:
    if kr <= kr_threshold():
        return abs(h_coax(kr, alpha_bar)) ** 2
    return abs(h_copl(kr, alpha_bar)) ** 2


def channel_matrix(kr: float, alpha_bar: complex, d: ArrayLike) -> NDArray:
    """Complex 3x3 matrix A with h = o_rx^T A o_tx."""
    d = _vec(UnitVector3.of(d))
    ddt = np.outer(d, d)
    eye = np.eye(3)
    alpha = prefactor(kr, alpha_bar)
    return alpha * (_near_coeff(kr) * (1.5 * ddt - 0.5 * eye) + _far_coeff(kr) * (eye - ddt))


def simo_mrc_magnitude(v: ComplexFieldVector | ArrayLike) -> float:
    """Effective |h| of a three-orthogonal-dipole receiver with maximum-ratio combining."""
    c = v.components if isinstance(v, ComplexFieldVector) else np.asarray(v, dtype=complex)
    return float(np.linalg.norm(c))


def prefactor_loop(mu0, area_tx, turns_tx, area_rx, turns_rx, freq, k, r_tx_ohm, r_rx_ohm) -> complex:
    """alpha_bar for two electrically small coils."""
    params = dict(mu0=mu0, area_tx=area_tx, turns_tx=turns_tx, area_rx=area_rx,
                  turns_rx=turns_rx, freq=freq, k=k, r_tx_ohm=r_tx_ohm, r_rx_ohm=r_rx_ohm)
    for name, val in params.items():
        if not val > 0:
            raise ValueError(f"{name} must be positive, got {val!r}")
    return 1j * mu0 * area_tx * turns_tx * area_rx * turns_rx * freq * k**3 / math.sqrt(4.0 * r_tx_ohm * r_rx_ohm)


def mutual_inductance(mu0, area_tx, turns_tx, area_rx, turns_rx, r, j_nf) -> float:
    if not r > 0:
        raise ValueError(f"distance must be positive, got {r!r}")
    return mu0 / (2.0 * math.pi) * area_tx * turns_tx * area_rx * turns_rx * j_nf / r**3


_DIPOLE_DIRECTIVITY = {"small": 1.5, "halfwave": 1.64}


def prefactor_dipole(kind: str = "small") -> float:
    try:
        return _DIPOLE_DIRECTIVITY[kind]
    except KeyError:
        raise ValueError(f"unknown dipole kind {kind!r}; expected 'small' or 'halfwave'") from None


def halfwave_pattern_exact(theta_tx: ArrayLike) -> NDArray:
    """Exact far-field pattern of a half-wave dipole, theta measured from the axis."""
    t = np.asarray(theta_tx, dtype=float)
    if np.any((t <= 0.0) | (t >= math.pi)):
        raise ValueError("theta must lie in the open interval (0, pi)")
    return np.cos(0.5 * math.pi * np.cos(t)) / np.sin(t)


def weak_coupling_check(h: ChannelCoefficient | complex, threshold: float = WEAK_COUPLING_THRESHOLD) -> bool:
    """True when |h|^2 is strictly below ``threshold``, i.e. the weak-coupling model applies."""
    pte = h.pte if isinstance(h, ChannelCoefficient) else abs(h) ** 2
    return pte < threshold
