"""
Outage and error-rate analysis for randomly oriented dipoles.

Near- and far-field quantities follow from the alignment-factor law with
|h|^2 ~ eta_opt * J^2. The transition region has no closed form; there the
quantities are read off an empirical CDF (see ``outage_pte_empirical``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import erfc

from .geometry import RegionKind
from .montecarlo import Ecdf
from .quadrature import integrate
from .stats import alignment_pdf, pdf_at_zero

ACCURACY_RATIO = 1e-2


class AccuracyWarning(UserWarning):
    """The small-outage approximation is used outside eta_eps << eta_opt."""


@dataclass(frozen=True)
class OutageSpec:
    epsilon: float
    region: RegionKind = RegionKind.NEAR_FIELD
    eta_opt: float = 1.0
    snr_opt: float = 0.0
    p_tx: float = 1.0
    p_n: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "region", RegionKind.parse(self.region))
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if not self.eta_opt > 0:
            raise ValueError("eta_opt must be positive")
        if not self.snr_opt >= 0:
            raise ValueError("snr_opt must be nonnegative")
        if not (self.p_tx > 0 and self.p_n > 0):
            raise ValueError("powers must be positive")


def q_function(x: ArrayLike) -> NDArray:
    """Gaussian tail probability Q(x) = erfc(x / sqrt 2) / 2."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def _region_factor(region) -> float:
    return 2.0 * pdf_at_zero(region)


def _check_accuracy(eta_eps, eta_opt):
    if np.any(np.asarray(eta_eps) > ACCURACY_RATIO * eta_opt):
        warnings.warn(
            f"outage approximation is inaccurate for eta_eps > {ACCURACY_RATIO:g} * eta_opt",
            AccuracyWarning, stacklevel=3)


def outage_probability(eta_target: ArrayLike, spec: OutageSpec) -> NDArray | float:
    """P(|h|^2 < eta_target) ~ 2 f_J(0) sqrt(eta_target / eta_opt); valid for eta_target << eta_opt."""
    eta = np.asarray(eta_target, dtype=float)
    if np.any(eta < 0):
        raise ValueError("target PTE must be nonnegative")
    _check_accuracy(eta, spec.eta_opt)
    p = _region_factor(spec.region) * np.sqrt(eta / spec.eta_opt)
    return float(p) if p.ndim == 0 else p


def outage_pte(spec: OutageSpec) -> float:
    """PTE met with probability 1 - epsilon: epsilon^2 eta_opt / (2 f_J(0))^2."""
    eta = spec.epsilon**2 * spec.eta_opt / _region_factor(spec.region) ** 2
    _check_accuracy(eta, spec.eta_opt)
    return eta


def outage_pte_empirical(ecdf: Ecdf, epsilon: ArrayLike) -> NDArray:
    """Outage PTE from sampled |h|^2 (any region, including the transition)."""
    return ecdf.quantile(epsilon)


class OutageCapacity(NamedTuple):
    capacity: float
    linearized_bound: float


def outage_capacity(spec: OutageSpec, cdf_inverse: Callable[[float], float] | float | None = None) -> OutageCapacity:
    """Outage capacity in bit/s/Hz and its log-linearized upper bound.

    ``cdf_inverse`` is F^{-1}_{|h|^2}: a callable of epsilon, a precomputed
    value, or ``None`` for the near/far-field closed form.
    """
    if cdf_inverse is None:
        s = outage_pte(spec)
    elif callable(cdf_inverse):
        s = float(cdf_inverse(spec.epsilon))
    else:
        s = float(cdf_inverse)
    if s < 0:
        raise ValueError("inverse CDF value must be nonnegative")
    gain = s * spec.p_tx / spec.p_n
    return OutageCapacity(math.log2(1.0 + gain), math.log2(math.e) * gain)


def _region_breaks(region, snr_opt=0.0, power=2):
    region = RegionKind.parse(region)
    base = [-0.5, 0.0, 0.5] if region is RegionKind.NEAR_FIELD else [0.0]
    if snr_opt > 0:
        # the Q factor collapses within |j| ~ (2 snr)^(-1/power) of zero
        scale = (2.0 * snr_opt) ** (-1.0 / power)
        for c in (0.25, 1.0, 4.0, 16.0, 64.0):
            if c * scale < 0.5:
                base += [c * scale, -c * scale]
    return sorted(set([-1.0, 1.0] + base))


def _ber_quadrature(snr_opt, region, power):
    if not snr_opt >= 0:
        raise ValueError("snr_opt must be nonnegative")
    pdf = alignment_pdf(region)
    g = 2.0 * snr_opt

    def integrand(j):
        return pdf(j) * q_function(np.sqrt(g * np.abs(j) ** power))

    value, _ = integrate(integrand, _region_breaks(region, snr_opt, power), epsrel=1e-11, epsabs=1e-300)
    return value


def ber_exact_region(snr_opt: float, region: RegionKind | str) -> float:
    """BPSK error rate E[Q(sqrt(2 J^2 SNR_opt))] in the near or far region."""
    return _ber_quadrature(snr_opt, region, 2)


def ber_backscatter(snr_opt: float, region: RegionKind | str) -> float:
    """BPSK error rate when the channel applies twice (SNR ~ SNR_opt J^4)."""
    return _ber_quadrature(snr_opt, region, 4)


def ber_bound(snr_opt: float, region: RegionKind | str) -> float:
    """Large-SNR upper bound f_J(0) / sqrt(pi SNR_opt)."""
    if not snr_opt > 0:
        raise ValueError("the BER bound needs snr_opt > 0")
    return pdf_at_zero(region) / math.sqrt(math.pi * snr_opt)


def ber_bound_tight(snr_opt: float, region: RegionKind | str) -> float:
    """Intermediate bound 2 f_J(0) [(1 - e^-SNR) / sqrt(4 pi SNR) + Q(sqrt(2 SNR))]."""
    if not snr_opt > 0:
        raise ValueError("the BER bound needs snr_opt > 0")
    first = -math.expm1(-snr_opt) / math.sqrt(4.0 * math.pi * snr_opt)
    return 2.0 * pdf_at_zero(region) * (first + float(q_function(math.sqrt(2.0 * snr_opt))))


def ber_monte_carlo(normalized_pte: ArrayLike, snr_opt: float, power: int = 1) -> tuple[float, float]:
    """Sample mean and standard error of Q(sqrt(2 SNR_opt x^power)) over sampled x = |h|^2 / eta_opt."""
    x = np.asarray(normalized_pte, dtype=float)
    q = q_function(np.sqrt(2.0 * snr_opt * x**power))
    return float(q.mean()), float(q.std(ddof=1) / math.sqrt(len(q)))


def diversity_exponent_fit(snr: ArrayLike, p: ArrayLike, window: tuple[float, float] | None = (1e2, 1e4)) -> float:
    """Negated least-squares slope of log p against log snr inside ``window``."""
    snr = np.asarray(snr, dtype=float)
    p = np.asarray(p, dtype=float)
    if snr.shape != p.shape:
        raise ValueError("snr and p must have equal length")
    mask = np.isfinite(snr) & np.isfinite(p) & (snr > 0) & (p > 0)
    if window is not None:
        mask &= (snr >= window[0]) & (snr <= window[1])
    x, y = np.log10(snr[mask]), np.log10(p[mask])
    if len(x) < 5 or x.max() - x.min() < 2.0 - 1e-9:
        raise ValueError("diversity fit needs at least 5 points spanning 2 decades of snr")
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)


def rayleigh_reference_cdf(s: ArrayLike, sigma2: float) -> NDArray:
    """CDF of |h|^2 under Rayleigh fading with E|h|^2 = sigma2."""
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    return -np.expm1(-np.asarray(s, dtype=float) / sigma2)
