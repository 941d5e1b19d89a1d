"""
Seeded Monte-Carlo sampling of orientations and channel coefficients.

Draw ``i`` is a pure function of ``(seed, i)``: indices are cut into fixed
chunks of ``CHUNK`` draws and chunk ``c`` reads its uniforms from a Philox
stream keyed by ``seed`` and jumped ``c`` times. Chunks may therefore be
generated by any number of worker threads with bitwise-identical output.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .geometry import (
    E_Z,
    DEFAULT_ALPHA_BAR,
    RegionKind,
    UnitVector3,
    alignment_factors_arrays,
    beta_ff,
    beta_nf,
    channel_from_alignment,
    optimal_pte,
)
from .stats import DistributionCurve

CHUNK = 1 << 16

Mode = Literal["both_random", "rx_random"]
Transform = Literal["magnitude2", "magnitude", "raw"]


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.Philox(key=seed).jumped(chunk))


def _generate(n: int, seed: int, width: int, kernel: Callable[[NDArray], NDArray], dtype,
              threads: int = 1, tail: tuple = ()) -> NDArray:
    """Fill ``n`` outputs; ``kernel`` maps an (m, width) block of uniforms to m outputs."""
    if n <= 0:
        raise ValueError("sample count must be positive")
    out = np.empty((n, *tail), dtype=dtype)
    n_chunks = -(-n // CHUNK)

    def work(c):
        lo = c * CHUNK
        m = min(CHUNK, n - lo)
        u = chunk_rng(seed, c).random((m, width))
        out[lo:lo + m] = kernel(u)

    if threads > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(n_chunks)))
    else:
        for c in range(n_chunks):
            work(c)
    return out


def sphere_from_uniforms(u_z: ArrayLike, u_phi: ArrayLike) -> NDArray:
    """Uniform points on the unit sphere: z ~ U(-1, 1), phi ~ U(0, 2 pi)."""
    z = 2.0 * np.asarray(u_z) - 1.0
    phi = 2.0 * math.pi * np.asarray(u_phi)
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def sample_unit_sphere(rng: np.random.Generator) -> UnitVector3:
    u = rng.random(2)
    return UnitVector3(*sphere_from_uniforms(u[0], u[1]))


def sample_unit_sphere_array(n: int, seed: int, threads: int = 1) -> NDArray:
    """``n`` uniform sphere points as an (n, 3) array."""
    return _generate(n, seed, 2, lambda u: sphere_from_uniforms(u[:, 0], u[:, 1]), float, threads, tail=(3,))


@dataclass
class SampleSet:
    values: NDArray
    seed: int
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.values)

    @property
    def pte(self) -> NDArray:
        return np.abs(self.values) ** 2


@dataclass
class Ecdf:
    """Empirical CDF over sorted samples."""

    sorted_values: NDArray

    @classmethod
    def from_values(cls, values: ArrayLike) -> "Ecdf":
        v = np.sort(np.asarray(values, dtype=float).ravel())
        if len(v) == 0:
            raise ValueError("cannot build an ECDF from an empty sample")
        return cls(v)

    def __len__(self):
        return len(self.sorted_values)

    def query(self, s: ArrayLike) -> NDArray:
        """Fraction of samples <= s (right-continuous step function)."""
        return np.searchsorted(self.sorted_values, s, side="right") / len(self.sorted_values)

    __call__ = query

    def quantile(self, eps: ArrayLike) -> NDArray:
        """Inverse ECDF with linear interpolation between order statistics."""
        eps = np.asarray(eps, dtype=float)
        if np.any((eps < 0) | (eps > 1)):
            raise ValueError("quantile levels must lie in [0, 1]")
        n = len(self.sorted_values)
        pos = np.clip(eps * n - 0.5, 0.0, n - 1.0)
        return np.interp(pos, np.arange(n), self.sorted_values)


def _channel_kernel(kr, alpha_bar, d, o_tx):
    d = np.asarray(d, dtype=float)

    def kernel(u):
        o_rx = sphere_from_uniforms(u[:, 0], u[:, 1])
        tx = sphere_from_uniforms(u[:, 2], u[:, 3]) if o_tx is None else np.asarray(o_tx, dtype=float)
        j_nf, j_ff = alignment_factors_arrays(d, tx, o_rx)
        return channel_from_alignment(kr, alpha_bar, j_nf, j_ff)

    return kernel


def sample_channel(
    n: int,
    kr: float,
    alpha_bar: complex = DEFAULT_ALPHA_BAR,
    mode: Mode = "both_random",
    seed: int = 0,
    d: ArrayLike = E_Z,
    o_tx: ArrayLike | None = None,
    dot: float | None = None,
    threads: int = 1,
) -> SampleSet:
    """Draw ``n`` channel coefficients.

    In ``rx_random`` mode the TX orientation is fixed: pass ``o_tx`` directly
    or ``dot`` (the value of d^T o_tx) with ``d`` left at e_z.
    """
    if not kr > 0:
        raise ValueError("kr must be positive")
    mode = mode.replace("-", "_")
    d = UnitVector3.of(d)
    if mode == "both_random":
        tx = None
        width = 4
    elif mode == "rx_random":
        if o_tx is None:
            if dot is None:
                raise ValueError("rx_random mode needs o_tx or dot")
            if not -1.0 <= dot <= 1.0:
                raise ValueError("dot must lie in [-1, 1]")
            o_tx = transmit_orientation(dot, d)
        tx = UnitVector3.of(o_tx)
        width = 2
    else:
        raise ValueError(f"unknown mode {mode!r}")
    values = _generate(n, seed, width, _channel_kernel(kr, alpha_bar, d, tx), complex, threads)
    meta = {"kr": kr, "alpha_bar": complex(alpha_bar), "scenario": mode, "d": d}
    if tx is not None:
        meta["o_tx"] = tx
    return SampleSet(values, seed, meta)


def transmit_orientation(dot: float, d: ArrayLike = E_Z) -> UnitVector3:
    """A TX orientation with d^T o_tx = dot (the component orthogonal to d is chosen deterministically)."""
    d = UnitVector3.of(d).as_array()
    helper = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    perp = helper - np.dot(helper, d) * d
    perp /= np.linalg.norm(perp)
    return UnitVector3(*(dot * d + math.sqrt(max(1.0 - dot * dot, 0.0)) * perp))


def sample_alignment(n: int, region: RegionKind | str, seed: int = 0, threads: int = 1) -> SampleSet:
    """J_nf or J_ff from i.i.d. uniform TX and RX orientations (d = e_z)."""
    region = RegionKind.parse(region)
    if region is RegionKind.TRANSITION:
        raise ValueError("alignment sampling needs the near or far region")
    pick = 0 if region is RegionKind.NEAR_FIELD else 1

    def kernel(u):
        o_rx = sphere_from_uniforms(u[:, 0], u[:, 1])
        o_tx = sphere_from_uniforms(u[:, 2], u[:, 3])
        return alignment_factors_arrays(np.asarray(E_Z), o_tx, o_rx)[pick]

    values = _generate(n, seed, 4, kernel, float, threads)
    return SampleSet(values, seed, {"scenario": f"alignment_{region.value}"})


def sample_projection(n: int, seed: int = 0, threads: int = 1) -> SampleSet:
    """d^T o_tx for uniform o_tx (d = e_z)."""
    values = _generate(n, seed, 2, lambda u: sphere_from_uniforms(u[:, 0], u[:, 1])[:, 2], float, threads)
    return SampleSet(values, seed, {"scenario": "projection"})


def sample_field_magnitude(n: int, region: RegionKind | str, seed: int = 0, threads: int = 1) -> SampleSet:
    """beta_nf or beta_ff for a uniformly random TX orientation."""
    region = RegionKind.parse(region)
    proj = sample_projection(n, seed, threads).values
    if region is RegionKind.NEAR_FIELD:
        values = beta_nf(proj)
    elif region is RegionKind.FAR_FIELD:
        values = beta_ff(proj)
    else:
        raise ValueError("field magnitude sampling needs the near or far region")
    return SampleSet(values, seed, {"scenario": f"beta_{region.value}"})


def ecdf(samples: SampleSet, transform: Transform = "magnitude2") -> Ecdf:
    v = samples.values
    if transform == "magnitude2":
        x = np.abs(v) ** 2
    elif transform == "magnitude":
        x = np.abs(v)
    elif transform == "raw":
        if np.iscomplexobj(v):
            raise ValueError("raw transform needs real samples")
        x = v
    else:
        raise ValueError(f"unknown transform {transform!r}")
    return Ecdf.from_values(x)


def normalized_pte(samples: SampleSet) -> NDArray:
    """|h|^2 / eta_opt for a channel sample set."""
    return samples.pte / optimal_pte(samples.meta["kr"], samples.meta["alpha_bar"])


def misalignment_loss_cdf(
    kr_list,
    n: int,
    seed: int = 0,
    loss_db: ArrayLike | None = None,
    alpha_bar: complex = DEFAULT_ALPHA_BAR,
    threads: int = 1,
) -> dict[float, DistributionCurve]:
    """CDF of the misalignment loss 10 log10(|h|^2 / eta_opt) in dB, one curve per kr."""
    if loss_db is None:
        loss_db = np.linspace(-60.0, 0.0, 121)
    loss_db = np.asarray(loss_db, dtype=float)
    curves = {}
    for kr in kr_list:
        s = sample_channel(n, kr, alpha_bar, "both_random", seed, threads=threads)
        e = Ecdf.from_values(normalized_pte(s))
        curves[kr] = DistributionCurve(loss_db, e.query(10.0 ** (loss_db / 10.0)), "cdf1d",
                                       {"kr": kr, "n": n, "seed": seed, "unit": "dB"})
    return curves
