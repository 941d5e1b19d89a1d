"""
Closed-form channel statistics under uniformly random 3D orientations.

Marginal laws of the alignment factors and field magnitudes, the conditional
law of h for a fixed TX orientation, the small-s CDF bounds and
approximations, and the numerically integrated PDF of h when both ends are
random.

Densities return ``inf`` at their integrable singular points (the edge of
the unit disk for ``psi``, beta_nf = 1/2, beta_ff = 1).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .geometry import (
    ComplexFieldVector,
    RegionKind,
    h_coax,
    h_copl,
)
from .quadrature import QuadratureError, QuadResult, integrate_batch

ARCOSH2 = math.acosh(2.0)
BETA_NF_BAR = math.sqrt(3.0) / (2.0 * ARCOSH2)


class DegenerateFieldError(ValueError):
    """The field vector's real and imaginary parts are collinear; h | v has no 2D density."""


# --- curves -----------------------------------------------------------------

@dataclass
class DistributionCurve:
    """Tabulated PDF or CDF.

    For ``pdf2d`` the grid is ``(re_axis, im_axis)`` and ``density`` has
    shape ``(len(im_axis), len(re_axis))``.
    """

    grid: NDArray | tuple[NDArray, NDArray]
    density: NDArray
    kind: Literal["pdf1d", "cdf1d", "pdf2d"]
    meta: dict = field(default_factory=dict)

    def integral(self) -> float:
        """Trapezoidal mass. Non-finite nodes (integrable singularities) count as zero.

        For ``pdf2d`` curves of h this is only meaningful when the grid
        resolves the support; far from kr ~ 2 the rhombus is thin and needs
        a much finer grid than its bounding box suggests.
        """
        if self.kind == "cdf1d":
            raise ValueError("integral() applies to PDFs")
        dens = np.where(np.isfinite(self.density), self.density, 0.0)
        if self.kind == "pdf1d":
            return float(np.trapezoid(dens, self.grid))
        re_axis, im_axis = self.grid
        return float(np.trapezoid(np.trapezoid(dens, re_axis, axis=1), im_axis))

    def to_cdf(self) -> "DistributionCurve":
        """Cumulative trapezoid of a 1D PDF (second-order accurate)."""
        if self.kind != "pdf1d":
            raise ValueError("to_cdf() needs a 1D PDF")
        dens = np.where(np.isfinite(self.density), self.density, 0.0)
        steps = 0.5 * (dens[1:] + dens[:-1]) * np.diff(self.grid)
        cdf = np.concatenate([[0.0], np.cumsum(steps)])
        return DistributionCurve(np.asarray(self.grid), np.clip(cdf, 0.0, 1.0), "cdf1d", dict(self.meta))


# --- marginal laws ------------------------------------------------------------

def pdf_j_nf(j: ArrayLike) -> NDArray:
    a = np.abs(np.asarray(j, dtype=float))
    tail = 1.0 - np.arccosh(np.maximum(2.0 * a, 1.0)) / ARCOSH2
    val = np.where(a <= 0.5, 1.0, np.where(a < 1.0, tail, 0.0))
    return val / (2.0 * BETA_NF_BAR)


def cdf_j_nf(j: ArrayLike) -> NDArray:
    j = np.asarray(j, dtype=float)
    u = np.minimum(np.abs(j), 1.0)
    uu = np.maximum(u, 0.5)
    antider = uu * np.arccosh(2.0 * uu) - 0.5 * np.sqrt(4.0 * uu * uu - 1.0)
    half = np.where(u <= 0.5, u, u - antider / ARCOSH2) / (2.0 * BETA_NF_BAR)
    return 0.5 + np.sign(j) * half


def pdf_j_ff(j: ArrayLike) -> NDArray:
    a = np.abs(np.asarray(j, dtype=float))
    return np.where(a <= 1.0, 0.5 * (0.5 * math.pi - np.arcsin(np.minimum(a, 1.0))), 0.0)


def cdf_j_ff(j: ArrayLike) -> NDArray:
    j = np.asarray(j, dtype=float)
    u = np.minimum(np.abs(j), 1.0)
    half = 0.5 * (0.5 * math.pi * u - (u * np.arcsin(u) + np.sqrt(1.0 - u * u) - 1.0))
    return 0.5 + np.sign(j) * half


def pdf_beta_nf(beta: ArrayLike) -> NDArray:
    b = np.asarray(beta, dtype=float)
    inside = (b >= 0.5) & (b <= 1.0)
    rad = np.where(inside, 4.0 * b * b - 1.0, 1.0)
    with np.errstate(divide="ignore"):
        val = 4.0 / math.sqrt(3.0) * b / np.sqrt(rad)
    return np.where(inside, np.where(rad > 0, val, np.inf), 0.0)


def cdf_beta_nf(beta: ArrayLike) -> NDArray:
    b = np.clip(np.asarray(beta, dtype=float), 0.5, 1.0)
    return np.sqrt((4.0 * b * b - 1.0) / 3.0)


def pdf_beta_ff(beta: ArrayLike) -> NDArray:
    b = np.asarray(beta, dtype=float)
    inside = (b >= 0.0) & (b <= 1.0)
    rad = np.where(inside, 1.0 - b * b, 1.0)
    with np.errstate(divide="ignore"):
        val = b / np.sqrt(rad)
    return np.where(inside, np.where(rad > 0, val, np.inf), 0.0)


def cdf_beta_ff(beta: ArrayLike) -> NDArray:
    b = np.clip(np.asarray(beta, dtype=float), 0.0, 1.0)
    return 1.0 - np.sqrt(1.0 - b * b)


def pdf_at_zero(region: RegionKind | str) -> float:
    """f_J(0) of the alignment factor that governs ``region``."""
    region = RegionKind.parse(region)
    if region is RegionKind.NEAR_FIELD:
        return float(pdf_j_nf(0.0))
    if region is RegionKind.FAR_FIELD:
        return float(pdf_j_ff(0.0))
    raise ValueError("the transition region has no single alignment factor")


def alignment_pdf(region: RegionKind | str):
    region = RegionKind.parse(region)
    if region is RegionKind.NEAR_FIELD:
        return pdf_j_nf
    if region is RegionKind.FAR_FIELD:
        return pdf_j_ff
    raise ValueError("the transition region has no single alignment factor")


def psi(x: ArrayLike) -> NDArray:
    """Joint density of two orthonormal projections of a uniform sphere point, as a function of m^2 + n^2."""
    x = np.asarray(x, dtype=float)
    inside = (x >= 0.0) & (x <= 1.0)
    rad = np.where(inside, 1.0 - x, 1.0)
    with np.errstate(divide="ignore"):
        val = 1.0 / (2.0 * math.pi * np.sqrt(rad))
    return np.where(inside, np.where(rad > 0, val, np.inf), 0.0)


# --- conditional law of h given the field vector ---------------------------------

def _conditional_density(h_re, h_im, v_re, v_im, rho, c=None):
    # Gram-Schmidt factor E = diag(v_re, v_im) @ [[1, 0], [rho, c]], c = sqrt(1 - rho^2)
    if c is None:
        c = np.sqrt(1.0 - rho * rho)
    w1 = h_re / v_re
    w2 = (h_im / v_im - rho * w1) / c
    return psi(w1 * w1 + w2 * w2) / (v_re * v_im * c)


def pdf_h_conditional(h: ArrayLike, v: ComplexFieldVector) -> NDArray:
    """Density of h = o_rx^T v over the complex plane for a uniformly random o_rx."""
    if not v.linearly_independent:
        raise DegenerateFieldError(
            "real and imaginary parts of v are linearly dependent; h | v is supported on a segment")
    h = np.asarray(h, dtype=complex)
    c = _sine_between(v.re, v.im)
    return _conditional_density(h.real, h.imag, v.v_re_norm, v.v_im_norm, v.rho, c)


def _sine_between(u, w):
    # |u x w| / (|u| |w|) stays accurate where sqrt(1 - rho^2) cancels
    return np.linalg.norm(np.cross(u, w), axis=-1) / (np.linalg.norm(u, axis=-1) * np.linalg.norm(w, axis=-1))


@dataclass(frozen=True)
class EllipseSupport:
    v_re_norm: float
    v_im_norm: float
    rho: float
    a: float
    b: float
    s0: float
    degenerate: bool = False


def support_ellipse(v: ComplexFieldVector) -> EllipseSupport:
    """Axes data of the elliptic support of h | v; ``s0`` is the squared semi-minor axis."""
    vr, vi, rho = v.v_re_norm, v.v_im_norm, v.rho
    a = 0.5 * (vr * vr + vi * vi)
    if not v.linearly_independent:
        return EllipseSupport(vr, vi, rho, a, 0.0, 0.0, degenerate=True)
    b = vr * vi * math.sqrt(1.0 - rho * rho)
    # a - sqrt(a^2 - b^2) without cancellation
    s0 = b * b / (a + math.sqrt(max(a * a - b * b, 0.0)))
    return EllipseSupport(vr, vi, rho, a, b, s0)


def cdf_pte_conditional_bounds(s: float, v: ComplexFieldVector) -> tuple[float, float]:
    """Lower and upper bounds on P(|h|^2 <= s | v), valid for 0 <= s < s0."""
    ell = support_ellipse(v)
    if ell.degenerate:
        raise DegenerateFieldError("bounds need a non-degenerate field vector")
    if not 0.0 <= s < ell.s0:
        raise ValueError(f"bounds hold only for 0 <= s < s0 = {ell.s0:.6g}, got s = {s:.6g}")
    lower = s / (2.0 * ell.b)
    return lower, lower / math.sqrt(1.0 - s / ell.s0)


def cdf_pte_region_approx(s: ArrayLike, region: RegionKind | str, eta_opt: float) -> NDArray:
    """Small-s approximation of F_{|h|^2}(s) in the near- or far-field region (an upper bound)."""
    if not eta_opt > 0:
        raise ValueError("eta_opt must be positive")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("s must be nonnegative")
    return 2.0 * pdf_at_zero(region) * np.sqrt(s / eta_opt)


# --- full law of h (both orientations random) ------------------------------------

def rhombus_coordinates(h: ArrayLike, kr: float, alpha_bar: complex) -> tuple[NDArray, NDArray]:
    """Coordinates (a, b) with h = a * h_coax + b * h_copl; the support of f(h) is |a| + |b| <= 1."""
    hc, hp = h_coax(kr, alpha_bar), h_copl(kr, alpha_bar)
    m = np.array([[hc.real, hp.real], [hc.imag, hp.imag]])
    h = np.asarray(h, dtype=complex)
    ab = np.linalg.solve(m, np.stack([h.real.ravel(), h.imag.ravel()]))
    return ab[0].reshape(h.shape), ab[1].reshape(h.shape)


def _conditional_support(a, b):
    """Interval [x_lo, x_hi] of d^T o_tx > 0 whose conditional ellipse contains the point.

    The ellipse for projection x contains h iff a^2/x^2 + b^2/(1-x^2) <= 1,
    a quadratic in x^2 with roots y1 <= y2.
    """
    a2, b2 = a * a, b * b
    p = 1.0 + a2 - b2
    disc = p * p - 4.0 * a2
    inside = (np.abs(a) + np.abs(b) < 1.0) & (disc > 0)
    root = np.sqrt(np.where(inside, disc, 0.0))
    y2 = 0.5 * (p + root)
    y1 = np.where(inside, 2.0 * a2 / np.where(inside, p + root, 1.0), 0.0)
    return np.sqrt(y1), np.sqrt(np.clip(y2, 0.0, 1.0)), inside


def _full_pdf_block(h, kr, alpha_bar, panels, epsrel, max_levels):
    a, b = rhombus_coordinates(h, kr, alpha_bar)
    x_lo, x_hi, inside = _conditional_support(a, b)
    singular = inside & (a == 0.0)
    active = np.flatnonzero(inside & ~singular)
    n = len(active)
    values = np.zeros(h.shape)
    errors = np.zeros(h.shape)
    converged = np.ones(h.shape, dtype=bool)
    values[singular] = np.inf
    if n == 0:
        return values, errors, converged, 0

    lo_x, hi_x = x_lo[active], x_hi[active]
    scale = full_scale(kr, alpha_bar)

    # For d = e_z and o_tx = (s, 0, x) the field vector is x h_coax e_z + s h_copl e_x,
    # so h | x has whitened coordinates (a / x, b / s) and
    #   f(h | x) = 1 / (2 pi |det| sqrt((x^2 - x_lo^2)(x_hi^2 - x^2))).
    # The map x = x_lo + (x_hi - x_lo)(1 - cos t) / 2 cancels both edge factors;
    # the mirror interval x < 0 contributes the same amount as x > 0.
    def integrand(t, own):
        lo = lo_x[own][:, None]
        hi = hi_x[own][:, None]
        x = lo + (hi - lo) * np.sin(0.5 * t) ** 2
        return 1.0 / (2.0 * math.pi * np.sqrt((x + lo) * (x + hi)))

    res = integrate_batch(
        integrand,
        np.zeros(n), np.full(n, math.pi),
        n_problems=n,
        epsrel=epsrel, initial_panels=panels, max_levels=max_levels,
    )
    values[active] = res.value / scale
    errors[active] = res.error / scale
    converged[active] = res.converged
    return values, errors, converged, res.evaluations


def pdf_h_full_values(
    h: ArrayLike,
    kr: float,
    alpha_bar: complex,
    quad_nodes: int = 32,
    epsrel: float = 1e-7,
    max_levels: int = 60,
    threads: int = 1,
    block: int = 2048,
) -> QuadResult:
    """f(h) at arbitrary complex points, by integrating f(h | d^T o_tx = x) / 2 over x.

    ``quad_nodes`` is the starting node budget per support interval, rounded
    up to whole 15-point Kronrod panels. Points on the segment between
    +-h_copl (a = 0) carry a logarithmic singularity and return ``inf``;
    points close to it stay accurate.
    """
    if not kr > 0:
        raise ValueError("kr must be positive")
    if quad_nodes < 16:
        raise ValueError("quad_nodes must be at least 16")
    panels = -(-quad_nodes // 15)
    h = np.asarray(h, dtype=complex)
    flat = h.ravel()
    starts = list(range(0, len(flat), block))

    def run(start):
        return _full_pdf_block(flat[start:start + block], kr, alpha_bar, panels, epsrel, max_levels)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    if parts:
        values = np.concatenate([p[0] for p in parts])
        errors = np.concatenate([p[1] for p in parts])
        conv = np.concatenate([p[2] for p in parts])
    else:
        values = errors = np.zeros(0)
        conv = np.zeros(0, dtype=bool)
    evals = sum(p[3] for p in parts)
    return QuadResult(values.reshape(h.shape), errors.reshape(h.shape), conv.reshape(h.shape), evals)


def rhombus_grid(kr: float, alpha_bar: complex, resolution: int = 201, pad: float = 0.05) -> NDArray:
    """Cartesian complex grid over the bounding box of the support rhombus, padded by ``pad``."""
    if resolution < 3:
        raise ValueError("grid resolution must be at least 3")
    hc, hp = h_coax(kr, alpha_bar), h_copl(kr, alpha_bar)
    re_max = max(abs(hc.real), abs(hp.real)) * (1.0 + pad)
    im_max = max(abs(hc.imag), abs(hp.imag)) * (1.0 + pad)
    re_axis = np.linspace(-re_max, re_max, resolution)
    im_axis = np.linspace(-im_max, im_max, resolution)
    return re_axis[None, :] + 1j * im_axis[:, None]


def pdf_h_full(
    h_grid: ArrayLike,
    kr: float,
    alpha_bar: complex,
    quad_nodes: int = 32,
    epsrel: float = 1e-7,
    threads: int = 1,
    strict: bool = True,
) -> DistributionCurve:
    """PDF of h on a Cartesian complex grid (rows: imaginary axis, columns: real axis).

    Raises ``QuadratureError`` (carrying the partial curve) if any grid point
    misses its tolerance and ``strict`` is set.
    """
    h_grid = np.asarray(h_grid, dtype=complex)
    if h_grid.ndim != 2:
        raise ValueError("h_grid must be a 2D meshgrid of complex points")
    res = pdf_h_full_values(h_grid, kr, alpha_bar, quad_nodes=quad_nodes, epsrel=epsrel, threads=threads)
    curve = DistributionCurve(
        grid=(h_grid[0, :].real.copy(), h_grid[:, 0].imag.copy()),
        density=res.value,
        kind="pdf2d",
        meta={"kr": kr, "alpha_bar": complex(alpha_bar), "error": res.error,
              "converged": res.converged, "evaluations": res.evaluations},
    )
    if strict and not res.all_converged:
        bad = int(np.count_nonzero(~res.converged))
        raise QuadratureError(f"{bad} grid point(s) missed the quadrature tolerance", curve)
    return curve


def conditional_grid(v: ComplexFieldVector, resolution: int = 201, pad: float = 0.05) -> NDArray:
    """Cartesian grid over the bounding box of the conditional support ellipse."""
    re_max = v.v_re_norm * (1.0 + pad)
    im_max = v.v_im_norm * (1.0 + pad)
    re_axis = np.linspace(-re_max, re_max, resolution)
    im_axis = np.linspace(-im_max, im_max, resolution)
    return re_axis[None, :] + 1j * im_axis[:, None]


def full_scale(kr: float, alpha_bar: complex) -> float:
    """|det| of the map (a, b) -> h; f(h) times this is the density in rhombus coordinates."""
    hc, hp = h_coax(kr, alpha_bar), h_copl(kr, alpha_bar)
    return abs((hc.conjugate() * hp).imag)


__all__ = [
    "ARCOSH2", "BETA_NF_BAR", "DegenerateFieldError", "DistributionCurve", "EllipseSupport",
    "alignment_pdf", "cdf_beta_ff", "cdf_beta_nf", "cdf_j_ff", "cdf_j_nf", "cdf_pte_conditional_bounds",
    "cdf_pte_region_approx", "conditional_grid", "full_scale", "pdf_at_zero", "pdf_beta_ff", "pdf_beta_nf",
    "pdf_h_conditional", "pdf_h_full", "pdf_h_full_values", "pdf_j_ff", "pdf_j_nf", "psi",
    "rhombus_coordinates", "rhombus_grid", "support_ellipse",
]
