"""
Command-line front end: every subcommand writes one CSV table.

Output is RFC-4180 CSV preceded by ``#`` comment lines holding the tool
version and the full run configuration. Exit codes: 0 success, 2 invalid
configuration, 3 numerical-convergence failure.
"""

from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .geometry import E_Z, beta_ff, beta_nf, field_vector
from .montecarlo import (
    Ecdf,
    misalignment_loss_cdf,
    normalized_pte,
    sample_alignment,
    sample_channel,
    sample_field_magnitude,
    transmit_orientation,
)
from .outage import (
    OutageSpec,
    ber_backscatter,
    ber_bound,
    ber_exact_region,
    ber_monte_carlo,
    diversity_exponent_fit,
    outage_capacity,
    outage_pte,
    rayleigh_reference_cdf,
)
from .quadrature import QuadratureError
from .stats import (
    DegenerateFieldError,
    conditional_grid,
    pdf_beta_ff,
    pdf_beta_nf,
    pdf_h_conditional,
    pdf_h_full,
    pdf_j_ff,
    pdf_j_nf,
    rhombus_grid,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

THREADS_ENV = "DIPOLE_FADE_THREADS"


class ConfigError(ValueError):
    pass


def parse_alpha_bar(text: str) -> complex:
    """Accepts ``re``, ``re,im`` or ``mag@deg`` (also ``mag∠deg``)."""
    s = text.strip().replace("∠", "@")
    try:
        if "@" in s:
            mag, deg = (float(p) for p in s.split("@"))
            return cmath.rect(mag, math.radians(deg))
        if "," in s:
            re_, im_ = (float(p) for p in s.split(","))
            return complex(re_, im_)
        return complex(float(s), 0.0)
    except ValueError:
        raise ConfigError(f"cannot parse alpha-bar {text!r}; use 're', 're,im' or 'mag@deg'") from None


def parse_float_list(text: str) -> list[float]:
    try:
        vals = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse number list {text!r}") from None
    if not vals:
        raise ConfigError("empty number list")
    return vals


@dataclass
class RunConfig:
    subcommand: str
    kr: float = 2.0
    alpha_bar: complex = 1e-2
    seed: int = 0
    samples: int = 1_000_000
    grid: int | None = None
    out: str = "-"
    threads: int = 1
    region: str = "near"
    mode: str = "both-random"
    dot: float = 0.3
    kr_list: list[float] = field(default_factory=lambda: [0.1, 1.0, 2.0, 5.0, 100.0])
    snr_opt: float = 100.0
    rayleigh: bool = False
    epsrel: float = 1e-7

    def validate(self):
        if not (math.isfinite(self.kr) and self.kr > 0):
            raise ConfigError("--kr must be positive and finite")
        if not (cmath.isfinite(self.alpha_bar) and self.alpha_bar != 0):
            raise ConfigError("--alpha-bar must be finite and nonzero")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("--seed must be a 64-bit unsigned integer")
        if self.samples <= 0:
            raise ConfigError("--samples must be positive")
        if self.grid is not None and self.grid < 3:
            raise ConfigError("--grid must be at least 3")
        if self.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if self.region not in ("near", "far", "transition"):
            raise ConfigError("--region must be near, far or transition")
        if self.mode not in ("both-random", "rx-random"):
            raise ConfigError("--mode must be both-random or rx-random")
        if not -1.0 <= self.dot <= 1.0:
            raise ConfigError("--dot must lie in [-1, 1]")
        if any(not (k > 0 and math.isfinite(k)) for k in self.kr_list):
            raise ConfigError("--kr-list entries must be positive")
        if not self.snr_opt > 0:
            raise ConfigError("--snr-opt must be positive")
        if not 0 < self.epsrel < 1:
            raise ConfigError("--epsrel must lie in (0, 1)")

    def provenance(self) -> dict:
        # threads never changes results, so it stays out of the recorded config
        d = asdict(self)
        d.pop("threads")
        d.pop("out")
        d["alpha_bar"] = [self.alpha_bar.real, self.alpha_bar.imag]
        return d


class Table:
    def __init__(self, columns):
        self.columns = list(columns)
        self.rows = []

    def add(self, *values):
        self.rows.append(values)

    def extend(self, *columns):
        for row in zip(*columns):
            self.rows.append(row)


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(table: Table, config: RunConfig, stream):
    stream.write(f"# dipolefade {__version__}\n")
    stream.write(f"# command: {config.subcommand}\n")
    stream.write("# config: " + json.dumps(config.provenance(), sort_keys=True) + "\n")
    writer = csv.writer(stream, lineterminator="\r\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt(v) for v in row])


# --- subcommands ---------------------------------------------------------------

def cmd_field_map(cfg: RunConfig) -> Table:
    """beta_nf and beta_ff over the x-z plane around a TX dipole along z (origin omitted)."""
    n = cfg.grid or 101
    axis = np.linspace(-1.0, 1.0, n)
    xx, zz = np.meshgrid(axis, axis)
    pos = np.stack([xx.ravel(), np.zeros(xx.size), zz.ravel()], axis=-1)
    r = np.linalg.norm(pos, axis=-1)
    keep = r > 0
    d = pos[keep] / r[keep, None]
    dot = d @ np.asarray(E_Z)
    t = Table(["x", "z", "beta_nf", "beta_ff"])
    t.extend(pos[keep, 0], pos[keep, 2], beta_nf(dot), beta_ff(dot))
    return t


def _bin_centers(lo, hi, n):
    edges = np.linspace(lo, hi, n + 1)
    return edges, 0.5 * (edges[1:] + edges[:-1])


def cmd_pdf_j(cfg: RunConfig) -> Table:
    edges, centers = _bin_centers(-1.0, 1.0, cfg.grid or 100)
    t = Table(["j", "pdf_j_nf", "pdf_j_ff", "hist_j_nf", "hist_j_ff"])
    near = sample_alignment(cfg.samples, "near", cfg.seed, cfg.threads).values
    far = sample_alignment(cfg.samples, "far", cfg.seed, cfg.threads).values
    hn, _ = np.histogram(near, edges, density=True)
    hf, _ = np.histogram(far, edges, density=True)
    t.extend(centers, pdf_j_nf(centers), pdf_j_ff(centers), hn, hf)
    return t


def cmd_pdf_beta(cfg: RunConfig) -> Table:
    edges, centers = _bin_centers(0.0, 1.0, cfg.grid or 100)
    t = Table(["beta", "pdf_beta_nf", "pdf_beta_ff", "hist_beta_nf", "hist_beta_ff"])
    near = sample_field_magnitude(cfg.samples, "near", cfg.seed, cfg.threads).values
    far = sample_field_magnitude(cfg.samples, "far", cfg.seed, cfg.threads).values
    hn, _ = np.histogram(near, edges, density=True)
    hf, _ = np.histogram(far, edges, density=True)
    t.extend(centers, pdf_beta_nf(centers), pdf_beta_ff(centers), hn, hf)
    return t


def cmd_pdf_h_cond(cfg: RunConfig) -> Table:
    v = field_vector(cfg.kr, cfg.alpha_bar, E_Z, transmit_orientation(cfg.dot))
    if not v.linearly_independent:
        raise DegenerateFieldError(
            f"d^T o_tx = {cfg.dot:g} gives a degenerate field vector; the conditional law lives on a segment")
    grid = conditional_grid(v, cfg.grid or 201)
    pdf = pdf_h_conditional(grid, v)
    t = Table(["re_h", "im_h", "pdf"])
    t.extend(grid.real.ravel(), grid.imag.ravel(), pdf.ravel())
    return t


def cmd_pdf_h_full(cfg: RunConfig) -> Table:
    grid = rhombus_grid(cfg.kr, cfg.alpha_bar, cfg.grid or 201)
    curve = pdf_h_full(grid, cfg.kr, cfg.alpha_bar, epsrel=cfg.epsrel, threads=cfg.threads)
    t = Table(["re_h", "im_h", "pdf"])
    t.extend(grid.real.ravel(), grid.imag.ravel(), curve.density.ravel())
    return t


def cmd_scatter(cfg: RunConfig) -> Table:
    mode = cfg.mode.replace("-", "_")
    if mode == "rx_random":
        v = field_vector(cfg.kr, cfg.alpha_bar, E_Z, transmit_orientation(cfg.dot))
        if not v.linearly_independent:
            print(f"note: d^T o_tx = {cfg.dot:g} is degenerate; draws lie on a segment", file=sys.stderr)
    s = sample_channel(cfg.samples, cfg.kr, cfg.alpha_bar, mode, cfg.seed, dot=cfg.dot, threads=cfg.threads)
    t = Table(["re_h", "im_h"])
    t.extend(s.values.real, s.values.imag)
    return t


def cmd_outage(cfg: RunConfig) -> Table:
    """Long-format table with columns (section, series, x, y).

    Closed-form series cover ``--region`` (none for the transition region);
    empirical and Monte-Carlo series cover every kr in ``--kr-list``.
    """
    analytic = [] if cfg.region == "transition" else [cfg.region]
    t = Table(["section", "series", "x", "y"])
    loss_db = np.linspace(-60.0, 0.0, 121)
    eps_grid = np.logspace(-3, -1, 9)
    snr_grid = np.logspace(0, 5, 26)
    window = (1e2, 1e4)

    curves = misalignment_loss_cdf(cfg.kr_list, cfg.samples, cfg.seed, loss_db, cfg.alpha_bar, cfg.threads)
    for kr, curve in curves.items():
        for x, y in zip(curve.grid, curve.density):
            t.add("loss_cdf", f"kr={kr:g}", x, y)
    if cfg.rayleigh:
        for x, y in zip(loss_db, rayleigh_reference_cdf(10.0 ** (loss_db / 10.0), 1.0)):
            t.add("loss_cdf", "rayleigh", x, y)

    samples = {kr: normalized_pte(sample_channel(cfg.samples, kr, cfg.alpha_bar, "both_random", cfg.seed,
                                                 threads=cfg.threads))
               for kr in cfg.kr_list}

    for region in analytic:
        for eps in eps_grid:
            spec = OutageSpec(eps, region, eta_opt=1.0, snr_opt=cfg.snr_opt, p_tx=cfg.snr_opt, p_n=1.0)
            eta = outage_pte(spec)
            cap = outage_capacity(spec, eta)
            t.add("outage_pte", f"analytic_{region}", eps, eta)
            t.add("outage_capacity", f"analytic_{region}", eps, cap.capacity)
            t.add("outage_capacity", f"bound_{region}", eps, cap.linearized_bound)
    for kr, x in samples.items():
        e = Ecdf.from_values(x)
        for eps in eps_grid:
            eta = float(e.quantile(eps))
            spec = OutageSpec(eps, "transition", eta_opt=1.0, snr_opt=cfg.snr_opt, p_tx=cfg.snr_opt, p_n=1.0)
            t.add("outage_pte", f"empirical_kr={kr:g}", eps, eta)
            t.add("outage_capacity", f"empirical_kr={kr:g}", eps, outage_capacity(spec, eta).capacity)

    fits = {}
    for region in analytic:
        exact = [ber_exact_region(g, region) for g in snr_grid]
        bound = [ber_bound(g, region) for g in snr_grid]
        back = [ber_backscatter(g, region) for g in snr_grid]
        for g, a, b, c in zip(snr_grid, exact, bound, back):
            t.add("ber", f"exact_{region}", g, a)
            t.add("ber", f"bound_{region}", g, b)
            t.add("ber", f"backscatter_{region}", g, c)
        fits[f"{region}"] = diversity_exponent_fit(snr_grid, exact, window)
        fits[f"backscatter_{region}"] = diversity_exponent_fit(snr_grid, back, window)
    for kr, x in samples.items():
        ber = [ber_monte_carlo(x, g)[0] for g in snr_grid]
        for g, b in zip(snr_grid, ber):
            t.add("ber", f"montecarlo_kr={kr:g}", g, b)
        fits[f"kr={kr:g}"] = diversity_exponent_fit(snr_grid, ber, window)
    for name, val in fits.items():
        t.add("diversity", name, "", val)
    return t


COMMANDS = {
    "field-map": cmd_field_map,
    "pdf-j": cmd_pdf_j,
    "pdf-beta": cmd_pdf_beta,
    "pdf-h-cond": cmd_pdf_h_cond,
    "pdf-h-full": cmd_pdf_h_full,
    "scatter": cmd_scatter,
    "outage": cmd_outage,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--kr", type=float, default=2.0, help="wavenumber-distance product (default 2)")
    common.add_argument("--alpha-bar", default="0.01", help="prefactor as 're', 're,im' or 'mag@deg' (default 0.01)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=1_000_000)
    common.add_argument("--grid", type=int, default=None, help="grid resolution or bin count")
    common.add_argument("--out", default="-", help="output CSV path, '-' for stdout")
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (fallback: ${THREADS_ENV}, else 1)")
    common.add_argument("--region", choices=["near", "far", "transition"], default="near",
                        help="region of the closed-form outage/BER series (outage)")
    common.add_argument("--mode", choices=["both-random", "rx-random"], default="both-random")
    common.add_argument("--dot", type=float, default=0.3, help="d^T o_tx for conditional commands")
    common.add_argument("--kr-list", default="0.1,1,2,5,100", help="comma-separated kr values (outage)")
    common.add_argument("--snr-opt", type=float, default=100.0, help="SNR_opt for outage capacity (outage)")
    common.add_argument("--rayleigh", action="store_true", help="add a Rayleigh reference CDF (outage)")
    common.add_argument("--epsrel", type=float, default=1e-7, help="relative quadrature tolerance (pdf-h-full)")

    parser = argparse.ArgumentParser(prog="dipolefade", description="Random-orientation dipole channel statistics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or "").strip().splitlines()[0] if fn.__doc__ else None)
    return parser


def _threads(arg) -> int:
    if arg is not None:
        return arg
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"${THREADS_ENV} must be an integer, got {env!r}") from None
    return 1


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        subcommand=ns.subcommand,
        kr=ns.kr,
        alpha_bar=parse_alpha_bar(ns.alpha_bar),
        seed=ns.seed,
        samples=ns.samples,
        grid=ns.grid,
        out=ns.out,
        threads=_threads(ns.threads),
        region=ns.region,
        mode=ns.mode,
        dot=ns.dot,
        kr_list=parse_float_list(ns.kr_list),
        snr_opt=ns.snr_opt,
        rayleigh=ns.rayleigh,
        epsrel=ns.epsrel,
    )
    cfg.validate()
    return cfg


def run(cfg: RunConfig) -> str:
    """Execute a validated configuration and return the CSV text."""
    table = COMMANDS[cfg.subcommand](cfg)
    buf = io.StringIO()
    write_csv(table, cfg, buf)
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        text = run(cfg)
    except (ConfigError, DegenerateFieldError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if cfg.out == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
