"""
Command line entry point: ``relmass <command> --config FILE``.

Every command writes one CSV table (header row, 17 significant digits,
'\\n' line endings) to ``--out`` or stdout. Diagnostics go to stderr.
Exit codes: 0 success, 1 numeric or tolerance failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from relmass import classical, evolution, oracle, spectrum
from relmass.model import ConfigError, PhysicalParams, load_params, validate_params

COMMANDS = ("spectrum", "evolve", "classical", "figure1", "oracle")

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


def fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(header, rows, out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])


@dataclass
class RunConfig:
    params: PhysicalParams
    command: str
    out: Path | None = None
    t_end: float | None = None
    samples: int | None = None
    grid: int = 2048
    n_max: int = 1
    momentum: float = 0.6
    internal_ratio: float = 1e-4
    omega_int: float = 1.0
    mu: float = 1.0
    trap_k: float = 0.0
    rel_tol: float = 1e-10
    threshold: float = 0.1

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.t_end is not None and not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise UsageError("--t-end must be positive")
        if self.samples is not None and self.samples < 2:
            raise UsageError("--samples must be at least 2")
        if self.grid < 64:
            raise UsageError("--grid must be at least 64")
        if self.command == "oracle" and self.grid // 4 < 64:
            raise UsageError("--grid must be at least 256 so the coarsest of grid/4, grid/2, grid has 64 points")
        if self.n_max < 1:
            raise UsageError("--n-max must be at least 1")
        if not abs(self.momentum) < math.inf:
            raise UsageError("--momentum must be finite")
        if not 0 <= self.internal_ratio < 1:
            raise UsageError("--internal-ratio must lie in [0, 1)")
        if self.omega_int <= 0 or self.mu <= 0 or self.trap_k < 0:
            raise UsageError("--omega-int and --mu must be positive, --trap-k non-negative")
        if not 1e-14 < self.rel_tol < 1e-3:
            raise UsageError("--rel-tol must lie in (1e-14, 1e-3)")


def _spectrum(cfg: RunConfig, out) -> int:
    table = spectrum.build_table(cfg.params, cfg.n_max)
    write_csv(
        ("N", "n", "e_ip", "e_int", "e1", "e_total"),
        ((r.N, r.n, r.e_ip, r.e_int, r.e1, r.e_total) for r in table),
        out,
    )
    return EXIT_OK


def _evolve(cfg: RunConfig, out) -> int:
    p = cfg.params
    t_end = cfg.t_end
    if t_end is None:
        w = spectrum.omega_ent(p)
        if w == 0:
            raise UsageError("omega_ent is zero for these parameters; pass --t-end")
        t_end = 2 * math.pi / w
    samples = cfg.samples or 201
    ts = np.linspace(0.0, t_end, samples)
    rows = []
    for t in ts:
        coh = evolution.coherence(p, t)
        rows.append((t, coh.real, coh.imag, evolution.visibility(p, t), evolution.purity(evolution.reduced_state(p, t))))
    write_csv(("t", "re_coherence", "im_coherence", "visibility", "purity"), rows, out)
    return EXIT_OK


def _classical(cfg: RunConfig, out, err) -> int:
    p = cfg.params
    osc = classical.InternalOscillator(cfg.omega_int, cfg.mu)
    potential = classical.ExternalPotential.harmonic_trap(cfg.trap_k) if cfg.trap_k > 0 else classical.ExternalPotential.free()
    s0 = classical.boosted_clock_state(p, osc, cfg.momentum * p.m0 * p.c, cfg.internal_ratio)
    gamma = math.sqrt(1.0 + cfg.momentum**2)
    t_end = cfg.t_end if cfg.t_end is not None else 12 * gamma * osc.rest_period
    traj = classical.integrate(p, potential, osc, s0, t_end, cfg.rel_tol, samples=cfg.samples)
    write_csv(
        ("t", "x", "p", "q", "p_int", "H"),
        ((s.t, s.x, s.p, s.q, s.p_int, e) for s, e in zip(traj.samples, traj.energy)),
        out,
    )
    summary = classical.dilation_summary(traj)
    print(
        "dilation_factor={} expected={} rel_err={} V={} energy_drift={}".format(
            fmt(summary.measured), fmt(summary.expected), fmt(summary.rel_err), fmt(summary.velocity), fmt(traj.energy_drift)
        ),
        file=err,
    )
    return EXIT_OK


def _figure1(cfg: RunConfig, out) -> int:
    p = cfg.params
    xs = np.linspace(0.0, p.well_length, cfg.samples or 1001)
    w = spectrum.omega_ent(p)
    if w == 0:
        raise UsageError("omega_ent is zero for these parameters; the entangled curve is undefined")
    t_star = math.pi / (2 * w)
    d0 = evolution.com_probability_density(p, 0.0, xs).density
    d1 = evolution.com_probability_density(p, t_star, xs).density
    write_csv(("x", "density_t0", "density_tstar"), zip(xs, d0, d1), out)
    return EXIT_OK


def _oracle(cfg: RunConfig, out, err) -> int:
    reports = oracle.run_all(cfg.params, cfg.grid)
    write_csv(
        ("quantity", "closed_form", "oracle_value", "abs_err", "rel_err"),
        ((r.quantity, r.closed_form, r.oracle_value, r.abs_err, r.rel_err) for r in reports),
        out,
    )
    failed = [r for r in reports if not r.passed]
    for r in failed:
        print(f"FAIL {r.quantity}: rel_err {fmt(r.rel_err)} >= {fmt(r.tolerance)}", file=err)
    return EXIT_NUMERIC if failed else EXIT_OK


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute one command; returns the process exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        cfg.validate()
    except UsageError as exc:
        print(f"relmass: error: {exc}", file=stderr)
        return EXIT_USAGE

    for warning in validate_params(cfg.params, cfg.n_max, cfg.threshold).warnings:
        print(f"relmass: warning: {warning}", file=stderr)

    buf = io.StringIO()
    try:
        if cfg.command == "spectrum":
            status = _spectrum(cfg, buf)
        elif cfg.command == "evolve":
            status = _evolve(cfg, buf)
        elif cfg.command == "classical":
            status = _classical(cfg, buf, stderr)
        elif cfg.command == "figure1":
            status = _figure1(cfg, buf)
        else:
            status = _oracle(cfg, buf, stderr)
    except UsageError as exc:
        print(f"relmass: error: {exc}", file=stderr)
        return EXIT_USAGE
    except (classical.IntegrationError, classical.InsufficientDataError, oracle.EigensolverError, ArithmeticError) as exc:
        print(f"relmass: numeric failure: {exc}", file=stderr)
        return EXIT_NUMERIC

    if cfg.out is None:
        stdout.write(buf.getvalue())
    else:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relmass", description=__doc__.strip().splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, type=Path, help="key=value parameter file")
    parser.add_argument("--out", type=Path, help="CSV output path (default: stdout)")
    parser.add_argument("--t-end", type=float, help="final time")
    parser.add_argument("--samples", type=int, help="number of output rows")
    parser.add_argument("--grid", type=int, default=2048, help="finest oracle grid (interior points)")
    parser.add_argument("--n-max", type=int, default=1, help="highest well level in the spectrum table")
    parser.add_argument("--threshold", type=float, default=0.1, help="regime warning threshold")

    cl = parser.add_argument_group("classical")
    cl.add_argument("--momentum", type=float, default=0.6, help="total momentum in units of m0*c")
    cl.add_argument("--internal-ratio", type=float, default=1e-4, help="H_int / (m0 c^2)")
    cl.add_argument("--omega-int", type=float, default=1.0, help="internal oscillator frequency")
    cl.add_argument("--mu", type=float, default=1.0, help="internal oscillator mass")
    cl.add_argument("--trap-k", type=float, default=0.0, help="harmonic trap stiffness (0 = free)")
    cl.add_argument("--rel-tol", type=float, default=1e-10, help="integrator relative tolerance")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        params = load_params(args.config)
    except ConfigError as exc:
        print(f"relmass: config error in {args.config}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"relmass: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not 0 < args.threshold < 1:
        print("relmass: error: --threshold must lie in (0, 1)", file=sys.stderr)
        return EXIT_USAGE

    cfg = RunConfig(
        params=params,
        command=args.command,
        out=args.out,
        t_end=args.t_end,
        samples=args.samples,
        grid=args.grid,
        n_max=args.n_max,
        momentum=args.momentum,
        internal_ratio=args.internal_ratio,
        omega_int=args.omega_int,
        mu=args.mu,
        trap_k=args.trap_k,
        rel_tol=args.rel_tol,
        threshold=args.threshold,
    )
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
