"""Command line entry point: ``mnlslab <subcommand> --config PATH``."""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

import numpy as np
import scipy.fft

from . import spectral
from .config import ConfigError, RunConfig, load_config
from .evolve import NonFiniteError, evolve
from .fieldio import save_field, write_csv
from .gauge import audit, make_potential
from .grid import Grid
from .kernels import BoundaryMassWarning
from .morawetz import MORAWETZ_COLUMNS, appendix_sign_demo, interaction_inequality_check
from .norms import (CAUCHY_COLUMNS, NormSpec, interpolation_check, scattering_monitor,
                    smoothing_functionals, spacetime_norm)
from .quadrature import lp_norm
from .stress import CONSERVATION_COLUMNS, conservation_table

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

NORM_COLUMNS = ("t", "L2", "L4", "L6", "Linf", "H_half_sq")

_PLOT_TEMPLATE = '''"""Plot {csv} (generated; needs pandas and matplotlib)."""
import sys

import matplotlib.pyplot as plt
import pandas as pd

df = pd.read_csv("{csv}")
cols = [c for c in {columns!r} if c in df.columns]
fig, axes = plt.subplots(len(cols), 1, sharex=True, figsize=(7, 2 * len(cols)))
for ax, c in zip(axes if len(cols) > 1 else [axes], cols):
    ax.plot(df["t"], df[c])
    ax.set_ylabel(c)
axes[-1].set_xlabel("t") if len(cols) > 1 else axes.set_xlabel("t")
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else "{stem}.png")
'''


def _emit_plot_script(out: Path, csv_name: str, columns) -> None:
    stem = Path(csv_name).stem
    text = _PLOT_TEMPLATE.format(csv=csv_name, columns=tuple(columns), stem=stem)
    (out / f"plot_{stem}.py").write_text(text, encoding="utf-8")


def _prepare(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.yaml").write_text(cfg.dump(), encoding="utf-8")
    return out


def _run(cfg: RunConfig):
    grid = cfg.build_grid()
    gp = cfg.build_potential(grid)
    nl = cfg.build_nl()
    u0 = cfg.build_initial(grid)
    s = cfg.scheme
    return evolve(u0, gp, nl, s.T, dt=cfg.resolved_dt(grid), stride=s.output_stride,
                  scheme=s.name, grid=grid, cfl=s.cfl)


def _audit_potential(cfg: RunConfig):
    if cfg.audit.grid is None or cfg.gauge.family == "sampled":
        return cfg.build_potential()
    grid = Grid(cfg.audit.grid.N, cfg.audit.grid.L)
    return make_potential(cfg.gauge.family, dict(cfg.gauge.params), grid)


def cmd_audit(cfg: RunConfig) -> int:
    out = _prepare(cfg)
    report = audit(_audit_potential(cfg), cfg.audit.M, cfg.audit.b)
    text = report.to_text()
    (out / "audit.txt").write_text(text, encoding="utf-8")
    (out / "audit.csv").write_text(report.to_csv(), encoding="utf-8")
    print(text, end="")
    return EXIT_OK if report.passed else EXIT_FAIL


def _norm_rows(traj):
    rows = []
    for t, u in traj:
        rows.append({
            "t": t, "L2": lp_norm(traj.grid, u, 2), "L4": lp_norm(traj.grid, u, 4),
            "L6": lp_norm(traj.grid, u, 6), "Linf": float(np.max(np.abs(u))),
            "H_half_sq": spectral.half_derivative_norm2(traj.grid, u),
        })
    return rows


def cmd_evolve(cfg: RunConfig) -> int:
    out = _prepare(cfg)
    try:
        traj = _run(cfg)
        status = EXIT_OK
    except NonFiniteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        traj, status = exc.trajectory, EXIT_FAIL
    d = cfg.diagnostics
    if d.conservation:
        rows = conservation_table(traj)
        if not d.balance:
            for r in rows:
                r["mass_residual_L2"] = r["momentum_residual_L2"] = math.nan
        write_csv(out / "conservation.csv", CONSERVATION_COLUMNS, rows)
        _emit_plot_script(out, "conservation.csv", CONSERVATION_COLUMNS[1:])
    if d.norms:
        write_csv(out / "norms.csv", NORM_COLUMNS, _norm_rows(traj))
        _emit_plot_script(out, "norms.csv", NORM_COLUMNS[1:])
        if len(traj) >= 3:
            left, right = interpolation_check(traj)
            lines = [f"L4_spacetime {spacetime_norm(traj, NormSpec(4.0, 4.0))!r}",
                     f"interpolation_left {left!r}", f"interpolation_right {right!r}"]
            (out / "norms_summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    grid = traj.grid
    save_field(out / "u_initial.field", grid, traj.states[0], "u", traj.times[0])
    save_field(out / "u_final.field", grid, traj.states[-1], "u", traj.times[-1])
    if d.save_snapshots:
        snaps = out / "snapshots"
        snaps.mkdir(exist_ok=True)
        for k, (t, u) in enumerate(traj):
            save_field(snaps / f"u_{k:05d}.field", grid, u, "u", t)
    print(f"evolve: {len(traj)} snapshots to t={traj.times[-1]!r} in {out}")
    return status


def cmd_morawetz(cfg: RunConfig) -> int:
    if cfg.nl.mu < 0:
        raise ConfigError("nl.mu: the interaction Morawetz run needs mu >= 0")
    out = _prepare(cfg)
    traj = _run(cfg)
    rep = interaction_inequality_check(traj, cfg.diagnostics.epsilon_cells)
    write_csv(out / "morawetz.csv", MORAWETZ_COLUMNS, rep.rows())
    _emit_plot_script(out, "morawetz.csv", MORAWETZ_COLUMNS[1:])
    tol = 1e-10 * rep.scales
    checks = {
        "P1 >= -tol": bool(np.all(rep.P[:, 0] >= -tol)),
        "P2 >= -tol": bool(np.all(rep.P[:, 1] >= -tol)),
        "P4 >= -tol": bool(np.all(rep.P[:, 3] >= -tol)),
        "integral(P3k + P5) <= M(T) - M(0)": rep.inequality_holds,
    }
    compliance = audit(_audit_potential(cfg), cfg.audit.M, cfg.audit.b)
    lines = [f"{'PASS' if ok else 'FAIL'}  {name}" for name, ok in checks.items()]
    lines += [
        f"inequality_lhs {rep.inequality_lhs!r}",
        f"inequality_rhs {rep.inequality_rhs!r}",
        f"ratio_T {rep.ratio_T!r}",
        f"ratio_2T {rep.ratio_2T!r}",
        f"rho_floor {rep.rho_floor!r}",
        f"epsilon {rep.epsilon!r}",
        f"proxy {rep.proxy}",
        f"gauge_compliant {compliance.passed}",
    ]
    if cfg.diagnostics.smoothing:
        sm = smoothing_functionals(traj, cfg.audit.M)
        lines.append("smoothing_ratios " + " ".join(repr(float(r)) for r in sm.ratios))
    text = "\n".join(lines) + "\n"
    (out / "morawetz_summary.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK if all(checks.values()) else EXIT_FAIL


def cmd_scatter(cfg: RunConfig) -> int:
    out = _prepare(cfg)
    traj = _run(cfg)
    table = scattering_monitor(traj, cfg.diagnostics.scatter_threshold)
    write_csv(out / "cauchy.csv", CAUCHY_COLUMNS, table.rows())
    _emit_plot_script(out, "cauchy.csv", CAUCHY_COLUMNS[1:])
    print(f"scatter: {len(table.times)} rows, valid until t={table.valid_until!r}, "
          f"monotone={table.monotone}")
    return EXIT_OK


def cmd_counterexample(cfg: RunConfig) -> int:
    out = _prepare(cfg)
    c = cfg.counterexample
    gp = cfg.build_potential()
    try:
        demo = appendix_sign_demo(gp, c.p, c.x0, c.rho)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    lines = [
        f"direction {' '.join(repr(float(v)) for v in demo.direction)}",
        f"y_plus {' '.join(repr(float(v)) for v in demo.y_plus)}",
        f"integrand_plus {demo.value_plus!r}",
        f"y_minus {' '.join(repr(float(v)) for v in demo.y_minus)}",
        f"integrand_minus {demo.value_minus!r}",
    ]
    text = "\n".join(lines) + "\n"
    (out / "counterexample.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK if demo.value_plus > 0 > demo.value_minus else EXIT_FAIL


def cmd_selftest(cfg: RunConfig | None = None) -> int:
    from .selftest import run_selftest

    results = run_selftest()
    failed = [r for r in results if not r.passed]
    print(f"selftest: {len(results) - len(failed)}/{len(results)} passed")
    return EXIT_OK if not failed else EXIT_FAIL


COMMANDS = {
    "audit": cmd_audit, "evolve": cmd_evolve, "morawetz": cmd_morawetz,
    "scatter": cmd_scatter, "counterexample": cmd_counterexample, "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mnlslab", description=__doc__)
    parser.add_argument("command", choices=list(COMMANDS))
    parser.add_argument("--config", type=Path, help="YAML run configuration")
    parser.add_argument("--out", help="output directory (overrides the config)")
    parser.add_argument("--threads", type=int, default=1, help="FFT worker threads")
    parser.add_argument("--seed", type=int, help="unsigned 64-bit seed (overrides the config)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must fit in an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = None
        if args.command != "selftest":
            if args.config is None:
                raise ConfigError(f"--config is required for {args.command}")
            cfg = load_config(args.config)
            if args.out is not None:
                cfg.out = args.out
            if args.seed is not None:
                cfg.seed = args.seed
        with scipy.fft.set_workers(args.threads), warnings.catch_warnings():
            warnings.simplefilter("always", BoundaryMassWarning)
            return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
