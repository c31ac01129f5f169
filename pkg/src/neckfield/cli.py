"""Command-line interface.

Subcommands: ``solve`` (one scene, constants/differences/gradients CSV),
``sweep`` (parameter sweep CSV), ``rates`` (power-law fits CSV), ``plot``
(log-log SVG with fit and guide lines), ``verify`` (diagnostic suite CSV).

Exit status contract: 0 success, 1 a verification check failed, 2 usage or
configuration error, 3 refusal to overwrite existing output (pass --force).
Outputs are deterministic for fixed inputs; timestamps only appear in
comment headers.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .asymptotics import lemma_suite
from .errors import NeckfieldError
from .geometry.serialize import ConfigParseError, RunInput, parse_run
from .solver.mesh import MeshControls
from .solver.nystrom import SceneOperator, max_gap_gradient
from .svgplot import log_log_plot
from .sweeps import (RateFit, SweepSpec, Tie, fit_rate, log_grid,
                     parse_table_csv, run_sweep, sandwich_check,
                     serialize_table)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_REFUSED = 3


@dataclass
class RunManifest:
    subcommand: str
    config: Path
    out: Path
    force: bool = False
    seed: int = 0
    mesh_base: Optional[int] = None
    mesh_cap: Optional[int] = None

    def controls(self, defaults: MeshControls = MeshControls()) -> MeshControls:
        return defaults.with_base(self.mesh_base, self.mesh_cap)


def _write(manifest: RunManifest, name: str, content: str) -> Path:
    manifest.out.mkdir(parents=True, exist_ok=True)
    path = manifest.out / name
    if path.exists() and not manifest.force:
        raise FileExistsError(str(path))
    path.write_text(content)
    return path


def _stamp() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S")


def _load(manifest: RunManifest) -> RunInput:
    text = manifest.config.read_text()
    return parse_run(text)


def _controls_for(manifest: RunManifest, run: RunInput) -> MeshControls:
    c = MeshControls()
    if "base_n" in run.mesh:
        c = c.with_base(base_n=int(run.mesh["base_n"]))
    if "cap" in run.mesh:
        c = c.with_base(cap=int(run.mesh["cap"]))
    return manifest.controls(c)


def cmd_solve(manifest: RunManifest) -> int:
    run = _load(manifest)
    cfg = run.cfg
    controls = _controls_for(manifest, run)
    op = SceneOperator(cfg, controls)
    u = op.solve_u()
    lines = [f"# neckfield-solve v1", f"# generated: {_stamp()}",
             "key,value"]
    for g in range(cfg.n_conductors):
        lines.append(f"constant_{g + 1},{u.constant(g)!r}")
    for j in range(1, cfg.n_conductors):
        for i in range(j):
            lines.append(f"potential_difference_{j + 1}{i + 1},"
                         f"{u.potential_difference(j, i)!r}")
    dnu = u.normal_derivative_nodes()
    for g, members in enumerate(u.groups):
        idx = np.concatenate([u.mesh.body_nodes(b) for b in members])
        res = float(np.sum(u.mesh.weights[idx] * dnu[idx]))
        lines.append(f"flux_residual_{g + 1},{res!r}")
    for (i, j), info in sorted(cfg.all_conductor_gaps().items()):
        mg = max_gap_gradient(u, info)
        lines.append(f"gap_distance_{i + 1}{j + 1},{info.distance!r}")
        lines.append(f"max_gap_gradient_{i + 1}{j + 1},{mg.max_magnitude!r}")
    lines.append(f"mesh_nodes,{op.mesh.n_total}")
    lines.append(f"rcond,{u.rcond!r}")
    _write(manifest, "solution.csv", "\n".join(lines) + "\n")
    summary = [f"conductors: {cfg.n_conductors}",
               f"mesh nodes: {op.mesh.n_total}"]
    for j in range(1, cfg.n_conductors):
        summary.append(f"u|{j + 1} - u|{j}: "
                       f"{u.potential_difference(j, j - 1):.9g}")
    _write(manifest, "summary.txt", "\n".join(summary) + "\n")
    return EXIT_OK


def _spec_from_run(run: RunInput, manifest: RunManifest) -> SweepSpec:
    sweep = run.sweep
    if not sweep or "vary" not in sweep:
        raise ConfigParseError("missing [sweep] section with a 'vary' key", 0)
    case_tag = run.cfg.case_tag if run.cfg.case_tag in ("A", "B", "pair") else None
    if case_tag is None:
        raise ConfigParseError("sweeps need a canonical case (A, B or pair)", 0)
    vary = sweep["vary"].strip()
    lo, hi, pts = (s.strip() for s in sweep.get("grid", "").split(","))
    grid = log_grid(float(lo), float(hi), int(pts))
    quantities = tuple(q.strip() for q in sweep["quantities"].split(",") if q.strip())
    fixed = {k: v for k, v in run.cfg.params.items() if k != vary}
    for tie in (t for t in sweep.get("tie", "").split(",") if t.strip()):
        name, ratio = tie.split(":")
        fixed[name.strip()] = Tie(float(ratio))
    seed = int(sweep.get("seed", manifest.seed))
    return SweepSpec(case_tag=case_tag, vary=vary, grid=grid, fixed=fixed,
                     quantities=quantities,
                     controls=_controls_for(manifest, run), seed=seed)


def cmd_sweep(manifest: RunManifest) -> int:
    run = _load(manifest)
    spec = _spec_from_run(run, manifest)
    table = run_sweep(spec)
    _write(manifest, "sweep.csv", serialize_table(
        table, comments=[f"generated: {_stamp()}",
                         f"case: {spec.case_tag}", f"vary: {spec.vary}"]))
    return EXIT_OK


def _table_or_run(manifest: RunManifest):
    """Fits and plots reuse a previously written sweep.csv when present so
    they are pure functions of that artifact."""
    path = manifest.out / "sweep.csv"
    run = _load(manifest)
    if path.exists():
        vary, cols, errors = parse_table_csv(path.read_text())
        return run, vary, cols, errors
    spec = _spec_from_run(run, manifest)
    table = run_sweep(spec)
    cols = {spec.vary: table.values, **table.columns}
    return run, spec.vary, cols, table.errors


def _fit_columns(vary, cols, errors) -> dict[str, RateFit]:
    from .sweeps import SweepTable

    skip = {vary, "mesh_nodes", "rcond"}
    out: dict[str, RateFit] = {}
    for name, vals in cols.items():
        if name in skip:
            continue
        spec = SweepSpec(case_tag="pair", vary=vary,
                         grid=tuple(cols[vary]), quantities=(name,),
                         fixed={"placeholder": 1.0})
        table = SweepTable(spec, np.asarray(cols[vary]), {name: np.asarray(vals)},
                           np.zeros(len(vals), dtype=int),
                           np.full(len(vals), np.nan), list(errors),
                           np.zeros(len(vals)))
        try:
            out[name] = fit_rate(table, vary, name)
        except NeckfieldError:
            continue
    return out


def cmd_rates(manifest: RunManifest) -> int:
    run, vary, cols, errors = _table_or_run(manifest)
    fits = _fit_columns(vary, cols, errors)
    lines = ["# neckfield-rates v1", f"# generated: {_stamp()}",
             "quantity,exponent,intercept,r_squared,n_points"]
    for name, f in fits.items():
        lines.append(f"{name},{f.exponent!r},{f.intercept!r},{f.r_squared!r},{f.n_points}")
    _write(manifest, "rates.csv", "\n".join(lines) + "\n")
    return EXIT_OK


def _guide_slope_for(name: str, run: RunInput) -> float:
    if "guide_slope" in run.sweep:
        return float(run.sweep["guide_slope"])
    return -0.5 if "gradient" in name else 0.5


def cmd_plot(manifest: RunManifest) -> int:
    run, vary, cols, errors = _table_or_run(manifest)
    quantity = run.sweep.get("plot_quantity")
    if not quantity:
        candidates = [c for c in cols if c not in (vary, "mesh_nodes", "rcond")]
        quantity = candidates[0]
    fits = _fit_columns(vary, cols, errors)
    fit = fits.get(quantity)
    guide = _guide_slope_for(quantity, run)
    x = np.asarray(cols[vary])
    y = np.abs(np.asarray(cols[quantity]))
    good = np.array([e is None for e in errors]) & np.isfinite(y) & (y > 0)
    ratios = y[good] / (y[good][0] * (x[good] / x[good][0]) ** guide)
    spread = float(np.max(ratios) / np.min(ratios))
    caption = (f"fit slope {fit.exponent:.3f}" if fit else "fit n/a")
    caption += f", guide {guide:+.2f}, spread vs guide {spread:.2f}"
    svg = log_log_plot(x[good], y[good],
                       fit_slope=fit.exponent if fit else None,
                       fit_intercept=fit.intercept if fit else None,
                       guide_slope=guide,
                       title=f"{quantity} vs {vary}",
                       x_label=vary, y_label=quantity, caption=caption)
    _write(manifest, "plot.svg", svg)
    return EXIT_OK


def cmd_verify(manifest: RunManifest) -> int:
    run = _load(manifest)
    cfg = run.cfg
    controls = _controls_for(manifest, run)
    report = lemma_suite(cfg, controls)
    # conservation spot check on the standard solve: independent quadrature
    # of the conductor fluxes
    op = SceneOperator(cfg, controls)
    u = op.solve_u()
    dnu = u.normal_derivative_nodes()
    worst = 0.0
    scale = max(float(np.sum(u.mesh.weights * np.abs(dnu))), 1e-300)
    for g, members in enumerate(u.groups):
        idx = np.concatenate([u.mesh.body_nodes(b) for b in members])
        worst = max(worst, abs(float(np.sum(u.mesh.weights[idx] * dnu[idx]))))
    from .asymptotics import DiagnosticCheck

    report.checks.append(DiagnosticCheck.from_flag(
        "flux_residual_quadrature", worst / scale <= 1e-8, worst / scale,
        "independent flux quadrature, relative to total absolute flux"))
    body = report.to_csv()
    _write(manifest, "verify.csv",
           f"# neckfield-verify v1\n# generated: {_stamp()}\n" + body)
    for c in report.checks:
        status = "pass" if c.passed else "FAIL"
        print(f"{status}  {c.name} (spread {c.spread:.3g}) {c.detail}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="neckfield",
        description="Exterior potential fields around near-touching conductors")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, fn in (("solve", cmd_solve), ("sweep", cmd_sweep),
                     ("rates", cmd_rates), ("plot", cmd_plot),
                     ("verify", cmd_verify)):
        p = sub.add_parser(name)
        p.add_argument("config", type=Path)
        p.add_argument("--out", type=Path, default=Path("out"))
        p.add_argument("--force", action="store_true")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--mesh-base", type=int, default=None)
        p.add_argument("--mesh-cap", type=int, default=None)
        p.set_defaults(fn=fn)
    args = parser.parse_args(argv)
    manifest = RunManifest(args.subcommand, args.config, args.out, args.force,
                           args.seed, args.mesh_base, args.mesh_cap)
    try:
        return args.fn(manifest)
    except FileExistsError as exc:
        print(f"refusing to overwrite {exc} (use --force)", file=sys.stderr)
        return EXIT_REFUSED
    except (ConfigParseError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NeckfieldError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
