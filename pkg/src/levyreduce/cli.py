"""Command-line pipelines over a JSON model configuration.

Subcommands: check (condition suite), reduce (emit the one-factor
model), simulate (paths of the multivariate equation), price (term
structure of the reduced model), compare (Monte Carlo vs Riccati).
Every run writes a deterministic report.json plus CSV tables; exit
codes: 0 pass, 1 condition or verification failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .conditions import (
    check_martingale,
    check_positive_jumps,
    check_variation,
    radial_balance,
    wiener_cir_check,
)
from .exceptions import LevyReduceError, PreconditionFailed
from .measures import (
    LevySpec,
    RadialMeasure,
    SphericalMeasure,
    VolatilityFunction,
    power_radial,
)
from .pricing import SimConfig, bond_price, compare_term_structures, riccati_solve
from .quadrature import QuadratureConfig
from .reduction import reduce_model
from .report import CheckReport
from .simulate import RngStream, simulate_original

OUTDIR_ENV = "LEVYREDUCE_OUTDIR"
_USAGE = (
    "levyreduce {check,reduce,simulate,price,compare} config.json "
    "[outdir] [--tol X] [--seed N] [--threads N] [--quiet]"
)


def _tabulated_density(points):
    """Linear-interpolation density from (x, value) pairs, zero outside."""
    pts = sorted((float(x), float(v)) for x, v in points)
    if len(pts) < 2:
        raise ValueError("a tabulated function needs at least two points")
    xs = np.array([p[0] for p in pts])
    vs = np.array([p[1] for p in pts])
    if np.any(vs < 0):
        raise ValueError("tabulated density values must be nonnegative")

    def dens(r, _x=xs, _v=vs):
        return np.interp(np.asarray(r, dtype=float), _x, _v, left=0.0, right=0.0)

    return dens


def _parse_radial(section) -> RadialMeasure:
    kind = section.get("kind")
    if kind == "power":
        return power_radial(float(section["alpha"]), float(section.get("scale", 1.0)))
    if kind == "custom":
        hints = section.get("hints")
        return RadialMeasure(
            density=_tabulated_density(section["points"]),
            hints=tuple(float(h) for h in hints) if hints is not None else None,
        )
    raise ValueError(f"unknown radial kind {kind!r}")


def _parse_spherical(section, d: int) -> SphericalMeasure:
    if "atoms" in section:
        atoms = section["atoms"]
        return SphericalMeasure.from_atoms(atoms["directions"], atoms["weights"])
    if "angular" in section:
        ang = section["angular"]
        kind = ang.get("kind", "uniform")
        if kind == "uniform":
            scale = float(ang.get("scale", 1.0))
            return SphericalMeasure.from_angular(
                d, lambda angles, _s=scale: np.full(np.asarray(angles).shape[0], _s)
            )
        if kind == "tabulated":
            if d != 2:
                raise ValueError("tabulated angular densities are supported in d=2")
            dens = _tabulated_density(ang["points"])
            return SphericalMeasure.from_angular(
                d, lambda angles, _f=dens: _f(np.asarray(angles)[:, 0])
            )
        raise ValueError(f"unknown angular kind {kind!r}")
    raise ValueError("spherical section needs 'atoms' or 'angular'")


def _parse_volatility(section) -> VolatilityFunction:
    kind = section.get("kind")
    if kind == "power":
        return VolatilityFunction.power(
            float(section["exponent"]), np.asarray(section["direction"], dtype=float)
        )
    if kind == "tabulated":
        pts = section["points"]
        xs = [float(p[0]) for p in pts]
        vals = [[float(v) for v in p[1]] for p in pts]
        return VolatilityFunction.tabulated(xs, vals)
    raise ValueError(f"unknown G kind {kind!r}")


class RunConfig:
    """Validated artifacts built from one JSON configuration."""

    def __init__(self, doc: dict):
        model = doc["model"]
        d = int(model["d"])
        q = np.asarray(model.get("Q", np.zeros((d, d))), dtype=float)
        if q.shape != (d, d):
            raise ValueError("Q must be d x d")
        spherical = _parse_spherical(model["spherical"], d)
        if spherical.dimension != d:
            raise ValueError("spherical dimension disagrees with d")
        radial = _parse_radial(model["radial"])
        self.spec = LevySpec(d, q, spherical, lambda xi, _r=radial: _r)
        self.volatility = _parse_volatility(doc["G"]) if "G" in doc else None
        if self.volatility is not None and self.volatility.dimension != d:
            raise ValueError("G dimension disagrees with d")
        drift = doc.get("drift", {})
        self.a = float(drift.get("a", 0.0))
        self.b = float(drift.get("b", 0.0))
        sim = doc.get("simulation", {})
        self.x0 = float(sim.get("x0", 1.0))
        self.horizon = float(sim.get("horizon", 1.0))
        self.dt = float(sim.get("dt", 1e-3))
        self.n_paths = int(sim.get("n_paths", 10_000))
        self.eps = float(sim.get("eps", 1e-3))
        self.seed = int(sim.get("seed", 0))
        pricing = doc.get("pricing", {})
        self.tau_grid = [float(t) for t in pricing.get("tau_grid", [1.0])]
        quad = doc.get("quadrature", {})
        self.quadrature = QuadratureConfig(**{k: float(v) if k != "max_subdivisions" else int(v) for k, v in quad.items()})

    def require_volatility(self) -> VolatilityFunction:
        if self.volatility is None:
            raise ValueError("this pipeline needs a G section in the config")
        return self.volatility


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter=",", lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _report_payload(command: str, report: CheckReport, outputs, **extra) -> dict:
    payload = {
        "command": command,
        "overall_pass": bool(report.overall_pass),
        "items": [it.to_dict() for it in report.items],
        "outputs": sorted(outputs),
    }
    payload.update(extra)
    return payload


def _cmd_check(cfg: RunConfig, outdir: Path, quiet: bool) -> int:
    spec = cfg.spec
    reports = [check_martingale(spec, cfg.quadrature)]
    if cfg.volatility is not None:
        reports.append(check_positive_jumps(cfg.volatility, spec))
        g0 = np.asarray(cfg.volatility(0.0), dtype=float)
        if np.linalg.norm(g0) > 0.0:
            reports.append(check_variation(spec, cfg.quadrature))
    else:
        reports.append(check_variation(spec, cfg.quadrature))
    _, balance = radial_balance(spec, cfg=cfg.quadrature)
    reports.append(balance)
    if cfg.volatility is not None:
        _, _, wiener = wiener_cir_check(spec.wiener_cov, cfg.volatility)
        reports.append(wiener)
    merged = reports[0].merged(*reports[1:])
    _write_json(outdir / "report.json", _report_payload("check", merged, []))
    if not quiet:
        for it in merged.items:
            print(f"{it.name}: {it.status}")
    return 0 if merged.overall_pass else 1


def _model_dict(model) -> dict:
    return {
        "a": model.a,
        "b": model.b,
        "C": model.C,
        "alpha": model.alpha,
    }


def _cmd_reduce(cfg: RunConfig, outdir: Path, quiet: bool) -> int:
    try:
        model, report = reduce_model(
            cfg.spec, cfg.require_volatility(), cfg.a, cfg.b, cfg.quadrature
        )
    except PreconditionFailed as exc:
        payload = _report_payload("reduce", exc.report, [], error=str(exc))
        _write_json(outdir / "report.json", payload)
        if not quiet:
            print(f"reduction refused: {exc}", file=sys.stderr)
        return 1
    _write_json(outdir / "reduced.json", _model_dict(model))
    payload = _report_payload(
        "reduce", report, ["reduced.json"], model=_model_dict(model)
    )
    _write_json(outdir / "report.json", payload)
    if not quiet:
        print(f"alpha={model.alpha:.6f} C={model.C:.6f}")
    return 0 if report.overall_pass else 1


def _cmd_simulate(cfg: RunConfig, outdir: Path, quiet: bool) -> int:
    ens = simulate_original(
        cfg.require_volatility(), cfg.spec, cfg.a, cfg.b, cfg.x0, cfg.eps,
        cfg.horizon, max(int(round(cfg.horizon / cfg.dt)), 1), cfg.n_paths,
        RngStream(cfg.seed), cfg.quadrature,
    )
    header = [f"t_{k}" for k in range(ens.values.shape[1])]
    _write_csv(outdir / "paths.csv", header, ens.values.tolist())
    report = CheckReport(())
    payload = _report_payload(
        "simulate",
        report,
        ["paths.csv"],
        summary={
            "n_paths": ens.n_paths,
            "n_steps": ens.n_steps,
            "dt": ens.dt,
            "clamp_frequency": ens.clamp_frequency,
            "terminal_mean": float(ens.values[:, -1].mean(dtype=np.float64)),
        },
    )
    _write_json(outdir / "report.json", payload)
    if not quiet:
        print(f"simulated {ens.n_paths} paths x {ens.n_steps} steps")
    return 0


def _cmd_price(cfg: RunConfig, outdir: Path, quiet: bool) -> int:
    try:
        model, report = reduce_model(
            cfg.spec, cfg.require_volatility(), cfg.a, cfg.b, cfg.quadrature
        )
    except PreconditionFailed as exc:
        _write_json(
            outdir / "report.json", _report_payload("price", exc.report, [], error=str(exc))
        )
        return 1
    tau_max = max(cfg.tau_grid)
    ts = riccati_solve(model, tau_max, 400, cfg.quadrature)
    rows = [
        [
            f"{tau:.12g}",
            f"{float(np.interp(tau, ts.tau_grid, ts.A)):.12g}",
            f"{float(np.interp(tau, ts.tau_grid, ts.B)):.12g}",
            f"{bond_price(ts, cfg.x0, tau):.12g}",
        ]
        for tau in cfg.tau_grid
    ]
    _write_csv(outdir / "term_structure.csv", ["tau", "A", "B", "price"], rows)
    payload = _report_payload(
        "price", report, ["term_structure.csv"], model=_model_dict(model)
    )
    _write_json(outdir / "report.json", payload)
    if not quiet:
        for row in rows:
            print(f"tau={row[0]} price={row[3]}")
    return 0 if report.overall_pass else 1


def _cmd_compare(cfg: RunConfig, outdir: Path, quiet: bool) -> int:
    try:
        model, report = reduce_model(
            cfg.spec, cfg.require_volatility(), cfg.a, cfg.b, cfg.quadrature
        )
    except PreconditionFailed as exc:
        _write_json(
            outdir / "report.json",
            _report_payload("compare", exc.report, [], error=str(exc)),
        )
        return 1
    sim_cfg = SimConfig(
        dt=cfg.dt, n_paths=cfg.n_paths, eps=cfg.eps, seed=cfg.seed,
        quadrature=cfg.quadrature,
    )
    result = compare_term_structures(
        (cfg.require_volatility(), cfg.spec, cfg.a, cfg.b),
        model, cfg.x0, cfg.tau_grid, sim_cfg,
    )
    rows = [
        [
            f"{r['tau']:.12g}", f"{r['A']:.12g}", f"{r['B']:.12g}",
            f"{r['price_riccati']:.12g}", f"{r['price_mc']:.12g}", f"{r['se']:.12g}",
        ]
        for r in result.rows
    ]
    _write_csv(
        outdir / "comparison.csv",
        ["tau", "A", "B", "price_riccati", "price_mc", "se"],
        rows,
    )
    merged = report.merged(result.report)
    payload = _report_payload(
        "compare", merged, ["comparison.csv"], model=_model_dict(model)
    )
    _write_json(outdir / "report.json", payload)
    if not quiet:
        for r in result.rows:
            print(
                f"tau={r['tau']:g}: mc={r['price_mc']:.6f} ode={r['price_riccati']:.6f}"
            )
    return 0 if merged.overall_pass else 1


_COMMANDS = {
    "check": _cmd_check,
    "reduce": _cmd_reduce,
    "simulate": _cmd_simulate,
    "price": _cmd_price,
    "compare": _cmd_compare,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levyreduce", usage=_USAGE, add_help=True
    )
    parser.add_argument("subcommand", choices=sorted(_COMMANDS))
    parser.add_argument("config")
    parser.add_argument("outdir", nargs="?", default=None)
    parser.add_argument("--tol", type=float, default=None,
                        help="override the quadrature relative tolerance")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the simulation seed")
    parser.add_argument("--threads", type=int, default=None,
                        help="reserved; pipelines are single-threaded")
    parser.add_argument("--quiet", action="store_true")
    return parser


def run(argv) -> int:
    """Execute one pipeline; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2

    outdir = args.outdir or os.environ.get(OUTDIR_ENV)
    if outdir is None:
        print("no output directory given and none in the environment", file=sys.stderr)
        print(f"usage: {_USAGE}", file=sys.stderr)
        return 2

    try:
        doc = json.loads(Path(args.config).read_text())
        if args.tol is not None:
            doc.setdefault("quadrature", {})["rel_tol"] = args.tol
        if args.seed is not None:
            doc.setdefault("simulation", {})["seed"] = args.seed
        cfg = RunConfig(doc)
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        print(f"usage: {_USAGE}", file=sys.stderr)
        return 2

    try:
        return _COMMANDS[args.subcommand](cfg, out, args.quiet)
    except LevyReduceError as exc:
        print(f"{args.subcommand} failed: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))
