"""Config-driven experiment runner.

Scenarios are YAML documents; `simulate` runs one, `suite` runs a
directory of them and tabulates the outcomes, `verify` runs the
identity/oracle self-checks.  All data outputs are CSV (comma
separator, '.' decimal, header row, LF endings) plus a small JSON
summary per run.

Exit codes: 0 finished, 10 blowup suspected, 11 dt collapse, 2 bad
config or usage.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from ks1d.core import Grid, ICSpec, ProblemConfig, SolverConfig, Variant
from ks1d.diffusion import DiffusionSpec
from ks1d.functionals import CSV_COLUMNS, TrajectoryMonitor, key_identity_residual
from ks1d.stepper import SimState, Status, run

EXIT_CODES = {
    Status.FINISHED: 0,
    Status.BLOWUP_SUSPECTED: 10,
    Status.DT_COLLAPSE: 11,
}

DEFAULTS = {
    "n_cells": 128,
    "cfl_diff": 0.4,
    "cfl_adv": 0.9,
    "blowup_threshold": 1e6,
    "dt_min": 1e-12,
    "record_every": 10,
}


class ConfigError(ValueError):
    """Invalid or unparseable scenario document."""


@dataclass
class RunManifest:
    scenario: str
    problem: ProblemConfig
    solver: SolverConfig
    grid: Grid
    snapshot_times: list[float] = field(default_factory=list)
    v_lp_p: float = 2.0

    def __post_init__(self):
        if sorted(self.snapshot_times) != list(self.snapshot_times):
            raise ConfigError("snapshot_times must be sorted ascending")
        if self.snapshot_times and not (
            0.0 <= self.snapshot_times[0] and self.snapshot_times[-1] <= self.problem.t_end
        ):
            raise ConfigError("snapshot_times must lie in [0, t_end]")


def _section(doc: dict, name: str, allowed: set[str]) -> dict:
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    unknown = set(sec) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {sorted(unknown)}")
    return sec


def parse_config(text: str, name_hint: str = "scenario") -> RunManifest:
    """Parse and fully validate one YAML scenario document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML parse error: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("top-level document must be a mapping")
    unknown = set(doc) - {"scenario", "problem", "grid", "solver", "output"}
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")

    prob = _section(doc, "problem", {"variant", "t_end", "diffusion", "initial_condition"})
    if "diffusion" not in prob or "initial_condition" not in prob:
        raise ConfigError("problem requires 'diffusion' and 'initial_condition'")
    diff = dict(prob["diffusion"])
    unknown = set(diff) - {"kind", "p"}
    if unknown:
        raise ConfigError(f"unknown keys in diffusion: {sorted(unknown)}")
    ic = dict(prob["initial_condition"])
    unknown = set(ic) - {"kind", "mass", "amplitude", "frequency", "center", "width", "floor"}
    if unknown:
        raise ConfigError(f"unknown keys in initial_condition: {sorted(unknown)}")

    grid_sec = _section(doc, "grid", {"n_cells"})
    solver_sec = _section(
        doc, "solver", {"cfl_diff", "cfl_adv", "dt_min", "blowup_threshold", "record_every"}
    )
    out_sec = _section(doc, "output", {"snapshot_times", "v_lp_p"})

    try:
        diffusion = DiffusionSpec(kind=diff.get("kind", ""), p=float(diff.get("p", 0.0)))
        ic_spec = ICSpec(
            kind=ic.get("kind", ""),
            mass=float(ic.get("mass", 0.0)),
            amplitude=float(ic.get("amplitude", 0.5)),
            frequency=int(ic.get("frequency", 1)),
            center=float(ic.get("center", 0.5)),
            width=float(ic.get("width", 0.1)),
            floor=float(ic.get("floor", 0.0)),
        )
        problem = ProblemConfig(
            variant=Variant(prob.get("variant", "standard")),
            diffusion=diffusion,
            initial_condition=ic_spec,
            t_end=float(prob.get("t_end", 1.0)),
        )
        solver = SolverConfig(
            cfl_diff=float(solver_sec.get("cfl_diff", DEFAULTS["cfl_diff"])),
            cfl_adv=float(solver_sec.get("cfl_adv", DEFAULTS["cfl_adv"])),
            dt_min=float(solver_sec.get("dt_min", DEFAULTS["dt_min"])),
            blowup_threshold=float(
                solver_sec.get("blowup_threshold", DEFAULTS["blowup_threshold"])
            ),
            record_every=int(solver_sec.get("record_every", DEFAULTS["record_every"])),
        )
        grid = Grid(n_cells=int(grid_sec.get("n_cells", DEFAULTS["n_cells"])))
        return RunManifest(
            scenario=str(doc.get("scenario", name_hint)),
            problem=problem,
            solver=solver,
            grid=grid,
            snapshot_times=[float(t) for t in out_sec.get("snapshot_times", [])],
            v_lp_p=float(out_sec.get("v_lp_p", 2.0)),
        )
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid scenario: {exc}") from exc


def load_manifest(path: Path) -> RunManifest:
    return parse_config(Path(path).read_text(), name_hint=Path(path).stem)


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def write_timeseries(records, path: Path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for rec in records:
            fh.write(",".join(_fmt(getattr(rec, c)) for c in CSV_COLUMNS) + "\n")


def _write_profile(state: SimState, grid: Grid, path: Path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("x,u,v\n")
        for x, u, v in zip(grid.cell_centers, state.u, state.v):
            fh.write(f"{x!r},{u!r},{v!r}\n")


def run_scenario(manifest: RunManifest, out_dir: Path) -> dict:
    """Execute one scenario; write timeseries.csv, profile snapshots and
    summary.json under out_dir; return the summary dict."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    monitor = TrajectoryMonitor(manifest.problem, manifest.grid, v_lp_p=manifest.v_lp_p)

    def snapshot_hook(state: SimState, t_req: float) -> None:
        _write_profile(state, manifest.grid, out_dir / f"profile_t{t_req:g}.csv")

    t0 = time.perf_counter()
    final = run(
        manifest.problem,
        manifest.solver,
        manifest.grid,
        monitor,
        snapshot_times=manifest.snapshot_times,
        on_snapshot=snapshot_hook,
    )
    wall = time.perf_counter() - t0

    write_timeseries(monitor.records, out_dir / "timeseries.csv")
    recs = monitor.records
    residuals = [r.energy_residual for r in recs if r.energy_residual is not None]
    slacks1 = [r.regest1_slack for r in recs if r.regest1_slack is not None]
    slacks2 = [r.regest2_slack for r in recs if r.regest2_slack is not None]
    last = recs[-1]
    summary = {
        "scenario": manifest.scenario,
        "status": final.status.value,
        "t_final": final.t,
        "steps": final.step,
        "mass_drift": abs(last.mass - recs[0].mass),
        "max_u_linf": max(r.u_linf for r in recs),
        "final_u_linf": last.u_linf,
        "final_v_lp": last.v_lp,
        "max_energy_residual": max((abs(r) for r in residuals), default=0.0),
        "min_regest1_slack": min(slacks1, default=None),
        "min_regest2_slack": min(slacks2, default=None),
        "wall_time_s": wall,
    }
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return summary


def compare_suite(manifests: list[RunManifest], out_dir: Path) -> list[dict]:
    """Run >= 2 scenarios and tabulate (scenario, p, M, variant, status,
    max u_linf, t_final) into comparison.csv."""
    if len(manifests) < 2:
        raise ConfigError("a suite needs at least 2 scenarios")
    names = [m.scenario for m in manifests]
    dupes = {n for n in names if names.count(n) > 1}
    if dupes:
        raise ConfigError(f"duplicate scenario names: {sorted(dupes)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for m in manifests:
        summary = run_scenario(m, out_dir / m.scenario)
        spec = m.problem.diffusion
        p = spec.p if spec.kind.startswith("power") else {
            "inverse_u": -1.0,
            "inverse_one_plus_u": -1.0,
        }[spec.kind]
        rows.append(
            {
                "scenario": m.scenario,
                "p": p,
                "M": m.problem.initial_condition.mass,
                "variant": m.problem.variant.value,
                "status": summary["status"],
                "max_u_linf": summary["max_u_linf"],
                "t_final": summary["t_final"],
            }
        )
    cols = ["scenario", "p", "M", "variant", "status", "max_u_linf", "t_final"]
    with open(out_dir / "comparison.csv", "w", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(str(row[c]) for c in cols) + "\n")
    return rows


def _verify_checks() -> list[tuple[str, bool, str]]:
    """Self-checks: key-identity convergence, steady-state energy
    neutrality, elliptic manufactured solutions."""
    from ks1d.elliptic import solve_jl, solve_standard
    from ks1d.functionals import eval_D, eval_source
    from ks1d.core import quadrature

    checks = []
    phi = lambda x: 2.0 + np.cos(np.pi * x)
    for spec in (
        DiffusionSpec("inverse_u"),
        DiffusionSpec("inverse_one_plus_u"),
        DiffusionSpec("power_one_plus_u", p=-2.0),
    ):
        res = [key_identity_residual(phi, spec, Grid(n)) for n in (64, 128, 256, 512)]
        ratios = [res[i] / res[i + 1] for i in range(3)]
        ok = all(r >= 1.8 for r in ratios)
        checks.append(
            (f"key identity convergence [{spec.kind}{spec.p if 'power' in spec.kind else ''}]",
             ok, f"ratios {['%.2f' % r for r in ratios]}")
        )

    grid = Grid(128)
    spec = DiffusionSpec("inverse_u")
    M = 2.0
    u = np.full(grid.n_cells, M)
    v = solve_standard(u, grid)
    D = eval_D(u, v, spec, grid)
    S = eval_source(u, v, spec, grid)
    ok = abs(D - M**2 / 4) < 1e-12 and abs(S - M**2 / 4) < 1e-12
    checks.append(("steady-state energy neutrality", ok, f"D={D!r} S={S!r}"))

    errs = []
    for n in (64, 128, 256):
        g = Grid(n)
        x = g.cell_centers
        u_man = (1.0 + np.pi**2) * np.cos(np.pi * x)
        errs.append(float(np.max(np.abs(solve_standard(u_man, g) - np.cos(np.pi * x)))))
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    ok = all(o >= 1.9 for o in orders)
    checks.append(("elliptic standard order", ok, f"orders {['%.2f' % o for o in orders]}"))

    errs = []
    for n in (64, 128, 256):
        g = Grid(n)
        x = g.cell_centers
        u_man = 1.0 + np.cos(2 * np.pi * x)
        v = solve_jl(u_man, g, quadrature(u_man, g))
        errs.append(float(np.max(np.abs(v - np.cos(2 * np.pi * x) / (4 * np.pi**2)))))
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    ok = all(o >= 1.9 for o in orders)
    checks.append(("elliptic JL order", ok, f"orders {['%.2f' % o for o in orders]}"))
    return checks


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ks1d", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one scenario file")
    p_sim.add_argument("config", type=Path)
    p_sim.add_argument("--out", type=Path, default=None)
    p_sim.add_argument("--n-cells", type=int, default=None)
    p_sim.add_argument("--t-end", type=float, default=None)

    p_suite = sub.add_parser("suite", help="run a directory of scenario files")
    p_suite.add_argument("configs", type=Path)
    p_suite.add_argument("--out", type=Path, required=True)

    sub.add_parser("verify", help="run identity/oracle self-checks")

    args = parser.parse_args(argv)

    if args.command == "simulate":
        try:
            manifest = load_manifest(args.config)
            if args.n_cells is not None:
                manifest.grid = Grid(args.n_cells)
            if args.t_end is not None:
                manifest.problem = ProblemConfig(
                    variant=manifest.problem.variant,
                    diffusion=manifest.problem.diffusion,
                    initial_condition=manifest.problem.initial_condition,
                    t_end=args.t_end,
                )
        except (OSError, ConfigError) as exc:
            print(f"error: {args.config}: {exc}", file=sys.stderr)
            return 2
        out = args.out if args.out is not None else Path(manifest.scenario)
        summary = run_scenario(manifest, out)
        print(json.dumps(summary, indent=2))
        return EXIT_CODES[Status(summary["status"])]

    if args.command == "suite":
        try:
            paths = sorted(Path(args.configs).glob("*.yaml")) + sorted(
                Path(args.configs).glob("*.yml")
            )
            manifests = [load_manifest(p) for p in paths]
            rows = compare_suite(manifests, args.out)
        except (OSError, ConfigError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        for row in rows:
            print(f"{row['scenario']}: {row['status']} (max |u| = {row['max_u_linf']:.3g})")
        return 0

    # verify
    checks = _verify_checks()
    width = max(len(name) for name, _, _ in checks)
    all_ok = True
    for name, ok, detail in checks:
        all_ok &= ok
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
