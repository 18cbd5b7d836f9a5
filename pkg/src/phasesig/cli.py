"""Command-line front end.

Exit status: 0 on success, 1 on a parse or validation failure, 2 when
``verify`` finds more CI misses than allowed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import PhaseSigError, SpecSemanticError, SpecSyntaxError
from .model import validate_system
from .oracle import estimate_curve, results_to_csv
from .reliability import Side, curve_points, reliability_curve, system_reliability
from .signature import compute_signature_family, format_table, table_to_csv
from .specfile import parse_spec
from .structure import derive_meta_types

COMMANDS = ("validate", "signature", "reliability", "simulate", "verify")
DEFAULT_TRIALS = 100_000
DEFAULT_SEED = 12345


def _grid(text: str):
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) == 1 and parts[0].isdigit():
        return int(parts[0])
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError("grid is a point count or a comma-separated list of times")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phasesig",
                                 description="Survival signatures and reliability of phased mission systems.")
    ap.add_argument("--spec", required=True,
                    help="system file, or a shipped fixture name (example1, example2, example3)")
    ap.add_argument("--command", required=True, choices=COMMANDS)
    ap.add_argument("--grid", type=_grid, default=None,
                    help="evenly spaced point count, or comma-separated times")
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--relax-exponential", action="store_true", default=None,
                    help="merge late-arriving members into one meta-type where the lifetime law allows")
    ap.add_argument("--out-dir", type=Path, default=Path("."))
    return ap


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text, encoding="utf-8")
    return path


def _tabulated_points(system):
    """Mission start, both limits at each interior boundary, mission end."""
    return curve_points(system, None)


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        system, opts = parse_spec(args.spec)
    except (SpecSyntaxError, SpecSemanticError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return 1

    relax = opts.relax_exponential if args.relax_exponential is None else args.relax_exponential
    grid = args.grid if args.grid is not None else opts.grid
    trials = args.trials or opts.trials or DEFAULT_TRIALS
    seed = args.seed if args.seed is not None else (opts.seed if opts.seed is not None else DEFAULT_SEED)
    threads = args.threads or opts.threads or 1

    if args.command == "validate":
        report = validate_system(system)
        for w in report.warnings:
            print(f"warning: {w}", file=out)
        print(f"ok: {system.n_phases} phases, {len(system.components)} components, "
              f"{len(system.physical_types)} physical types", file=out)
        return 0

    try:
        mta = derive_meta_types(system, relax_exponential=relax)
        if args.command == "signature":
            return _signature(system, mta, args.out_dir, out)
        fam = compute_signature_family(system, mta)
        if args.command == "reliability":
            return _reliability(system, fam, grid, args.out_dir, out)
        if args.command == "simulate":
            results = estimate_curve(system, curve_points(system, grid), trials, seed, threads=threads)
            path = _write(args.out_dir, "simulation.csv", results_to_csv(results))
            for r in results:
                print(f"{r.point.label():>12}  {r.estimate:.7f}  [{r.lower:.7f}, {r.upper:.7f}]", file=out)
            print(f"wrote {path.name}", file=out)
            return 0
        return _verify(system, fam, trials, seed, threads, args.out_dir, out)
    except PhaseSigError as exc:
        print(f"error: {exc}", file=err)
        return 1


def _signature(system, mta, out_dir, out) -> int:
    fam = compute_signature_family(system, mta)
    print("meta-types:", file=out)
    for mt in mta.metatypes:
        tag = " (relaxed)" if mt.exponential_relaxed else ""
        phases = ",".join(str(i) for i in sorted(mt.appearance))
        print(f"  {mt.id}: {' '.join(mt.members)} : {mt.physical.name}, phases {phases}{tag}", file=out)
    for table in fam.tables:
        path = _write(out_dir, f"signature_p{table.p}.csv", table_to_csv(table))
        print(f"\nphase depth {table.p} ({len(table)} nonzero rows, {path.name})", file=out)
        print(format_table(table), file=out)
    return 0


def _reliability(system, fam, grid, out_dir, out) -> int:
    curve = reliability_curve(system, fam, grid)
    path = _write(out_dir, "reliability.csv", curve.to_csv())
    print("jumps at phase boundaries:", file=out)
    for t in system.boundaries[1:-1]:
        left, right = curve.value(t, Side.LEFT), curve.value(t, Side.RIGHT)
        print(f"  t={t:g}: R(t-)={left:.7f}  R(t+)={right:.7f}  jump={curve.jumps[t]:.6e}", file=out)
    print(f"R({system.mission_end:g})={curve.value(system.mission_end):.7f}", file=out)
    print(f"wrote {path.name} ({len(curve.samples)} points)", file=out)
    return 0


def allowed_misses(n_points: int) -> int:
    return max(1, int(0.01 * n_points))


def _verify(system, fam, trials, seed, threads, out_dir, out) -> int:
    points = _tabulated_points(system)
    analytic = [system_reliability(system, fam, p) for p in points]
    results = estimate_curve(system, points, trials, seed, threads=threads)
    _write(out_dir, "verify.csv", results_to_csv(results, analytic))
    misses = 0
    for r, a in zip(results, analytic):
        ok = r.contains(a)
        misses += not ok
        print(f"{r.point.label():>12}  analytic={a:.7f}  mc={r.estimate:.7f}  "
              f"ci=[{r.lower:.7f}, {r.upper:.7f}]  {'ok' if ok else 'MISS'}", file=out)
    limit = allowed_misses(len(points))
    print(f"{misses} of {len(points)} points outside the {results[0].confidence:.0%} CI "
          f"(allowed {limit}); trials={trials} seed={seed}", file=out)
    return 0 if misses <= limit else 2


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
