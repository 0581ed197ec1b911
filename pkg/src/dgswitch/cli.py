"""Command line front end: ``gen``, ``solve`` and ``bench``.

Exit codes: 0 success (a deadline stop counts as success), 1 runtime
failure (unreadable file, engine error, failed campaign cells), 2 usage.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import kernels
from .baselines import hungarian_solve
from .bench import (
    CampaignSpec,
    EngineSpec,
    EngineSpecError,
    format_summary,
    run_campaign,
    run_engine,
    split_engines,
    summarize,
    write_csv,
)
from .engine import gap
from .geom import GeomParams, InstanceParseError, checksum, generate_geom, read_instance, write_instance

log = logging.getLogger("dgswitch")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {v}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _geom(text: str) -> GeomParams:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--geom expects n,bound,seed")
    try:
        return GeomParams(int(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _sizes(text: str) -> list[int]:
    return [_positive_int(s) for s in text.split(",") if s.strip()]


def _deadline(ms: float | None) -> float | None:
    return None if ms is None else ms / 1000.0


def cmd_gen(args: argparse.Namespace) -> int:
    inst = generate_geom(GeomParams(args.n, args.bound, args.seed))
    try:
        write_instance(inst, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return 1
    print(f"sha256 {checksum(args.out)}  {args.out}")
    return 0


def _engine_spec(args: argparse.Namespace) -> EngineSpec:
    opts: list[tuple[str, str]] = []
    if args.engine in ("dgs-seq", "dgs-par") and args.improvement_epsilon:
        opts.append(("improvement_epsilon", repr(args.improvement_epsilon)))
    if args.engine == "dgs-par":
        opts += [("workers", str(args.workers)), ("chunk", str(args.chunk))]
    if args.engine == "auction":
        if args.epsilon is not None:
            opts.append(("epsilon", repr(args.epsilon)))
        if args.scaling:
            opts.append(("scaling", "1"))
        opts.append(("scale_factor", repr(args.scale_factor)))
    spec = EngineSpec(args.engine, tuple(opts))
    spec.build(0, None)
    return spec


def cmd_solve(args: argparse.Namespace) -> int:
    try:
        if args.instance is not None:
            inst = read_instance(args.instance)
        else:
            inst = generate_geom(args.geom)
        spec = _engine_spec(args)
        report = run_engine(spec, inst, args.seed, _deadline(args.deadline_ms))
    except (OSError, InstanceParseError, EngineSpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    asg = report.assignment
    try:
        asg.validate(inst)
        valid = True
    except ValueError:
        valid = False
    out = {
        "engine": spec.name,
        "n": inst.n,
        "objective": report.objective,
        "elapsed_ms": report.elapsed * 1000.0,
        "iterations": report.iterations,
        "outer_iterations": report.outer_iterations,
        "switches_applied": report.switches_applied,
        "terminated_by": report.terminated_by.value,
        "valid": valid,
        "backend": kernels.BACKEND,
    }
    if args.oracle == "hungarian":
        optimal = hungarian_solve(inst).objective
        out["optimal"] = optimal
        out["gap"] = gap(optimal, report.objective)
    if report.notes:
        out["notes"] = report.notes
    if args.print_assignment:
        out["tau"] = asg.tau.tolist()
    print(json.dumps(out))
    return 0 if valid else 1


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        if args.spec is not None:
            spec = CampaignSpec.from_text(Path(args.spec).read_text())
        else:
            spec = CampaignSpec(
                sizes=args.sizes,
                instances_per_size=args.instances,
                bound=args.bound,
                base_seed=args.base_seed,
                engines=split_engines(args.engines),
                repetitions=args.reps,
                deadline=_deadline(args.deadline_ms),
                oracle=args.oracle == "hungarian",
            )
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    records = run_campaign(spec, parallel_cells=args.parallel_cells)
    try:
        write_csv(records, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return 1
    print(format_summary(summarize(records), contended=args.parallel_cells > 1))
    errors = [r for r in records if r.failed]
    for r in errors:
        print(f"error: {r.engine} n={r.n} run_seed={r.run_seed}: {r.error}", file=sys.stderr)
    print(f"wrote {len(records)} rows to {args.out}")
    return 1 if errors else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dgswitch", description="Deep Greedy Switching LSAP toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a GEOM instance file")
    g.add_argument("--n", type=_positive_int, required=True)
    g.add_argument("--bound", type=_positive_float, default=100.0)
    g.add_argument("--seed", type=_seed, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve one instance and print a JSON report")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--instance", help="instance file")
    src.add_argument("--geom", type=_geom, metavar="N,BOUND,SEED", help="generate a GEOM instance inline")
    s.add_argument("--engine", choices=["dgs-seq", "dgs-par", "auction", "hungarian", "brute"],
                   default="dgs-seq")
    s.add_argument("--seed", type=_seed, default=0, help="initial-solution seed for DGS")
    s.add_argument("--workers", type=_positive_int, default=4)
    s.add_argument("--chunk", type=_positive_int, default=128)
    s.add_argument("--deadline-ms", type=float, default=None)
    s.add_argument("--improvement-epsilon", type=float, default=0.0)
    s.add_argument("--epsilon", type=_positive_float, default=None, help="auction bid increment")
    s.add_argument("--scaling", action="store_true", help="auction epsilon scaling")
    s.add_argument("--scale-factor", type=float, default=4.0)
    s.add_argument("--oracle", choices=["none", "hungarian"], default="none")
    s.add_argument("--print-assignment", action="store_true")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run a benchmark campaign and write CSV")
    b.add_argument("--spec", help="key=value campaign file (overrides the flags below)")
    b.add_argument("--sizes", type=_sizes, default=[64])
    b.add_argument("--instances", type=_positive_int, default=1)
    b.add_argument("--reps", type=_positive_int, default=1)
    b.add_argument("--bound", type=_positive_float, default=100.0)
    b.add_argument("--base-seed", type=_seed, default=0)
    b.add_argument("--engines", default="dgs-seq",
                   help="comma list, e.g. 'dgs-seq,dgs-par(workers=4),auction(scaling=1)'")
    b.add_argument("--deadline-ms", type=float, default=None)
    b.add_argument("--oracle", choices=["none", "hungarian"], default="none")
    b.add_argument("--parallel-cells", type=_positive_int, default=1)
    b.add_argument("--out", default="bench.csv")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "deadline_ms", None) is not None and args.deadline_ms < 0:
        print("error: --deadline-ms must be >= 0", file=sys.stderr)
        return 2
    log.debug("kernel backend: %s", kernels.BACKEND)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
