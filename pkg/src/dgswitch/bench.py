"""Engine registry and benchmark campaigns with CSV output."""

from __future__ import annotations

import csv
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO

from .baselines import AuctionConfig, auction_solve, brute_force_solve, hungarian_solve
from .core import Instance
from .engine import DgsConfig, SolveReport, dgs_sequential, gap
from .geom import GeomParams, generate_geom
from .parallel import ParallelConfig, dgs_parallel
from .rng import mix_seed

ENGINES = ("dgs-seq", "dgs-par", "auction", "hungarian", "brute")

CSV_COLUMNS = (
    "engine", "n", "instance_seed", "run_seed", "objective", "optimal",
    "gap", "elapsed_ms", "iterations", "terminated_by",
)

_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


class EngineSpecError(ValueError):
    pass


@dataclass(frozen=True)
class EngineSpec:
    """An engine name plus keyword options, written ``name(key=value,...)``."""

    name: str
    options: tuple[tuple[str, str], ...] = ()

    @classmethod
    def parse(cls, text: str) -> EngineSpec:
        text = text.strip()
        name, _, rest = text.partition("(")
        name = name.strip()
        if name not in ENGINES:
            raise EngineSpecError(f"unknown engine {name!r}; choose from {', '.join(ENGINES)}")
        opts: list[tuple[str, str]] = []
        if rest:
            if not rest.endswith(")"):
                raise EngineSpecError(f"unbalanced parentheses in {text!r}")
            for item in filter(None, (s.strip() for s in rest[:-1].split(","))):
                key, eq, value = item.partition("=")
                if not eq:
                    raise EngineSpecError(f"engine option {item!r} is not key=value")
                opts.append((key.strip(), value.strip()))
        spec = cls(name, tuple(opts))
        spec.build(seed=0, deadline=None)  # validate eagerly
        return spec

    @property
    def label(self) -> str:
        if not self.options:
            return self.name
        return f"{self.name}({','.join(f'{k}={v}' for k, v in self.options)})"

    def build(self, seed: int, deadline: float | None):
        """Config object for this engine (``None`` for option-less oracles)."""
        opts = dict(self.options)
        try:
            if self.name in ("dgs-seq", "dgs-par"):
                kw = {"seed": seed, "deadline": deadline,
                      "improvement_epsilon": float(opts.pop("improvement_epsilon", 0.0))}
                if self.name == "dgs-par":
                    kw["workers"] = int(opts.pop("workers", 4))
                    kw["chunk"] = int(opts.pop("chunk", 128))
                    if "refresh_losers" in opts:
                        kw["refresh_losers"] = _BOOL[opts.pop("refresh_losers").lower()]
                    cfg = ParallelConfig(**kw)
                else:
                    cfg = DgsConfig(**kw)
            elif self.name == "auction":
                eps = opts.pop("epsilon", None)
                cfg = AuctionConfig(
                    epsilon=None if eps is None else float(eps),
                    scaling=_BOOL[opts.pop("scaling", "0").lower()],
                    scale_factor=float(opts.pop("scale_factor", 4.0)),
                    deadline=deadline,
                )
            else:
                cfg = None
        except (KeyError, ValueError) as exc:
            raise EngineSpecError(f"bad option for {self.name}: {exc}") from None
        if opts:
            raise EngineSpecError(f"unknown option(s) for {self.name}: {', '.join(opts)}")
        return cfg


def split_engines(text: str) -> list[str]:
    """Split a comma list, ignoring commas inside parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return [s.strip() for s in out if s.strip()]


def run_engine(spec: EngineSpec, inst: Instance, seed: int = 0,
               deadline: float | None = None) -> SolveReport:
    inst.benefits_t  # instance preprocessing stays out of the solver's clock
    cfg = spec.build(seed, deadline)
    if spec.name == "dgs-seq":
        return dgs_sequential(inst, cfg)
    if spec.name == "dgs-par":
        return dgs_parallel(inst, cfg)
    if spec.name == "auction":
        return auction_solve(inst, cfg)
    if spec.name == "hungarian":
        return hungarian_solve(inst)
    return brute_force_solve(inst)


@dataclass
class CampaignSpec:
    sizes: list[int]
    instances_per_size: int = 1
    bound: float = 100.0
    base_seed: int = 0
    engines: list[str] = field(default_factory=lambda: ["dgs-seq"])
    repetitions: int = 1
    deadline: float | None = None  # seconds
    oracle: bool = False

    def __post_init__(self) -> None:
        if not self.sizes or any(n < 1 for n in self.sizes):
            raise ValueError("sizes must be a non-empty list of positive integers")
        if self.instances_per_size < 1 or self.repetitions < 1:
            raise ValueError("instances_per_size and repetitions must be >= 1")
        if not self.engines:
            raise ValueError("at least one engine is required")
        self.engine_specs = [EngineSpec.parse(e) for e in self.engines]

    @classmethod
    def from_text(cls, text: str) -> CampaignSpec:
        """Parse a flat ``key=value`` file (``#`` comments allowed)."""
        kv: dict[str, str] = {}
        for line_no, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, eq, value = line.partition("=")
            if not eq:
                raise ValueError(f"line {line_no}: expected key=value, got {line!r}")
            kv[key.strip()] = value.strip()
        known = {"sizes", "instances", "instances_per_size", "bound", "base_seed", "seed",
                 "engines", "reps", "repetitions", "deadline_ms", "oracle"}
        unknown = set(kv) - known
        if unknown:
            raise ValueError(f"unknown spec key(s): {', '.join(sorted(unknown))}")
        args: dict = {}
        if "sizes" in kv:
            args["sizes"] = [int(s) for s in kv["sizes"].split(",") if s.strip()]
        if "instances" in kv or "instances_per_size" in kv:
            args["instances_per_size"] = int(kv.get("instances_per_size", kv.get("instances")))
        if "bound" in kv:
            args["bound"] = float(kv["bound"])
        if "base_seed" in kv or "seed" in kv:
            args["base_seed"] = int(kv.get("base_seed", kv.get("seed")))
        if "engines" in kv:
            args["engines"] = split_engines(kv["engines"])
        if "reps" in kv or "repetitions" in kv:
            args["repetitions"] = int(kv.get("repetitions", kv.get("reps")))
        if "deadline_ms" in kv:
            args["deadline"] = float(kv["deadline_ms"]) / 1000.0
        if "oracle" in kv:
            args["oracle"] = kv["oracle"].lower() in ("hungarian", "1", "true", "yes")
        if "sizes" not in args:
            raise ValueError("spec needs a 'sizes' key")
        return cls(**args)


@dataclass
class BenchRecord:
    engine: str
    n: int
    instance_seed: int
    run_seed: int
    objective: float | None
    optimal: float | None
    gap: float | None
    elapsed_ms: float | None
    iterations: int | None
    terminated_by: str
    error: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.gap is not None and self.gap < -1e-9:
            raise ValueError(f"gap {self.gap} below -1e-9: objective exceeds the optimum")

    def to_row(self) -> dict[str, str]:
        row = {}
        for name in CSV_COLUMNS:
            v = getattr(self, name)
            row[name] = "" if v is None else repr(v) if isinstance(v, float) else str(v)
        return row

    @classmethod
    def from_row(cls, row: dict[str, str]) -> BenchRecord:
        def opt(conv, key):
            v = row[key]
            return None if v == "" else conv(v)

        return cls(
            engine=row["engine"],
            n=int(row["n"]),
            instance_seed=int(row["instance_seed"]),
            run_seed=int(row["run_seed"]),
            objective=opt(float, "objective"),
            optimal=opt(float, "optimal"),
            gap=opt(float, "gap"),
            elapsed_ms=opt(float, "elapsed_ms"),
            iterations=opt(int, "iterations"),
            terminated_by=row["terminated_by"],
        )

    @property
    def failed(self) -> bool:
        return self.terminated_by == "error"


def instance_seed(base_seed: int, n: int, index: int) -> int:
    return mix_seed(base_seed, n, index)


def run_seed(base_seed: int, n: int, index: int, rep: int) -> int:
    return mix_seed(base_seed, n, index, rep)


def _cells(spec: CampaignSpec):
    for n in spec.sizes:
        for k in range(spec.instances_per_size):
            yield n, k


def _run_cell(spec: CampaignSpec, n: int, k: int) -> list[BenchRecord]:
    iseed = instance_seed(spec.base_seed, n, k)
    inst = generate_geom(GeomParams(n, spec.bound, iseed))
    optimal = hungarian_solve(inst).objective if spec.oracle else None
    out = []
    for es in spec.engine_specs:
        for rep in range(spec.repetitions):
            rseed = run_seed(spec.base_seed, n, k, rep)
            try:
                rep_ = run_engine(es, inst, rseed, spec.deadline)
            except Exception as exc:  # recorded as an error row; campaign continues
                out.append(BenchRecord(es.label, n, iseed, rseed, None, optimal, None,
                                       None, None, "error", error=f"{type(exc).__name__}: {exc}"))
                continue
            g = None if optimal is None else gap(optimal, rep_.objective)
            out.append(BenchRecord(
                engine=es.label, n=n, instance_seed=iseed, run_seed=rseed,
                objective=rep_.objective, optimal=optimal, gap=g,
                elapsed_ms=rep_.elapsed * 1000.0, iterations=rep_.iterations,
                terminated_by=rep_.terminated_by.value,
            ))
    return out


def run_campaign(spec: CampaignSpec, parallel_cells: int = 1) -> list[BenchRecord]:
    """Run engine x size x instance x repetition; rows come back in a fixed order."""
    cells = list(_cells(spec))
    if parallel_cells > 1:
        with ThreadPoolExecutor(max_workers=parallel_cells) as ex:
            chunks = list(ex.map(lambda c: _run_cell(spec, *c), cells))
    else:
        chunks = [_run_cell(spec, *c) for c in cells]
    return [r for chunk in chunks for r in chunk]


def write_csv(records: Iterable[BenchRecord], sink: TextIO | str | Path) -> None:
    if isinstance(sink, (str, Path)):
        with open(sink, "w", newline="", encoding="utf-8") as fh:
            write_csv(records, fh)
        return
    w = csv.DictWriter(sink, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow(r.to_row())


def read_csv(source: TextIO | str | Path) -> list[BenchRecord]:
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_csv(fh)
    reader = csv.DictReader(source)
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [BenchRecord.from_row(row) for row in reader]


def summarize(records: list[BenchRecord]) -> list[dict]:
    """Mean/stddev per (engine, n), in first-seen order."""
    groups: dict[tuple[str, int], list[BenchRecord]] = {}
    for r in records:
        groups.setdefault((r.engine, r.n), []).append(r)
    out = []
    for (engine, n), rs in groups.items():
        good = [r for r in rs if not r.failed]
        objs = [r.objective for r in good]
        times = [r.elapsed_ms for r in good]
        gaps = [r.gap for r in good if r.gap is not None]
        out.append({
            "engine": engine, "n": n, "runs": len(rs), "errors": len(rs) - len(good),
            "objective_mean": statistics.fmean(objs) if objs else math.nan,
            "objective_std": statistics.pstdev(objs) if objs else math.nan,
            "elapsed_ms_mean": statistics.fmean(times) if times else math.nan,
            "elapsed_ms_std": statistics.pstdev(times) if times else math.nan,
            "gap_mean": statistics.fmean(gaps) if gaps else None,
            "gap_max": max(gaps) if gaps else None,
        })
    return out


def format_summary(rows: list[dict], contended: bool = False) -> str:
    head = "# timings: solver only (instance generation and file IO excluded)"
    if contended:
        head += "; cells ran concurrently, timings are contended"
    lines = [head, f"{'engine':<28} {'n':>6} {'runs':>5} {'objective mean':>16} {'std':>12} "
                   f"{'ms mean':>10} {'ms std':>9} {'gap mean':>10} {'gap max':>10}"]
    for s in rows:
        gm = "-" if s["gap_mean"] is None else f"{s['gap_mean']:.5f}"
        gx = "-" if s["gap_max"] is None else f"{s['gap_max']:.5f}"
        lines.append(
            f"{s['engine']:<28} {s['n']:>6} {s['runs']:>5} {s['objective_mean']:>16.4f} "
            f"{s['objective_std']:>12.4f} {s['elapsed_ms_mean']:>10.2f} {s['elapsed_ms_std']:>9.2f} "
            f"{gm:>10} {gx:>10}"
        )
    return "\n".join(lines)


__all__ = [
    "BenchRecord", "CSV_COLUMNS", "CampaignSpec", "ENGINES", "EngineSpec", "EngineSpecError",
    "format_summary", "read_csv", "run_campaign", "run_engine", "split_engines",
    "summarize", "write_csv",
]
