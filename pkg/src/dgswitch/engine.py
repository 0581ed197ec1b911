"""Sequential Deep Greedy Switching.

Start from a random full assignment, compute every agent's and every job's
best improving 2-exchange, then repeatedly apply the single largest one and
refresh only the records of the two agents and two jobs it touched. A full
re-evaluation pass follows until a pass makes no switch.

The solver is *anytime*: with a deadline it returns the current (always
complete) assignment as soon as the budget is spent.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import Assignment, DeltaTables, Instance, SizeMismatchError
from .rng import fisher_yates

TRACE_CAP = 100_000
_EVAL_CHUNK = 256


class Termination(str, enum.Enum):
    CONVERGED = "converged"
    DEADLINE = "deadline"


@dataclass
class DgsConfig:
    seed: int = 0
    deadline: float | None = None  # seconds
    improvement_epsilon: float = 0.0

    def __post_init__(self) -> None:
        if self.improvement_epsilon < 0:
            raise ValueError("improvement_epsilon must be >= 0")
        if self.deadline is not None and self.deadline < 0:
            raise ValueError("deadline must be >= 0")


@dataclass
class SolveReport:
    """Outcome of one solver run.

    ``iterations`` is the engine's natural work counter: committed switches
    for the sequential engine, inner rounds for the parallel one, bidding
    rounds for the auction.
    """

    assignment: Assignment
    objective_trace: list[tuple[int, float]]
    outer_iterations: int
    switches_applied: int
    elapsed: float
    terminated_by: Termination
    gap_vs_oracle: float | None = None
    engine: str = ""
    iterations: int = 0
    notes: dict = field(default_factory=dict)

    @property
    def objective(self) -> float:
        return self.assignment.value

    def set_oracle(self, optimal: float) -> float:
        self.gap_vs_oracle = gap(optimal, self.objective)
        return self.gap_vs_oracle


def gap(optimal: float, value: float) -> float:
    """Fractional shortfall ``(optimal - value) / optimal``."""
    return (optimal - value) / (abs(optimal) or 1.0)


class Deadline:
    def __init__(self, budget: float | None, start: float | None = None) -> None:
        self.start = time.perf_counter() if start is None else start
        self.stop = None if budget is None else self.start + budget

    def expired(self) -> bool:
        return self.stop is not None and time.perf_counter() >= self.stop


class Trace:
    """Objective trace: one point per commit until the cap, then per pass."""

    def __init__(self, cap: int = TRACE_CAP) -> None:
        self.cap = cap
        self.points: list[tuple[int, float]] = []

    def commit(self, it: int, value: float) -> None:
        if len(self.points) < self.cap:
            self.points.append((it, value))

    def end_pass(self, it: int, value: float) -> None:
        if len(self.points) >= self.cap and self.points[-1] != (it, value):
            self.points.append((it, value))


def initial_random(n: int, seed: int, inst: Instance | None = None) -> Assignment:
    """Seeded Fisher-Yates permutation as the starting assignment.

    Without ``inst`` the cached value is NaN.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    sigma = fisher_yates(n, seed)
    if inst is None:
        s = np.array(sigma, dtype=np.int64)
        tau = np.empty_like(s)
        tau[s] = np.arange(n)
        return Assignment(s, tau, float("nan"))
    if inst.n != n:
        raise SizeMismatchError(f"n={n} but instance has {inst.n}")
    return Assignment.from_sigma(sigma, inst)


class SwitchState:
    """Mutable solver state shared by both DGS engines.

    Keeps ``held[j] = benefits[sigma[j], j]`` in sync with the permutation so
    the kernels never gather the diagonal of the current assignment.
    """

    def __init__(self, inst: Instance, asg: Assignment, eps: float = 0.0) -> None:
        if asg.n != inst.n:
            raise SizeMismatchError(f"assignment has size {asg.n}, instance has {inst.n}")
        self.inst = inst
        self.a = inst.benefits
        self.at = inst.benefits_t
        self.sigma = asg.sigma.copy()
        self.tau = asg.tau.copy()
        self.value = asg.value
        self.held = self.a[self.sigma, np.arange(inst.n)]
        self.eps = float(eps)
        self.tables = DeltaTables.empty(inst.n)

    @property
    def n(self) -> int:
        return self.sigma.shape[0]

    def eval_agents(self, idx: np.ndarray) -> None:
        t = self.tables
        kernels.eval_agents(self.a, self.at, self.held, self.sigma, self.tau, idx,
                            t.agent_partner, t.agent_delta, self.eps)

    def eval_jobs(self, idx: np.ndarray) -> None:
        t = self.tables
        kernels.eval_jobs(self.a, self.at, self.held, self.sigma, self.tau, idx,
                          t.job_partner, t.job_delta, self.eps)

    def delta(self, i: int, j: int) -> float:
        a = self.a
        i2 = self.sigma[j]
        j2 = self.tau[i]
        return (a[i, j] + a[i2, j2]) - (a[i, j2] + a[i2, j])

    def apply(self, i: int, j: int, d: float) -> tuple[int, int]:
        """Give job ``j`` to agent ``i`` in place; returns (displaced agent, freed job)."""
        i2 = int(self.sigma[j])
        j2 = int(self.tau[i])
        self.sigma[j] = i
        self.sigma[j2] = i2
        self.tau[i] = j
        self.tau[i2] = j2
        self.held[j] = self.a[i, j]
        self.held[j2] = self.a[i2, j2]
        self.value += d
        return i2, j2

    def assignment(self) -> Assignment:
        asg = Assignment(self.sigma.copy(), self.tau.copy(), self.value)
        asg.refresh(self.inst)
        return asg


def ade(i: int, inst: Instance, asg: Assignment, tables: DeltaTables, eps: float = 0.0) -> None:
    """Agent difference evaluation: best strictly improving exchange for agent ``i``.

    Writes ``tables`` slot ``i``; ties go to the smallest job index.
    """
    held = inst.benefits[asg.sigma, np.arange(inst.n)]
    kernels.eval_agents(inst.benefits, inst.benefits_t, held, asg.sigma, asg.tau,
                        np.array([i], dtype=np.int64), tables.agent_partner, tables.agent_delta, eps)


def jde(j: int, inst: Instance, asg: Assignment, tables: DeltaTables, eps: float = 0.0) -> None:
    """Job difference evaluation; mirror of :func:`ade` over agents."""
    held = inst.benefits[asg.sigma, np.arange(inst.n)]
    kernels.eval_jobs(inst.benefits, inst.benefits_t, held, asg.sigma, asg.tau,
                      np.array([j], dtype=np.int64), tables.job_partner, tables.job_delta, eps)


def _evaluate_all_chunked(st: SwitchState, clock: Deadline) -> bool:
    """Full ADE/JDE sweep; False if the deadline hit part way."""
    n = st.n
    for start in range(0, n, _EVAL_CHUNK):
        if clock.expired():
            return False
        idx = np.arange(start, min(n, start + _EVAL_CHUNK), dtype=np.int64)
        st.eval_agents(idx)
        st.eval_jobs(idx)
    return True


def dgs_sequential(inst: Instance, cfg: DgsConfig | None = None,
                   initial: Assignment | None = None) -> SolveReport:
    cfg = cfg or DgsConfig()
    t0 = time.perf_counter()
    clock = Deadline(cfg.deadline, t0)
    asg = initial.copy() if initial is not None else initial_random(inst.n, cfg.seed, inst)
    st = SwitchState(inst, asg, cfg.improvement_epsilon)
    eps = st.eps
    tables = st.tables
    ap, ad, jp, jd = tables.agent_partner, tables.agent_delta, tables.job_partner, tables.job_delta

    trace = Trace()
    trace.commit(0, st.value)
    outer = 0
    switches = 0
    status = Termination.CONVERGED
    pair = np.empty(2, dtype=np.int64)

    while status is Termination.CONVERGED:
        if clock.expired():
            status = Termination.DEADLINE
            break
        outer += 1
        switches_at_start = switches
        tables.clear()
        if not _evaluate_all_chunked(st, clock):
            status = Termination.DEADLINE
            break
        while True:
            i_star = int(np.argmax(ad))
            j_star = int(np.argmax(jd))
            best_a = ad[i_star]
            best_j = jd[j_star]
            if best_a <= 0.0 and best_j <= 0.0:
                break
            if clock.expired():
                status = Termination.DEADLINE
                break
            # agent side wins ties
            if best_a >= best_j:
                i, j = i_star, int(ap[i_star])
                tables.zero_agent(i_star)
            else:
                i, j = int(jp[j_star]), j_star
                tables.zero_job(j_star)
            if st.tau[i] == j:
                continue  # stale record, exchange already realised
            d = st.delta(i, j)
            if d > eps:
                i2, j2 = st.apply(i, j, d)
                switches += 1
                trace.commit(switches, st.value)
                pair[0], pair[1] = i, i2
                st.eval_agents(pair)
                pair[0], pair[1] = j2, j
                st.eval_jobs(pair)
        if status is Termination.DEADLINE:
            break
        trace.end_pass(switches, st.value)
        if switches == switches_at_start:
            break

    final = st.assignment()
    return SolveReport(
        assignment=final,
        objective_trace=trace.points,
        outer_iterations=outer,
        switches_applied=switches,
        elapsed=time.perf_counter() - t0,
        terminated_by=status,
        engine="dgs-seq",
        iterations=switches,
    )
