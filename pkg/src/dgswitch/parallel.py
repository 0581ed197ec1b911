"""Conflict-aware parallel Deep Greedy Switching.

Each inner round runs three kernels:

evaluate
    best exchange for every agent/job in the work set, split into index
    chunks over a worker pool. Workers read a frozen assignment and write
    disjoint record slots, so results do not depend on scheduling.
reduce
    a single greedy reservation pass (``check_conflicts``) that keeps a set
    of proposals touching pairwise distinct agents.
apply
    all kept proposals at once; each is re-checked against the frozen
    assignment and applied only if it still improves.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .core import Assignment, DeltaTables, Instance
from .engine import (
    Deadline,
    DgsConfig,
    SolveReport,
    SwitchState,
    Termination,
    Trace,
    initial_random,
)


class ConflictError(AssertionError):
    """Two selected exchanges share an agent or a job."""


@dataclass
class ParallelConfig(DgsConfig):
    workers: int = 4
    chunk: int = 128
    # also re-evaluate every proposal that lost the reservation pass; costs a
    # near-full sweep per round on clustered instances
    refresh_losers: bool = False

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.chunk < 1:
            raise ValueError("chunk must be >= 1")


@dataclass
class ConflictSets:
    """Outcome of the reservation pass.

    ``reserved`` and ``conflicted`` are agent indices. ``conflicted`` holds
    every agent whose own proposal lost plus the holder of every job whose
    proposal lost. ``agent_conflicts``/``job_conflicts`` record which
    proposals lost (by proposer index) and drive the filter.
    """

    reserved: set[int]
    conflicted: set[int]
    agent_conflicts: set[int]
    job_conflicts: set[int]


class AppliedExchange(NamedTuple):
    slot: int  # 0..n-1 agent proposal, n..2n-1 job proposal
    agent: int  # receives ``job``
    job: int
    displaced: int  # previous holder of ``job``
    freed: int  # job handed to ``displaced``
    delta: float


class WorkerPool:
    """Thin wrapper over a thread pool that splits index ranges into chunks.

    With one worker everything runs inline.
    """

    def __init__(self, workers: int = 1, chunk: int = 128) -> None:
        self.workers = workers
        self.chunk = chunk
        self._ex = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None

    def run(self, fn, idx: np.ndarray) -> None:
        m = idx.shape[0]
        if m == 0:
            return
        if self._ex is None or m <= self.chunk:
            fn(idx)
            return
        futures = [self._ex.submit(fn, idx[s:s + self.chunk]) for s in range(0, m, self.chunk)]
        for f in futures:
            f.result()

    def close(self) -> None:
        if self._ex is not None:
            self._ex.shutdown(wait=True)
            self._ex = None

    def __enter__(self) -> WorkerPool:
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _evaluate(st: SwitchState, pool: WorkerPool, agents: np.ndarray, jobs: np.ndarray) -> None:
    pool.run(st.eval_agents, agents)
    pool.run(st.eval_jobs, jobs)


def evaluate_all_parallel(inst: Instance, asg: Assignment, tables: DeltaTables,
                          cfg: ParallelConfig | None = None) -> None:
    """Fill ``tables`` with every agent's and job's best exchange."""
    cfg = cfg or ParallelConfig()
    st = SwitchState(inst, asg, cfg.improvement_epsilon)
    st.tables = tables
    everyone = np.arange(inst.n, dtype=np.int64)
    with WorkerPool(cfg.workers, cfg.chunk) as pool:
        _evaluate(st, pool, everyone, everyone)


def _conflict_masks(sigma: np.ndarray, tables: DeltaTables):
    return kernels.check_conflicts(sigma, tables.agent_partner, tables.job_partner)


def check_conflicts(tables: DeltaTables, asg: Assignment) -> ConflictSets:
    """Greedy reservation over agent proposals, then job proposals, ascending.

    A proposal survives when neither agent it moves is already reserved; it
    then reserves both.
    """
    reserved, agent_conf, job_conf = _conflict_masks(asg.sigma, tables)
    job_losers = np.flatnonzero(job_conf)
    conflicted = set(np.flatnonzero(agent_conf).tolist()) | set(asg.sigma[job_losers].tolist())
    return ConflictSets(
        reserved=set(np.flatnonzero(reserved).tolist()),
        conflicted=conflicted,
        agent_conflicts=set(np.flatnonzero(agent_conf).tolist()),
        job_conflicts=set(job_losers.tolist()),
    )


def _select(tables: DeltaTables, agent_conf: np.ndarray, job_conf: np.ndarray):
    """Surviving proposals as (slots, receiving agents, target jobs)."""
    n = tables.n
    ap, jp = tables.agent_partner, tables.job_partner
    agents_a = np.flatnonzero((ap >= 0) & ~agent_conf)
    jobs_j = np.flatnonzero((jp >= 0) & ~job_conf)
    slots = np.concatenate([agents_a, jobs_j + n])
    recv = np.concatenate([agents_a, jp[jobs_j]])
    target = np.concatenate([ap[agents_a], jobs_j])
    return slots, recv, target


def _apply_batch(st: SwitchState, slots, recv, target):
    """Apply the selected exchanges in place. Returns (ok mask, i2, j2, deltas)."""
    a, sigma, tau = st.a, st.sigma, st.tau
    i2 = sigma[target]
    j2 = tau[recv]
    d = (a[recv, target] + a[i2, j2]) - (a[recv, j2] + a[i2, target])
    ok = (target != j2) & (d > st.eps)
    r, t, ri, rj = recv[ok], target[ok], i2[ok], j2[ok]
    k = r.shape[0]
    if k:
        agents = np.concatenate([r, ri])
        jobs = np.concatenate([t, rj])
        if np.unique(agents).shape[0] != 2 * k or np.unique(jobs).shape[0] != 2 * k:
            raise ConflictError("selected exchanges overlap; conflict check is broken")
        sigma[t] = r
        sigma[rj] = ri
        tau[r] = t
        tau[ri] = rj
        st.held[t] = a[r, t]
        st.held[rj] = a[ri, rj]
        st.value += float(np.sum(d[ok]))
    return ok, i2, j2, d


def apply_parallel_switches(inst: Instance, asg: Assignment, tables: DeltaTables,
                            sets: ConflictSets, cfg: DgsConfig | None = None
                            ) -> tuple[Assignment, list[AppliedExchange]]:
    """Apply every non-conflicted improving proposal at once.

    Pure with respect to ``asg``: a new assignment is returned.
    """
    eps = cfg.improvement_epsilon if cfg is not None else 0.0
    n = inst.n
    agent_conf = np.zeros(n, dtype=bool)
    job_conf = np.zeros(n, dtype=bool)
    agent_conf[list(sets.agent_conflicts)] = True
    job_conf[list(sets.job_conflicts)] = True
    st = SwitchState(inst, asg, eps)
    slots, recv, target = _select(tables, agent_conf, job_conf)
    ok, i2, j2, d = _apply_batch(st, slots, recv, target)
    applied = [
        AppliedExchange(int(s), int(r), int(t), int(a2), int(b2), float(dd))
        for s, r, t, a2, b2, dd in zip(slots[ok], recv[ok], target[ok], i2[ok], j2[ok], d[ok])
    ]
    return Assignment(st.sigma, st.tau, float(st.value)), applied


def dgs_parallel(inst: Instance, cfg: ParallelConfig | None = None,
                 initial: Assignment | None = None) -> SolveReport:
    cfg = cfg or ParallelConfig()
    t0 = time.perf_counter()
    clock = Deadline(cfg.deadline, t0)
    asg = initial.copy() if initial is not None else initial_random(inst.n, cfg.seed, inst)
    st = SwitchState(inst, asg, cfg.improvement_epsilon)
    tables = st.tables
    n = inst.n
    everyone = np.arange(n, dtype=np.int64)

    trace = Trace()
    trace.commit(0, st.value)
    outer = rounds = switches = 0
    status = Termination.CONVERGED

    with WorkerPool(cfg.workers, cfg.chunk) as pool:
        while True:
            if clock.expired():
                status = Termination.DEADLINE
                break
            outer += 1
            switches_at_start = switches
            tables.clear()
            # chunked so a deadline can interrupt a long sweep
            step = max(cfg.chunk * cfg.workers, 256)
            for s in range(0, n, step):
                if clock.expired():
                    status = Termination.DEADLINE
                    break
                _evaluate(st, pool, everyone[s:s + step], everyone[s:s + step])
            if status is Termination.DEADLINE:
                break

            while tables.any_active():
                if clock.expired():
                    status = Termination.DEADLINE
                    break
                rounds += 1
                _, agent_conf, job_conf = _conflict_masks(st.sigma, tables)
                slots, recv, target = _select(tables, agent_conf, job_conf)
                ok, i2, j2, _ = _apply_batch(st, slots, recv, target)
                k = int(ok.sum())
                if k:
                    switches += k
                    trace.commit(rounds, st.value)
                failed = ~ok
                re_agents = [recv[ok], i2[ok], slots[failed & (slots < n)]]
                re_jobs = [target[ok], j2[ok], slots[failed & (slots >= n)] - n]
                if cfg.refresh_losers:
                    re_agents.append(np.flatnonzero(agent_conf))
                    re_jobs.append(np.flatnonzero(job_conf))
                _evaluate(st, pool, np.unique(np.concatenate(re_agents)),
                          np.unique(np.concatenate(re_jobs)))
            if status is Termination.DEADLINE:
                break
            trace.end_pass(rounds, st.value)
            if switches == switches_at_start:
                break

    return SolveReport(
        assignment=st.assignment(),
        objective_trace=trace.points,
        outer_iterations=outer,
        switches_applied=switches,
        elapsed=time.perf_counter() - t0,
        terminated_by=status,
        engine="dgs-par",
        iterations=rounds,
        notes={"workers": cfg.workers},
    )
