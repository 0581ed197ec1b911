"""Reference solvers: Jacobi auction, Hungarian method, exhaustive search."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import Assignment, Instance
from .engine import Deadline, SolveReport, Termination

BRUTE_FORCE_MAX_N = 10
_ROUND_BATCH = 32


class SizeGuardError(ValueError):
    pass


def default_epsilon(inst: Instance) -> float:
    """(max - min) / 2n; 1/2n when all benefits are equal."""
    spread = float(inst.benefits.max() - inst.benefits.min())
    return (spread if spread > 0 else 1.0) / (2 * inst.n)


@dataclass
class AuctionConfig:
    epsilon: float | None = None  # None -> default_epsilon(inst)
    scaling: bool = False
    scale_factor: float = 4.0
    deadline: float | None = None  # seconds

    def __post_init__(self) -> None:
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if not self.scale_factor > 1:
            raise ValueError("scale_factor must be > 1")


def _epsilon_schedule(inst: Instance, target: float, cfg: AuctionConfig) -> list[float]:
    if not cfg.scaling:
        return [target]
    spread = float(inst.benefits.max() - inst.benefits.min())
    eps = max(spread / 2, target)
    sched = []
    while eps > target:
        sched.append(eps)
        eps /= cfg.scale_factor
    sched.append(target)
    return sched


def _complete_greedily(a: np.ndarray, agent_job: np.ndarray, job_owner: np.ndarray) -> int:
    """Give each unassigned agent (ascending) its best free job. Returns count."""
    free_jobs = job_owner < 0
    count = 0
    for i in np.flatnonzero(agent_job < 0).tolist():
        row = np.where(free_jobs, a[i], -np.inf)
        j = int(np.argmax(row))
        agent_job[i] = j
        job_owner[j] = i
        free_jobs[j] = False
        count += 1
    return count


def auction_solve(inst: Instance, cfg: AuctionConfig | None = None) -> SolveReport:
    """Synchronous (Jacobi) auction, optionally with epsilon scaling.

    Final objective is within ``n * epsilon`` of the optimum when it runs to
    completion. On a deadline the partial assignment is completed greedily
    and ``notes["completed_greedily"]`` is set.
    """
    cfg = cfg or AuctionConfig()
    t0 = time.perf_counter()
    clock = Deadline(cfg.deadline, t0)
    a = inst.benefits
    n = inst.n
    target = cfg.epsilon if cfg.epsilon is not None else default_epsilon(inst)
    schedule = _epsilon_schedule(inst, target, cfg)

    prices = np.zeros(n)
    agent_job = np.full(n, -1, dtype=np.int64)
    job_owner = np.full(n, -1, dtype=np.int64)
    rounds = displaced = phases = 0
    status = Termination.CONVERGED
    for eps in schedule:
        phases += 1
        agent_job.fill(-1)
        job_owner.fill(-1)
        while True:
            if clock.expired():
                status = Termination.DEADLINE
                break
            left, r, dsp = kernels.auction_rounds(a, prices, agent_job, job_owner, eps, _ROUND_BATCH)
            rounds += r
            displaced += dsp
            if left == 0:
                break
        if status is Termination.DEADLINE:
            break

    notes = {"epsilon": target, "phases": phases, "displacements": displaced,
             "scaling": cfg.scaling, "completed_greedily": False}
    if status is Termination.DEADLINE and (agent_job < 0).any():
        notes["greedy_completions"] = _complete_greedily(a, agent_job, job_owner)
        notes["completed_greedily"] = True
    asg = Assignment.from_tau(agent_job, inst)
    return SolveReport(
        assignment=asg,
        objective_trace=[(rounds, asg.value)],
        outer_iterations=phases,
        switches_applied=0,
        elapsed=time.perf_counter() - t0,
        terminated_by=status,
        engine="auction",
        iterations=rounds,
        notes=notes,
    )


def hungarian_solve(inst: Instance) -> SolveReport:
    """Exact maximum-benefit assignment (shortest augmenting paths, O(n^3))."""
    t0 = time.perf_counter()
    tau = kernels.hungarian_max(inst.benefits)
    asg = Assignment.from_tau(tau, inst)
    return SolveReport(
        assignment=asg,
        objective_trace=[(inst.n, asg.value)],
        outer_iterations=1,
        switches_applied=0,
        elapsed=time.perf_counter() - t0,
        terminated_by=Termination.CONVERGED,
        engine="hungarian",
        iterations=inst.n,
    )


def brute_force_solve(inst: Instance) -> SolveReport:
    """Enumerate all n! assignments. Refuses n > 10."""
    n = inst.n
    if n > BRUTE_FORCE_MAX_N:
        raise SizeGuardError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    t0 = time.perf_counter()
    a = inst.benefits
    rows = np.arange(n)
    best_val = -math.inf
    best_tau = None
    perms = itertools.permutations(range(n))
    while True:
        block = list(itertools.islice(perms, 40320))
        if not block:
            break
        taus = np.array(block, dtype=np.int64)
        vals = a[rows, taus].sum(axis=1)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val = vals[k]
            best_tau = taus[k]
    asg = Assignment.from_tau(best_tau, inst)
    return SolveReport(
        assignment=asg,
        objective_trace=[(0, asg.value)],
        outer_iterations=1,
        switches_applied=0,
        elapsed=time.perf_counter() - t0,
        terminated_by=Termination.CONVERGED,
        engine="brute",
        iterations=math.factorial(n),
    )
