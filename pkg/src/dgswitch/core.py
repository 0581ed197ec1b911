"""LSAP data model: instances, assignments, 2-exchanges and delta tables.

Conventions used throughout the package:

* ``benefits[i, j]`` is the benefit of agent ``i`` working on job ``j``.
* ``sigma[j]`` is the agent holding job ``j``; ``tau[i]`` the job of agent ``i``.
* A 2-exchange ``(i, j)`` hands job ``j`` to agent ``i``; the agent that held
  ``j`` receives the job agent ``i`` gave up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "AssignmentError",
    "DeltaTables",
    "ExchangeRecord",
    "Instance",
    "InvalidAssignmentError",
    "NoOpExchangeError",
    "SizeMismatchError",
    "Assignment",
    "exchange_delta",
    "make_tau",
    "objective",
    "switch_exchange",
]


class AssignmentError(ValueError):
    """Base class for model errors."""


class SizeMismatchError(AssignmentError):
    pass


class InvalidAssignmentError(AssignmentError):
    pass


class NoOpExchangeError(AssignmentError):
    pass


class Instance:
    """Square benefit matrix. Immutable after construction."""

    def __init__(self, benefits) -> None:
        a = np.array(benefits, dtype=np.float64, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise SizeMismatchError(f"benefit matrix must be square, got shape {a.shape}")
        if a.shape[0] < 1:
            raise SizeMismatchError("instance needs at least one agent")
        if not np.all(np.isfinite(a)):
            raise ValueError("benefit matrix contains non-finite entries")
        a.setflags(write=False)
        self.benefits = np.ascontiguousarray(a)

    @property
    def n(self) -> int:
        return self.benefits.shape[0]

    @cached_property
    def benefits_t(self) -> np.ndarray:
        """Contiguous transpose; the kernels read job columns as rows of this."""
        t = np.ascontiguousarray(self.benefits.T)
        t.setflags(write=False)
        return t

    def __repr__(self) -> str:
        return f"Instance(n={self.n})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return np.array_equal(self.benefits, other.benefits)

    __hash__ = None  # type: ignore[assignment]


def _check_permutation(p: np.ndarray) -> None:
    n = p.shape[0]
    if p.ndim != 1 or n == 0:
        raise InvalidAssignmentError("permutation must be a non-empty 1-d array")
    if p.min() < 0 or p.max() >= n:
        raise InvalidAssignmentError("permutation entries out of range")
    seen = np.zeros(n, dtype=bool)
    seen[p] = True
    if not seen.all():
        raise InvalidAssignmentError("not a permutation: repeated entries")


def make_tau(sigma) -> np.ndarray:
    """Inverse permutation: ``tau[sigma[j]] = j``."""
    s = np.asarray(sigma)
    if s.dtype.kind not in "iu":
        if s.size and not np.all(np.equal(np.mod(s, 1), 0)):
            raise InvalidAssignmentError("permutation entries must be integers")
        s = s.astype(np.int64)
    s = s.astype(np.int64, copy=False)
    _check_permutation(s)
    tau = np.empty_like(s)
    tau[s] = np.arange(s.shape[0], dtype=np.int64)
    return tau


def _objective_value(benefits: np.ndarray, sigma: np.ndarray) -> float:
    # fsum: correctly rounded, so the value does not depend on summation order
    return math.fsum(benefits[sigma, np.arange(sigma.shape[0])].tolist())


@dataclass
class Assignment:
    """A bijection between jobs and agents with its cached objective value.

    Build one with :meth:`from_sigma`; the bare constructor trusts its inputs.
    """

    sigma: np.ndarray
    tau: np.ndarray
    value: float

    @classmethod
    def from_sigma(cls, sigma, inst: Instance) -> Assignment:
        s = np.array(sigma, dtype=np.int64)
        tau = make_tau(s)
        if s.shape[0] != inst.n:
            raise SizeMismatchError(f"assignment has size {s.shape[0]}, instance has {inst.n}")
        return cls(s, tau, _objective_value(inst.benefits, s))

    @classmethod
    def from_tau(cls, tau, inst: Instance) -> Assignment:
        return cls.from_sigma(make_tau(tau), inst)

    @property
    def n(self) -> int:
        return self.sigma.shape[0]

    def copy(self) -> Assignment:
        return Assignment(self.sigma.copy(), self.tau.copy(), self.value)

    def refresh(self, inst: Instance) -> None:
        """Recompute the cached value from scratch (drops incremental drift)."""
        self.value = _objective_value(inst.benefits, self.sigma)

    def validate(self, inst: Instance | None = None, tol: float = 1e-9) -> None:
        _check_permutation(self.sigma)
        if self.tau.shape != self.sigma.shape or not np.array_equal(
            self.tau[self.sigma], np.arange(self.n)
        ):
            raise InvalidAssignmentError("tau is not the inverse of sigma")
        if inst is not None:
            if inst.n != self.n:
                raise SizeMismatchError(f"assignment has size {self.n}, instance has {inst.n}")
            actual = _objective_value(inst.benefits, self.sigma)
            if abs(actual - self.value) > tol:
                raise InvalidAssignmentError(
                    f"cached value {self.value!r} differs from objective {actual!r}"
                )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Assignment):
            return NotImplemented
        return np.array_equal(self.sigma, other.sigma) and self.value == other.value


def objective(inst: Instance, asg: Assignment) -> float:
    """Total benefit ``sum_j benefits[sigma[j], j]``."""
    if asg.n != inst.n:
        raise SizeMismatchError(f"assignment has size {asg.n}, instance has {inst.n}")
    return _objective_value(inst.benefits, asg.sigma)


def exchange_delta(benefits: np.ndarray, sigma: np.ndarray, tau: np.ndarray, i: int, j: int) -> float:
    """Change in objective if agent ``i`` takes job ``j``.

    The evaluation order of the four terms is shared with the kernels so that
    guards and records agree bit for bit.
    """
    i2 = sigma[j]
    j2 = tau[i]
    return float((benefits[i, j] + benefits[i2, j2]) - (benefits[i, j2] + benefits[i2, j]))


def switch_exchange(i: int, j: int, asg: Assignment, inst: Instance) -> Assignment:
    """Return a new assignment where agent ``i`` holds job ``j``.

    The agent that held ``j`` takes over agent ``i``'s former job. The input
    assignment is left untouched.
    """
    n = inst.n
    if asg.n != n:
        raise SizeMismatchError(f"assignment has size {asg.n}, instance has {n}")
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"exchange ({i}, {j}) out of range for n={n}")
    j2 = int(asg.tau[i])
    if j2 == j:
        raise NoOpExchangeError(f"agent {i} already holds job {j}")
    i2 = int(asg.sigma[j])
    delta = exchange_delta(inst.benefits, asg.sigma, asg.tau, i, j)
    out = asg.copy()
    out.sigma[j] = i
    out.sigma[j2] = i2
    out.tau[i] = j
    out.tau[i2] = j2
    out.value = asg.value + delta
    return out


@dataclass(frozen=True)
class ExchangeRecord:
    """Best candidate 2-exchange found for one agent or one job.

    ``partner`` is the job an agent wants to take over, or the agent a job
    wants to be handed to. Inactive records carry ``partner=None`` and zero
    improvement.
    """

    partner: int | None
    delta: float
    active: bool

    def __post_init__(self) -> None:
        if self.active and not (self.delta > 0 and self.partner is not None):
            raise ValueError("active record needs a partner and a positive delta")
        if not self.active and self.delta != 0:
            raise ValueError("inactive record must have zero delta")


@dataclass
class DeltaTables:
    """Per-agent and per-job best exchanges, stored column-wise.

    ``agent_partner[i]`` / ``agent_delta[i]`` hold the record for agent ``i``;
    ``job_partner[j]`` / ``job_delta[j]`` for job ``j``. A partner of ``-1``
    marks an inactive record. Distinct indices may be written concurrently.
    """

    agent_partner: np.ndarray
    agent_delta: np.ndarray
    job_partner: np.ndarray
    job_delta: np.ndarray
    n: int = field(init=False)

    def __post_init__(self) -> None:
        self.n = self.agent_partner.shape[0]
        for arr in (self.agent_delta, self.job_partner, self.job_delta):
            if arr.shape[0] != self.n:
                raise SizeMismatchError("delta table columns must all have length n")

    @classmethod
    def empty(cls, n: int) -> DeltaTables:
        return cls(
            np.full(n, -1, dtype=np.int64),
            np.zeros(n, dtype=np.float64),
            np.full(n, -1, dtype=np.int64),
            np.zeros(n, dtype=np.float64),
        )

    def clear(self) -> None:
        self.agent_partner.fill(-1)
        self.agent_delta.fill(0.0)
        self.job_partner.fill(-1)
        self.job_delta.fill(0.0)

    def agent_record(self, i: int) -> ExchangeRecord:
        p = int(self.agent_partner[i])
        return ExchangeRecord(None if p < 0 else p, float(self.agent_delta[i]), p >= 0)

    def job_record(self, j: int) -> ExchangeRecord:
        p = int(self.job_partner[j])
        return ExchangeRecord(None if p < 0 else p, float(self.job_delta[j]), p >= 0)

    @property
    def agent_records(self) -> list[ExchangeRecord]:
        return [self.agent_record(i) for i in range(self.n)]

    @property
    def job_records(self) -> list[ExchangeRecord]:
        return [self.job_record(j) for j in range(self.n)]

    def zero_agent(self, i: int) -> None:
        self.agent_partner[i] = -1
        self.agent_delta[i] = 0.0

    def zero_job(self, j: int) -> None:
        self.job_partner[j] = -1
        self.job_delta[j] = 0.0

    def any_active(self) -> bool:
        return bool((self.agent_partner >= 0).any() or (self.job_partner >= 0).any())

    def copy(self) -> DeltaTables:
        return DeltaTables(
            self.agent_partner.copy(),
            self.agent_delta.copy(),
            self.job_partner.copy(),
            self.job_delta.copy(),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DeltaTables):
            return NotImplemented
        return (
            np.array_equal(self.agent_partner, other.agent_partner)
            and np.array_equal(self.agent_delta, other.agent_delta)
            and np.array_equal(self.job_partner, other.job_partner)
            and np.array_equal(self.job_delta, other.job_delta)
        )
