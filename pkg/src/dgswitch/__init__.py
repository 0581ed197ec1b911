"""Deep Greedy Switching solvers for the linear sum assignment problem.

Sequential and conflict-aware parallel DGS, auction and Hungarian baselines,
GEOM instance generation and a benchmark CLI.
"""

from .baselines import AuctionConfig, SizeGuardError, auction_solve, brute_force_solve, hungarian_solve
from .core import (
    Assignment,
    DeltaTables,
    ExchangeRecord,
    Instance,
    InvalidAssignmentError,
    NoOpExchangeError,
    SizeMismatchError,
    make_tau,
    objective,
    switch_exchange,
)
from .engine import DgsConfig, SolveReport, Termination, ade, dgs_sequential, initial_random, jde
from .geom import GeomParams, InstanceParseError, generate_geom, read_instance, write_instance
from .kernels import BACKEND
from .parallel import (
    ConflictSets,
    ParallelConfig,
    apply_parallel_switches,
    check_conflicts,
    dgs_parallel,
    evaluate_all_parallel,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment", "AuctionConfig", "BACKEND", "ConflictSets", "DeltaTables", "DgsConfig",
    "ExchangeRecord", "GeomParams", "Instance", "InstanceParseError", "InvalidAssignmentError",
    "NoOpExchangeError", "ParallelConfig", "SizeGuardError", "SizeMismatchError", "SolveReport",
    "Termination", "ade", "apply_parallel_switches", "auction_solve", "brute_force_solve",
    "check_conflicts", "dgs_parallel", "dgs_sequential", "evaluate_all_parallel", "generate_geom",
    "hungarian_solve", "initial_random", "jde", "make_tau", "objective", "read_instance",
    "switch_exchange", "write_instance",
]
