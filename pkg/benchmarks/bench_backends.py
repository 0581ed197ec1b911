"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_backends.py --sizes 256,1024,2048

Times each kernel on GEOM instances plus whole engine runs with every
kernel routed through one backend, and checks the results agree.
"""

from __future__ import annotations

import argparse
import contextlib
import time

import numpy as np

from dgswitch import kernels
from dgswitch.baselines import AuctionConfig, auction_solve, hungarian_solve
from dgswitch.engine import DgsConfig, SwitchState, dgs_sequential, initial_random
from dgswitch.geom import GeomParams, generate_geom
from dgswitch.parallel import ParallelConfig, dgs_parallel

KERNELS = ("eval_agents", "eval_jobs", "check_conflicts", "hungarian_max", "auction_rounds")


@contextlib.contextmanager
def use_backend(mod):
    saved = {k: getattr(kernels, k) for k in KERNELS}
    for k in KERNELS:
        setattr(kernels, k, getattr(mod, k))
    try:
        yield
    finally:
        for k, v in saved.items():
            setattr(kernels, k, v)


def best_of(fn, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def kernel_rows(n, repeats, backends):
    inst = generate_geom(GeomParams(n, 100.0, n))
    st = SwitchState(inst, initial_random(n, 1, inst))
    idx = np.arange(n, dtype=np.int64)
    rows = []
    for name, mod in backends.items():
        def evaluate():
            t = st.tables
            mod.eval_agents(st.a, st.at, st.held, st.sigma, st.tau, idx, t.agent_partner, t.agent_delta, 0.0)
            mod.eval_jobs(st.a, st.at, st.held, st.sigma, st.tau, idx, t.job_partner, t.job_delta, 0.0)
            return st.tables.copy()

        t_eval, tables = best_of(evaluate, repeats)
        t_cc, _ = best_of(lambda: mod.check_conflicts(st.sigma, tables.agent_partner, tables.job_partner),
                          repeats)
        rows.append((name, "evaluate-all", n, t_eval, tables))
        rows.append((name, "check_conflicts", n, t_cc, None))
    return rows


def engine_rows(n, backends, with_hungarian):
    inst = generate_geom(GeomParams(n, 100.0, n))
    runs = {
        "dgs-seq": lambda: dgs_sequential(inst, DgsConfig(seed=1)),
        "dgs-par": lambda: dgs_parallel(inst, ParallelConfig(seed=1, workers=4)),
        "auction(scaling)": lambda: auction_solve(inst, AuctionConfig(scaling=True)),
    }
    if with_hungarian:
        runs["hungarian"] = lambda: hungarian_solve(inst)
    rows = []
    for name, mod in backends.items():
        with use_backend(mod):
            for engine, fn in runs.items():
                rep = fn()
                rows.append((name, engine, n, rep.elapsed, rep.objective))
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="256,1024")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--hungarian-max-n", type=int, default=512,
                   help="skip the O(n^3) oracle above this size (the numpy fallback is slow)")
    args = p.parse_args(argv)
    backends = kernels.backends()
    print(f"default backend: {kernels.BACKEND}; available: {', '.join(backends)}")
    print(f"{'backend':<10} {'target':<18} {'n':>6} {'seconds':>10}  check")
    for n in (int(s) for s in args.sizes.split(",")):
        rows = kernel_rows(n, args.repeats, backends)
        ref = rows[0][4]
        for name, target, size, t, tables in rows:
            check = "" if tables is None else ("identical" if tables == ref else "DIFFERS")
            print(f"{name:<10} {target:<18} {size:>6} {t:>10.4f}  {check}")
        erows = engine_rows(n, backends, n <= args.hungarian_max_n)
        first = {}
        for name, engine, size, t, obj in erows:
            first.setdefault(engine, obj)
            check = "identical" if obj == first[engine] else "DIFFERS"
            print(f"{name:<10} {engine:<18} {size:>6} {t:>10.4f}  objective {obj:.4f} {check}")


if __name__ == "__main__":
    main()
