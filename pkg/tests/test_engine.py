import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dgswitch.baselines import brute_force_solve
from dgswitch.core import Assignment, DeltaTables, Instance, exchange_delta, objective, switch_exchange
from dgswitch.engine import (
    TRACE_CAP,
    DgsConfig,
    Termination,
    Trace,
    ade,
    dgs_sequential,
    initial_random,
    jde,
)
from dgswitch.geom import GeomParams, generate_geom

from conftest import enumerate_optimum, instance_and_perm, instances, random_instance

SWAP2 = Instance([[0, 10], [10, 0]])


def _ref_ade(inst, asg, i):
    """Row scan oracle built from the pure switch primitive."""
    best, arg = 0.0, None
    for j in range(inst.n):
        if j == asg.tau[i]:
            continue
        d = switch_exchange(i, j, asg, inst).value - asg.value
        if d > best:
            best, arg = d, j
    return arg, best


def _ref_jde(inst, asg, j):
    best, arg = 0.0, None
    for i in range(inst.n):
        if i == asg.sigma[j]:
            continue
        d = switch_exchange(i, j, asg, inst).value - asg.value
        if d > best:
            best, arg = d, i
    return arg, best


class TestInitialRandom:
    def test_single(self):
        asg = initial_random(1, 99)
        assert asg.sigma.tolist() == [0] and asg.tau.tolist() == [0]

    def test_deterministic(self):
        assert initial_random(50, 3).sigma.tolist() == initial_random(50, 3).sigma.tolist()

    def test_value_computed(self, rng):
        inst = random_instance(rng, 7)
        asg = initial_random(7, 11, inst)
        asg.validate(inst)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            initial_random(0, 1)

    def test_uniform_position_frequencies(self):
        draws = 10_000
        counts = np.zeros((5, 5), dtype=int)
        for s in range(draws):
            counts[np.arange(5), initial_random(5, s).sigma] += 1
        mean = draws / 5
        sd = np.sqrt(draws * 0.2 * 0.8)
        assert np.all(np.abs(counts - mean) <= 5 * sd)


class TestDifferenceEvaluation:
    def test_ade_two_by_two(self):
        t = DeltaTables.empty(2)
        asg = Assignment.from_sigma([0, 1], SWAP2)
        ade(0, SWAP2, asg, t)
        assert (t.agent_record(0).partner, t.agent_record(0).delta) == (1, 20.0)

    def test_jde_two_by_two(self):
        t = DeltaTables.empty(2)
        asg = Assignment.from_sigma([0, 1], SWAP2)
        jde(0, SWAP2, asg, t)
        assert (t.job_record(0).partner, t.job_record(0).delta) == (1, 20.0)

    def test_diagonal_dominant_inactive(self):
        inst = Instance([[5, 1, 1], [1, 5, 1], [1, 1, 5]])
        asg = Assignment.from_sigma([0, 1, 2], inst)
        t = DeltaTables.empty(3)
        for i in range(3):
            ade(i, inst, asg, t)
            assert not t.agent_record(i).active and t.agent_record(i).delta == 0

    def test_all_equal_inactive(self):
        inst = Instance(np.full((5, 5), 3.25))
        asg = initial_random(5, 4, inst)
        t = DeltaTables.empty(5)
        for k in range(5):
            ade(k, inst, asg, t)
            jde(k, inst, asg, t)
        assert not t.any_active()

    def test_ade_does_not_mutate(self, rng):
        inst = random_instance(rng, 6)
        asg = initial_random(6, 2, inst)
        before = asg.copy()
        ade(3, inst, asg, DeltaTables.empty(6))
        assert asg == before

    def test_ties_go_to_smallest_index(self):
        # agent 0 gains 2 by taking job 1 or job 2
        inst = Instance([[0, 1, 1], [0, 0, 0], [0, 0, 0]])
        asg = Assignment.from_sigma([0, 1, 2], inst)
        t = DeltaTables.empty(3)
        ade(0, inst, asg, t)
        jde(0, inst, asg, t)
        assert t.agent_record(0).partner == 1
        assert t.job_record(1).partner is None or t.job_record(1).partner == 0

    @given(instance_and_perm(max_n=6))
    def test_ade_and_jde_match_row_scan(self, pair):
        inst, sigma = pair
        asg = Assignment.from_sigma(sigma, inst)
        t = DeltaTables.empty(inst.n)
        for k in range(inst.n):
            ade(k, inst, asg, t)
            jde(k, inst, asg, t)
            arg, best = _ref_ade(inst, asg, k)
            assert t.agent_record(k).delta == pytest.approx(best, abs=1e-9)
            arg, best = _ref_jde(inst, asg, k)
            assert t.job_record(k).delta == pytest.approx(best, abs=1e-9)

    def test_n6_random_rows(self, rng):
        for _ in range(30):
            inst = random_instance(rng, 6)
            asg = Assignment.from_sigma(rng.permutation(6), inst)
            t = DeltaTables.empty(6)
            for i in range(6):
                ade(i, inst, asg, t)
                assert t.agent_record(i).delta == pytest.approx(_ref_ade(inst, asg, i)[1], abs=1e-9)

    @given(instances(max_n=6))
    def test_symmetric_jde_equals_ade(self, inst):
        a = inst.benefits
        sym = Instance(np.triu(a) + np.triu(a, 1).T)
        asg = Assignment.from_sigma(np.arange(sym.n), sym)
        t = DeltaTables.empty(sym.n)
        for j in range(sym.n):
            jde(j, sym, asg, t)
            ade(int(asg.sigma[j]), sym, asg, t)
            assert t.job_record(j).delta == t.agent_record(int(asg.sigma[j])).delta

    @given(instance_and_perm(max_n=6))
    def test_fresh_record_delta_is_exact(self, pair):
        inst, sigma = pair
        asg = Assignment.from_sigma(sigma, inst)
        t = DeltaTables.empty(inst.n)
        for i in range(inst.n):
            ade(i, inst, asg, t)
            rec = t.agent_record(i)
            if rec.active:
                assert rec.delta == exchange_delta(inst.benefits, asg.sigma, asg.tau, i, rec.partner)


def _reference_dgs(inst, asg):
    """Straight transcription of the greedy switching loop on pure primitives."""
    n = inst.n
    while True:
        start = asg.value
        switched = False
        ag = [_ref_ade_exact(inst, asg, i) for i in range(n)]
        jb = [_ref_jde_exact(inst, asg, j) for j in range(n)]
        while True:
            i_star = max(range(n), key=lambda k: (ag[k][1], -k))
            j_star = max(range(n), key=lambda k: (jb[k][1], -k))
            if ag[i_star][1] <= 0 and jb[j_star][1] <= 0:
                break
            if ag[i_star][1] >= jb[j_star][1]:
                i, j = i_star, ag[i_star][0]
                ag[i_star] = (None, 0.0)
            else:
                i, j = jb[j_star][0], j_star
                jb[j_star] = (None, 0.0)
            if asg.tau[i] == j:
                continue
            cand = switch_exchange(i, j, asg, inst)
            if cand.value > asg.value:
                i2, j2 = int(asg.sigma[j]), int(asg.tau[i])
                asg = cand
                switched = True
                for k in (i, i2):
                    ag[k] = _ref_ade_exact(inst, asg, k)
                for k in (j2, j):
                    jb[k] = _ref_jde_exact(inst, asg, k)
        if not switched or asg.value == start:
            return asg


def _ref_ade_exact(inst, asg, i):
    best, arg = 0.0, None
    for j in range(inst.n):
        if j != asg.tau[i]:
            d = exchange_delta(inst.benefits, asg.sigma, asg.tau, i, j)
            if d > best:
                best, arg = d, j
    return arg, best


def _ref_jde_exact(inst, asg, j):
    best, arg = 0.0, None
    for i in range(inst.n):
        if i != asg.sigma[j]:
            d = exchange_delta(inst.benefits, asg.sigma, asg.tau, i, j)
            if d > best:
                best, arg = d, i
    return arg, best


class TestSequential:
    @pytest.mark.parametrize("seed", range(5))
    def test_two_by_two_optimal(self, seed):
        assert dgs_sequential(SWAP2, DgsConfig(seed=seed)).objective == 20

    def test_single_agent(self):
        rep = dgs_sequential(Instance([[4.0]]))
        assert rep.objective == 4.0 and rep.terminated_by is Termination.CONVERGED

    def _small_suite(self, rng):
        for k in range(50):
            inst = random_instance(rng, int(rng.integers(2, 8)))
            yield inst, enumerate_optimum(inst), dgs_sequential(inst, DgsConfig(seed=k)).assignment

    def test_small_instances_mostly_exact(self, rng):
        exact = sum(abs(asg.value - opt) <= 1e-9 for _, opt, asg in self._small_suite(rng))
        assert exact >= 35

    def test_small_instances_within_one_percent(self, rng):
        shortfalls = []
        for inst, opt, asg in self._small_suite(rng):
            t = DeltaTables.empty(inst.n)
            for k in range(inst.n):
                ade(k, inst, asg, t)
                jde(k, inst, asg, t)
            assert not t.any_active()  # every result is a 2-exchange local optimum
            if asg.value < 0.99 * opt - 1e-9:
                shortfalls.append(round(asg.value / opt, 4))
        assert not shortfalls, f"local optima below 0.99 x optimum: {shortfalls}"

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_reference_transcription(self, rng, seed):
        for n in (3, 5, 8, 12):
            inst = random_instance(rng, n, integer=True, high=20)
            start = initial_random(n, seed, inst)
            ref = _reference_dgs(inst, start.copy())
            got = dgs_sequential(inst, DgsConfig(seed=seed))
            assert got.assignment.sigma.tolist() == ref.sigma.tolist()

    def test_zero_deadline_returns_initial(self, rng):
        inst = random_instance(rng, 30)
        rep = dgs_sequential(inst, DgsConfig(seed=9, deadline=0.0))
        assert rep.terminated_by is Termination.DEADLINE
        assert rep.assignment == initial_random(30, 9, inst)
        rep.assignment.validate(inst)

    def test_initial_argument(self, rng):
        inst = random_instance(rng, 10)
        start = Assignment.from_sigma(np.arange(10), inst)
        rep = dgs_sequential(inst, DgsConfig(deadline=0.0), initial=start)
        assert rep.assignment == start

    @given(instances(min_n=1, max_n=9), st.integers(0, 2**32))
    def test_trace_monotone_and_terminates(self, inst, seed):
        rep = dgs_sequential(inst, DgsConfig(seed=seed))
        vals = [v for _, v in rep.objective_trace]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert rep.terminated_by is Termination.CONVERGED
        assert rep.switches_applied == len(vals) - 1
        rep.assignment.validate(inst, tol=1e-6)

    def test_terminates_up_to_64(self, rng):
        for n in (16, 32, 48, 64):
            for s in range(3):
                rep = dgs_sequential(random_instance(rng, n), DgsConfig(seed=s))
                assert rep.terminated_by is Termination.CONVERGED

    def test_local_optimum_on_exit(self, rng):
        inst = random_instance(rng, 20)
        asg = dgs_sequential(inst, DgsConfig(seed=4)).assignment
        t = DeltaTables.empty(20)
        for k in range(20):
            ade(k, inst, asg, t)
            jde(k, inst, asg, t)
        assert not t.any_active()

    @pytest.mark.parametrize("factor", [0.25, 2.0, 8.0, 1024.0])
    def test_scale_invariance(self, factor):
        inst = generate_geom(GeomParams(48, 100.0, 6))
        scaled = Instance(inst.benefits * factor)
        a = dgs_sequential(inst, DgsConfig(seed=5))
        b = dgs_sequential(scaled, DgsConfig(seed=5))
        assert a.assignment.sigma.tolist() == b.assignment.sigma.tolist()
        assert [(k, v * factor) for k, v in a.objective_trace] == b.objective_trace

    def test_seed_determinism(self):
        inst = generate_geom(GeomParams(80, 100.0, 3))
        a = dgs_sequential(inst, DgsConfig(seed=12))
        b = dgs_sequential(inst, DgsConfig(seed=12))
        a.elapsed = b.elapsed = 0.0
        assert a == b

    def test_improvement_epsilon_stops_early(self, rng):
        inst = random_instance(rng, 30)
        strict = dgs_sequential(inst, DgsConfig(seed=1))
        loose = dgs_sequential(inst, DgsConfig(seed=1, improvement_epsilon=1e9))
        assert loose.switches_applied == 0
        assert strict.objective >= loose.objective

    def test_config_validation(self):
        with pytest.raises(ValueError):
            DgsConfig(improvement_epsilon=-1.0)
        with pytest.raises(ValueError):
            DgsConfig(deadline=-0.1)

    def test_brute_is_upper_bound(self, rng):
        inst = random_instance(rng, 7)
        assert dgs_sequential(inst).objective <= brute_force_solve(inst).objective + 1e-9


def test_trace_cap_switches_to_per_pass():
    t = Trace(cap=3)
    for k in range(5):
        t.commit(k, float(k))
    assert len(t.points) == 3
    t.end_pass(9, 9.0)
    t.end_pass(9, 9.0)
    assert t.points[-1] == (9, 9.0) and len(t.points) == 4
    assert TRACE_CAP == 100_000


@pytest.mark.parametrize("engine", ["seq", "par"])
def test_anytime_interrupts_mid_run(engine):
    from dgswitch.parallel import ParallelConfig, dgs_parallel

    inst = generate_geom(GeomParams(2048, 100.0, 5))

    def run(deadline):
        if engine == "seq":
            return dgs_sequential(inst, DgsConfig(seed=1, deadline=deadline))
        return dgs_parallel(inst, ParallelConfig(seed=1, deadline=deadline))

    reps = [run(d) for d in (0.0, 0.15, 0.4, None)]
    vals = [r.objective for r in reps]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert reps[1].terminated_by is Termination.DEADLINE and reps[1].switches_applied > 0
    assert reps[-1].terminated_by is Termination.CONVERGED
    assert vals[0] < vals[1] <= vals[-1]
    for r in reps:
        r.assignment.validate(inst)
