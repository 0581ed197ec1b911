import numpy as np
import pytest
from hypothesis import given

from dgswitch import kernels
from dgswitch.baselines import (
    BRUTE_FORCE_MAX_N,
    AuctionConfig,
    SizeGuardError,
    auction_solve,
    brute_force_solve,
    default_epsilon,
    hungarian_solve,
)
from dgswitch.core import Instance
from dgswitch.engine import DgsConfig, Termination, dgs_sequential
from dgswitch.geom import GeomParams, generate_geom

from conftest import enumerate_optimum, instances, random_instance

SWAP2 = Instance([[0, 10], [10, 0]])


class TestAuction:
    def test_two_by_two(self):
        rep = auction_solve(SWAP2, AuctionConfig(epsilon=0.1))
        assert rep.assignment.tau.tolist() == [1, 0] and rep.objective == 20

    def test_single(self):
        rep = auction_solve(Instance([[3.0]]))
        assert rep.objective == 3.0 and rep.notes["displacements"] == 0

    def test_integer_benefits_exact(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 8))
            inst = random_instance(rng, n, integer=True, high=50)
            rep = auction_solve(inst, AuctionConfig(epsilon=0.9 / n))
            assert rep.objective == enumerate_optimum(inst)

    @given(instances(max_n=7))
    def test_epsilon_bound(self, inst):
        eps = default_epsilon(inst)
        rep = auction_solve(inst)
        rep.assignment.validate(inst)
        assert rep.objective >= hungarian_solve(inst).objective - inst.n * eps - 1e-9

    @given(instances(max_n=7))
    def test_scaling_keeps_bound(self, inst):
        eps = default_epsilon(inst)
        rep = auction_solve(inst, AuctionConfig(scaling=True))
        assert rep.objective >= hungarian_solve(inst).objective - inst.n * eps - 1e-9
        assert rep.notes["scaling"] is True

    def test_scaling_phases(self):
        inst = generate_geom(GeomParams(64, 100.0, 1))
        rep = auction_solve(inst, AuctionConfig(epsilon=0.01, scaling=True, scale_factor=4))
        assert rep.notes["phases"] > 1
        assert rep.objective >= hungarian_solve(inst).objective - 64 * 0.01 - 1e-9

    def test_prices_non_decreasing(self, rng):
        inst = random_instance(rng, 12)
        a = inst.benefits
        prices = np.zeros(12)
        aj = np.full(12, -1, dtype=np.int64)
        jo = np.full(12, -1, dtype=np.int64)
        while True:
            before = prices.copy()
            left, rounds, _ = kernels.auction_rounds(a, prices, aj, jo, 0.5, 1)
            assert np.all(prices >= before)
            if left == 0:
                break
        assert sorted(aj.tolist()) == list(range(12))

    def test_deadline_completes_greedily(self):
        inst = generate_geom(GeomParams(300, 100.0, 2))
        rep = auction_solve(inst, AuctionConfig(epsilon=1e-4, deadline=0.0))
        assert rep.terminated_by is Termination.DEADLINE
        assert rep.notes["completed_greedily"] is True
        rep.assignment.validate(inst)

    @pytest.mark.parametrize("kw", [{"epsilon": 0.0}, {"epsilon": -1.0}, {"scale_factor": 1.0}])
    def test_config_validation(self, kw):
        with pytest.raises(ValueError):
            AuctionConfig(**kw)

    def test_default_epsilon(self):
        assert default_epsilon(Instance([[0, 4], [2, 1]])) == 1.0
        assert default_epsilon(Instance(np.ones((4, 4)))) == 1 / 8


class TestHungarian:
    def test_diagonal_dominant(self):
        a = np.ones((6, 6)) + 10 * np.eye(6)
        assert hungarian_solve(Instance(a)).assignment.tau.tolist() == list(range(6))

    def test_matches_brute_force(self, rng):
        for k in range(120):
            n = 1 + k % 8
            inst = random_instance(rng, n, integer=bool(k % 2), high=30)
            assert hungarian_solve(inst).objective == pytest.approx(
                brute_force_solve(inst).objective, abs=1e-9)

    @given(instances(max_n=7))
    def test_matches_enumeration(self, inst):
        assert hungarian_solve(inst).objective == pytest.approx(enumerate_optimum(inst), abs=1e-9)

    def test_dominates_heuristics_geom_512(self):
        inst = generate_geom(GeomParams(512, 100.0, 3))
        opt = hungarian_solve(inst).objective
        assert opt >= dgs_sequential(inst, DgsConfig(seed=1)).objective - 1e-9
        assert opt >= auction_solve(inst, AuctionConfig(scaling=True)).objective - 1e-9


class TestBruteForce:
    def test_single(self):
        assert brute_force_solve(Instance([[7.0]])).assignment.tau.tolist() == [0]

    def test_two_by_two(self):
        rep = brute_force_solve(Instance([[1, 2], [3, 5]]))
        assert rep.assignment.sigma.tolist() == [0, 1] and rep.objective == 6

    def test_n8_agrees_with_hungarian(self, rng):
        inst = random_instance(rng, 8)
        assert brute_force_solve(inst).objective == pytest.approx(hungarian_solve(inst).objective, abs=1e-9)

    def test_guard(self):
        with pytest.raises(SizeGuardError):
            brute_force_solve(Instance(np.zeros((BRUTE_FORCE_MAX_N + 1,) * 2)))
