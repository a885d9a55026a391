import numpy as np
import pytest

from app.models.tsp import Instance
from app.services.instance_service import generate_instances
from app.services.oracle_service import (
    brute_force,
    held_karp,
    mean_gap,
    optimality_gap,
    solve,
    solve_many,
)
from app.services.tour_service import tour_cost
from app.utils.errors import InstanceTooLargeError, InvalidInputError, OracleInconsistencyError


class TestExactSolvers:
    def test_square(self, square):
        tour, length = held_karp(square)
        assert length == pytest.approx(4.0)
        assert tour_cost(square, tour.order) == pytest.approx(4.0)
        assert brute_force(square)[1] == pytest.approx(4.0)

    @pytest.mark.parametrize("n", [4, 5, 6, 7, 8])
    def test_held_karp_matches_brute_force(self, n):
        for inst in generate_instances(n, 10, seed=n):
            _, exact = brute_force(inst)
            tour, length = held_karp(inst)
            assert length == pytest.approx(exact, abs=1e-9)
            assert tour.length == pytest.approx(tour_cost(inst, tour.order), abs=1e-12)

    def test_three_nodes(self):
        inst = Instance.from_coords([[0.1, 0.2], [0.9, 0.3], [0.4, 0.8]])
        assert held_karp(inst)[1] == pytest.approx(brute_force(inst)[1], abs=1e-12)

    def test_no_random_tour_beats_optimum(self, rng):
        inst = generate_instances(9, 1, seed=30)[0]
        _, optimal = held_karp(inst)
        for _ in range(200):
            assert tour_cost(inst, rng.permutation(9)) >= optimal - 1e-9

    def test_caps(self, instance10):
        with pytest.raises(InstanceTooLargeError) as info:
            held_karp(instance10, max_nodes=8)
        assert info.value.n == 10 and info.value.cap == 8
        with pytest.raises(InstanceTooLargeError):
            brute_force(instance10, max_nodes=9)

    def test_solve_dispatch(self, instance10):
        assert solve(instance10)[1] == pytest.approx(held_karp(instance10)[1], abs=1e-9)

    def test_solve_many_threads_keep_order(self):
        instances = generate_instances(8, 6, seed=2)
        serial = solve_many(instances, threads=1)
        threaded = solve_many(instances, threads=3)
        assert serial == threaded


class TestGap:
    def test_values(self):
        assert optimality_gap(4.4, 4.0) == pytest.approx(10.0)
        assert optimality_gap(4.0, 4.0) == 0.0

    def test_tolerance_below_optimum(self):
        assert optimality_gap(4.0 - 1e-12, 4.0) == 0.0
        with pytest.raises(OracleInconsistencyError):
            optimality_gap(3.9, 4.0)
        assert optimality_gap(7542.0 - 1e-7, 7542.0) == 0.0

    def test_non_positive_optimum(self):
        with pytest.raises(InvalidInputError):
            optimality_gap(1.0, 0.0)

    def test_mean_of_per_instance_gaps(self):
        costs, optima = [1.1, 3.0], [1.0, 2.0]
        assert mean_gap(costs, optima) == pytest.approx((10.0 + 50.0) / 2)
        assert mean_gap(np.array(costs), np.array(optima)) == pytest.approx(30.0)

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            mean_gap([1.0], [1.0, 2.0])
