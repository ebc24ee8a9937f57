"""Exhaustive-family counting, function clouds, and the greedy
covering/packing estimators."""

import math

import numpy as np
import pytest

from relu_entropy.errors import DomainError, PreconditionError, ResourceError
from relu_entropy.network import FamilySpec, FiniteSet, GridFunction
from relu_entropy.oracle import (
    arch_slots,
    cloud_from_configs,
    cloud_from_grid_functions,
    cloud_from_pwl,
    count_configs,
    dedup_realizations,
    entropy_sandwich,
    enumerate_configs,
    greedy_covering,
    greedy_packing,
    iter_architectures,
    stream_count_configs,
)
from relu_entropy.pwl import PwlFunction


def spec_pm1():
    return FamilySpec(d=1, W=1, L=2, domain=FiniteSet((-1.0, 1.0)))


def random_cloud(seed, n=40, m=33):
    rng = np.random.default_rng(seed)
    fns = [GridFunction(1, m, rng.uniform(-1.0, 1.0, m)) for _ in range(n)]
    return cloud_from_grid_functions(fns)


class TestArchitectures:
    def test_depth_one_is_affine_only(self):
        archs = list(iter_architectures(FamilySpec(d=2, W=3, L=1,
                                                   domain=FiniteSet((1.0,)))))
        assert archs == [(2, 1)]

    def test_window_sizes(self):
        archs = list(iter_architectures(spec_pm1()))
        # depth 1 plus one hidden layer of width 1
        assert archs == [(1, 1), (1, 1, 1)]

    def test_arch_slots(self):
        # (1, 1): 1*1 + 1 = 2; (1, 1, 1): (1+1) + (1+1) = 4
        assert arch_slots((1, 1)) == 2
        assert arch_slots((1, 1, 1)) == 4
        # (2, 3, 1): (3*2+3) + (1*3+1) = 13
        assert arch_slots((2, 3, 1)) == 13


class TestCounts:
    def test_pm1_family_golden(self):
        spec = spec_pm1()
        assert count_configs(spec) == 20
        assert stream_count_configs(spec) == 20
        configs, n = enumerate_configs(spec)
        assert n == 20 and len(configs) == 20

    @pytest.mark.parametrize("values,W,L,s", [
        ((-1.0, 1.0), 2, 2, math.inf),
        ((-1.0, 0.0, 1.0), 1, 2, math.inf),
        ((-1.0, 0.0, 1.0), 2, 2, 3),
        ((-1.0, 0.0, 1.0), 1, 3, 2),
    ])
    def test_analytic_matches_stream(self, values, W, L, s):
        spec = FamilySpec(d=1, W=W, L=L, s=s, domain=FiniteSet(values))
        assert count_configs(spec) == stream_count_configs(spec)

    def test_affine_count_is_power(self):
        spec = FamilySpec(d=1, W=1, L=1, domain=FiniteSet((-1.0, 0.0, 1.0)))
        assert count_configs(spec) == 9

    def test_requires_finite_weight_set(self):
        from relu_entropy.network import Interval
        spec = FamilySpec(d=1, W=1, L=2, domain=Interval(1.0))
        with pytest.raises(PreconditionError):
            count_configs(spec)


class TestEnumerate:
    def test_members_distinct_and_in_family(self):
        spec = spec_pm1()
        configs, _ = enumerate_configs(spec)
        from relu_entropy.network import config_to_json
        jsons = {config_to_json(c) for c in configs}
        assert len(jsons) == len(configs)
        assert all(spec.contains(c) for c in configs)

    def test_budget_filter(self):
        free = FamilySpec(d=1, W=2, L=2, domain=FiniteSet((-1.0, 0.0, 1.0)))
        tight = FamilySpec(d=1, W=2, L=2, s=2,
                           domain=FiniteSet((-1.0, 0.0, 1.0)))
        _, n_free = enumerate_configs(free)
        configs, n_tight = enumerate_configs(tight)
        assert n_tight < n_free
        assert all(c.connectivity <= 2 for c in configs)
        assert n_tight == count_configs(tight)

    def test_cap_error_carries_exact_count(self):
        spec = FamilySpec(d=1, W=2, L=2, domain=FiniteSet((-1.0, 0.0, 1.0)))
        with pytest.raises(ResourceError) as ei:
            enumerate_configs(spec, cap=100)
        assert ei.value.count == count_configs(spec)
        assert ei.value.budget == 100


class TestClouds:
    def test_from_configs_provenance_aligned(self):
        configs, _ = enumerate_configs(spec_pm1())
        cloud = cloud_from_configs(configs, m=17)
        assert len(cloud) == 20
        assert cloud.kind == "grid"
        assert len(cloud.provenance) == 20
        from relu_entropy.network import evaluate
        for cfg, fn in zip(cloud.provenance, cloud.members):
            assert fn.values[0] == pytest.approx(evaluate(cfg, np.array([0.0])))

    def test_mixed_grids_rejected(self):
        a = GridFunction(1, 5, np.zeros(5))
        b = GridFunction(1, 9, np.zeros(9))
        with pytest.raises(DomainError):
            cloud_from_grid_functions([a, b])

    def test_pwl_cloud_distance_orders(self):
        zero = PwlFunction((0.0, 1.0), (0.0, 0.0))
        ident = PwlFunction((0.0, 1.0), (0.0, 1.0))
        cloud = cloud_from_pwl([ident, zero])
        # sorted by node data: zero first
        assert cloud.members[0].values == (0.0, 0.0)
        assert cloud.distance(0, 1) == pytest.approx(0.5)
        assert cloud.distance(0, 1, math.inf) == pytest.approx(1.0)
        with pytest.raises(DomainError):
            cloud.distance(0, 1, p=2.0)

    def test_subset_keeps_alignment(self):
        cloud = random_cloud(0)
        sub = cloud.subset([3, 7])
        assert len(sub) == 2
        assert np.array_equal(sub.members[0].values, cloud.members[3].values)


class TestDedup:
    def test_pm1_realization_classes_golden(self):
        configs, _ = enumerate_configs(spec_pm1())
        cloud = dedup_realizations(cloud_from_configs(configs))
        assert len(cloud) == 12

    def test_idempotent(self):
        configs, _ = enumerate_configs(spec_pm1())
        once = dedup_realizations(cloud_from_configs(configs))
        twice = dedup_realizations(once)
        assert len(twice) == len(once)

    def test_exact_duplicates_collapse(self):
        f = GridFunction(1, 5, np.arange(5.0))
        g = GridFunction(1, 5, np.arange(5.0))
        cloud = cloud_from_grid_functions([f, g])
        assert len(dedup_realizations(cloud)) == 1

    def test_negative_tol_rejected(self):
        with pytest.raises(PreconditionError):
            dedup_realizations(random_cloud(1), tol=-1e-9)


class TestGreedy:
    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("eps", [0.1, 0.3])
    def test_packing_is_separated_and_maximal(self, seed, eps):
        cloud = random_cloud(seed)
        kept = greedy_packing(cloud, eps)
        for a in range(len(kept)):
            for b in range(a + 1, len(kept)):
                assert cloud.distance(kept[a], kept[b]) > eps
        # maximality: every member sits within eps of something kept
        for i in range(len(cloud)):
            assert min(cloud.distance(i, j) for j in kept) <= eps

    @pytest.mark.parametrize("seed", range(5))
    def test_covering_covers(self, seed):
        cloud = random_cloud(seed)
        centers = greedy_covering(cloud, 0.2)
        for i in range(len(cloud)):
            assert min(cloud.distance(i, c) for c in centers) <= 0.2

    def test_covering_no_larger_than_packing_upper(self):
        cloud = random_cloud(11)
        assert len(greedy_covering(cloud, 0.2)) <= len(greedy_packing(cloud, 0.2))

    def test_negative_eps_rejected(self):
        with pytest.raises(PreconditionError):
            greedy_packing(random_cloud(2), -0.1)
        with pytest.raises(PreconditionError):
            greedy_covering(random_cloud(2), -0.1)


class TestSandwich:
    def test_three_line_golden(self):
        fns = [
            PwlFunction((0.0, 1.0), (0.0, 0.0)),
            PwlFunction((0.0, 1.0), (0.0, 1.0)),
            PwlFunction((0.0, 1.0), (0.0, 2.0)),
        ]
        cloud = cloud_from_pwl(fns)
        assert entropy_sandwich(cloud, 0.4) == (2, 3)

    @pytest.mark.parametrize("seed", range(20))
    def test_lower_never_exceeds_upper(self, seed):
        cloud = random_cloud(seed, n=30, m=17)
        for eps in (0.05, 0.2, 0.5):
            lower, upper = entropy_sandwich(cloud, eps)
            assert 1 <= lower <= upper <= len(cloud)

    def test_zero_eps_rejected(self):
        with pytest.raises(PreconditionError):
            entropy_sandwich(random_cloud(3), 0.0)
