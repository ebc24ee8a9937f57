import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relu_entropy.errors import DomainError, PreconditionError, ResourceError
from relu_entropy.pwl import (
    PwlFunction,
    build_packing,
    dump_packing_csv,
    exact_min_pairwise_l1,
    exact_pair_distance,
    l1_distance,
    linf_distance,
    packing_log_lower_bound,
)


def pwl(values):
    n = len(values) - 1
    return PwlFunction(
        breakpoints=tuple(i / n for i in range(n + 1)), values=tuple(values)
    )


def exact_l1_reference(f, g):
    """Independent exact L^1 distance: merge breakpoints, integrate the
    absolute difference of the two linear pieces with rational arithmetic."""
    xs = sorted({Fraction(x) for x in f.breakpoints} | {Fraction(x) for x in g.breakpoints})

    def value_at(h, x):
        bps = [Fraction(b) for b in h.breakpoints]
        vals = [Fraction(v) for v in h.values]
        for i in range(len(bps) - 1):
            if bps[i] <= x <= bps[i + 1]:
                t = (x - bps[i]) / (bps[i + 1] - bps[i])
                return vals[i] + t * (vals[i + 1] - vals[i])
        raise AssertionError("x outside support")

    total = Fraction(0)
    for x0, x1 in zip(xs, xs[1:]):
        u = value_at(f, x0) - value_at(g, x0)
        v = value_at(f, x1) - value_at(g, x1)
        w = x1 - x0
        if u * v >= 0:
            total += w * (abs(u) + abs(v)) / 2
        else:
            total += w * (u * u + v * v) / (2 * abs(u - v))
    return total


class TestPwlFunction:
    def test_breakpoints_must_increase(self):
        with pytest.raises(DomainError):
            PwlFunction(breakpoints=(0.0, 0.5, 0.5, 1.0), values=(0, 0, 0, 0))

    def test_range_checked(self):
        with pytest.raises(DomainError):
            PwlFunction(breakpoints=(0.0, 1.5), values=(0.0, 0.0))

    def test_interpolation(self):
        f = pwl([0.0, 1.0, 0.0])
        assert f(0.25) == 0.5
        assert f(0.5) == 1.0
        assert f(1.0) == 0.0

    def test_sup_norm_and_scale(self):
        f = pwl([0.0, -2.0, 1.0])
        assert f.sup_norm() == 2.0
        g = f.scale(0.5)
        assert g.sup_norm() == 1.0
        assert g(0.5) == -1.0


class TestDistances:
    def test_l1_same_sign_trapezoid(self):
        f = pwl([0.0, 1.0])
        g = pwl([0.0, 0.0])
        assert l1_distance(f, g) == 0.5

    def test_l1_crossing_segment(self):
        # difference goes 1 -> -1 linearly: two triangles of area 1/4 each
        f = PwlFunction(breakpoints=(0.0, 1.0), values=(1.0, -1.0))
        g = PwlFunction(breakpoints=(0.0, 1.0), values=(0.0, 0.0))
        assert l1_distance(f, g) == 0.5

    def test_merged_breakpoints(self):
        f = PwlFunction(breakpoints=(0.0, 0.25, 1.0), values=(0.0, 1.0, 0.0))
        g = PwlFunction(breakpoints=(0.0, 0.75, 1.0), values=(0.0, 1.0, 0.0))
        d = l1_distance(f, g)
        assert d == pytest.approx(float(exact_l1_reference(f, g)), abs=1e-14)

    def test_linf(self):
        f = pwl([0.0, 1.0, 0.0])
        g = pwl([0.0, 0.0, 0.0])
        assert linf_distance(f, g) == 1.0

    def test_symmetry_and_identity(self):
        f = pwl([0.0, 0.5, -0.25])
        g = pwl([0.25, 0.0, 0.25])
        assert l1_distance(f, g) == l1_distance(g, f)
        assert l1_distance(f, f) == 0.0

    @settings(max_examples=40, deadline=None)
    @given(
        fv=st.lists(st.floats(-1, 1, allow_nan=False), min_size=3, max_size=6),
        gv=st.lists(st.floats(-1, 1, allow_nan=False), min_size=3, max_size=6),
    )
    def test_float_matches_exact(self, fv, gv):
        f, g = pwl(fv), pwl(gv)
        assert l1_distance(f, g) == pytest.approx(float(exact_l1_reference(f, g)), abs=1e-12)


class TestPacking:
    def test_level_golden(self):
        # N=3, E=8, eps=1/6: M = ceil(8 / (4 * (1/6) * 3)) = 4 -> log2 lower 6
        assert packing_log_lower_bound(3, 8.0, 1 / 6) == 6.0
        # N=1, E=1, eps=1/8: M = ceil(2) = 2 -> 1 bit
        assert packing_log_lower_bound(1, 1.0, 1 / 8) == 1.0

    def test_build_golden_small(self):
        grid = build_packing(2, 1.0, 1 / 16)
        assert grid.M == 2
        assert grid.cardinality() == 9
        assert grid.certificate_count() == 4
        assert grid.min_distance_bound() == 1.0 / 8.0
        exact = exact_min_pairwise_l1(grid)
        assert exact == Fraction(1, 8)
        # grid-level exact distances agree with the independent reference
        for i in range(4):
            for j in range(i + 1, 4):
                want = exact_l1_reference(grid.functions[i], grid.functions[j])
                assert exact_pair_distance(grid, i, j) == want

    def test_members_start_at_zero(self):
        grid = build_packing(3, 1.0, 1 / 16)
        for f in grid.functions:
            assert f(0.0) == 0.0
            assert f.sup_norm() <= 1.0

    def test_trivial_flag(self):
        grid = build_packing(2, 1.0, 10.0)
        assert grid.trivial
        assert grid.M <= 1

    def test_resource_cap(self):
        with pytest.raises(ResourceError) as exc:
            build_packing(8, 8.0, 1 / 64, cap=100)
        assert exc.value.count > 100

    def test_distance_certificate_exhaustive(self):
        # all pairs at N=3, M=3: 4^3 = 64 members
        grid = build_packing(3, 1.0, 1 / 36)
        assert grid.M == 3
        bound = Fraction(1) / (2 * 3 * 3)
        exact = exact_min_pairwise_l1(grid)
        assert exact >= bound
        assert exact == bound

    def test_csv_dump(self):
        grid = build_packing(2, 1.0, 1 / 16)
        text = dump_packing_csv(grid)
        lines = text.strip().splitlines()
        assert lines[0].startswith("node_0")
        assert len(lines) == 1 + grid.cardinality()

    def test_eps_domain(self):
        with pytest.raises(DomainError):
            build_packing(2, 1.0, 0.0)
        with pytest.raises(PreconditionError):
            build_packing(0, 1.0, 0.5)
