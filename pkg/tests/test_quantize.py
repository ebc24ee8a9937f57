import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relu_entropy.errors import DomainError, PreconditionError
from relu_entropy.network import FamilySpec, NetworkConfig, evaluate_batch, random_config
from relu_entropy.quantize import (
    QuantSpec,
    perturbation_bound,
    precision_for_radius,
    quantize_network,
    quantize_scalar,
    verify_covering_property,
)


class TestScalar:
    def test_round_toward_zero_goldens(self):
        # b=1: grid step 1/2; 0.74 -> 0.5, -0.74 -> -0.5
        assert quantize_scalar(0.74, QuantSpec(B=1.0, b=1)) == 0.5
        assert quantize_scalar(-0.74, QuantSpec(B=1.0, b=1)) == -0.5
        # b=0: integers; 3.2 -> 3
        assert quantize_scalar(3.2, QuantSpec(B=4.0, b=0)) == 3.0
        # b=3: step 1/8; 10.125 is on the grid already
        assert quantize_scalar(10.125, QuantSpec(B=16.0, b=3)) == 10.125

    def test_magnitude_domain_error(self):
        with pytest.raises(DomainError):
            quantize_scalar(1.5, QuantSpec(B=1.0, b=4))

    def test_grid_membership_exact(self):
        spec = QuantSpec(B=1.0, b=5)
        for x in np.linspace(-1, 1, 257):
            q = quantize_scalar(float(x), spec)
            frac = Fraction(q).limit_denominator(1 << 60)
            assert frac == Fraction(q)
            assert (Fraction(q) * 2**5).denominator == 1
            assert abs(q) <= abs(x) or math.isclose(abs(q), abs(x))

    @settings(max_examples=60, deadline=None)
    @given(
        x=st.floats(-8, 8, allow_nan=False),
        b=st.integers(0, 20),
    )
    def test_error_below_step_and_toward_zero(self, x, b):
        spec = QuantSpec(B=8.0, b=b)
        q = quantize_scalar(x, spec)
        assert abs(q - x) < 2.0 ** (-b)
        assert abs(q) <= abs(x)
        assert q == 0 or math.copysign(1, q) == math.copysign(1, x)


class TestNetwork:
    def test_quantize_network_matches_scalar(self):
        cfg = random_config(5, d=2, width=3, depth=3, magnitude=1.0)
        spec = QuantSpec(B=1.0, b=4)
        qcfg = quantize_network(cfg, spec)
        for (A, b_), (qA, qb) in zip(cfg.layers, qcfg.layers):
            for x, q in zip(A.ravel(), qA.ravel()):
                assert q == quantize_scalar(float(x), spec)
            for x, q in zip(b_, qb):
                assert q == quantize_scalar(float(x), spec)

    def test_idempotent(self):
        cfg = random_config(6, d=1, width=3, depth=2, magnitude=1.0)
        spec = QuantSpec(B=1.0, b=6)
        once = quantize_network(cfg, spec)
        twice = quantize_network(once, spec)
        assert once == twice


class TestBounds:
    def test_perturbation_formula(self):
        # L (W+1)^L B^(L-1) delta
        assert perturbation_bound(3, 2, 2.0, 0.5) == 2 * 4**2 * 2 * 0.5

    def test_precision_goldens(self):
        # L=2, W=3, B=1: L(W+1)^L B = 32; eps 1/64 -> ceil(log2(2048)) = 11
        assert precision_for_radius(3, 2, 1.0, 1 / 64) == 11
        # large eps floors at 1
        assert precision_for_radius(1, 1, 1.0, 100.0) == 1

    def test_precision_certifies_radius(self):
        for (w, l, bm, eps) in [(3, 2, 1.0, 0.25), (6, 5, 2.0, 1 / 16), (2, 4, 1.5, 0.01)]:
            b = precision_for_radius(w, l, bm, eps)
            assert perturbation_bound(w, l, bm, 2.0 ** (-b)) <= eps
            if b > 1:
                assert perturbation_bound(w, l, bm, 2.0 ** (-(b - 1))) > eps

    def test_eps_domain(self):
        with pytest.raises(DomainError):
            precision_for_radius(3, 2, 1.0, 0.0)


class TestCoveringVerification:
    def test_hundred_trials_pass(self):
        spec = FamilySpec(d=1, W=4, L=3, B=1.0)
        report = verify_covering_property(spec, eps=0.25, trials=100, seed=0)
        assert report.passed
        assert report.trials == 100
        assert report.max_gap <= 0.25
        assert report.max_gap <= report.bound

    def test_deterministic(self):
        spec = FamilySpec(d=2, W=3, L=2, B=2.0)
        a = verify_covering_property(spec, eps=0.5, trials=25, seed=7)
        b = verify_covering_property(spec, eps=0.5, trials=25, seed=7)
        assert a.max_gap == b.max_gap

    def test_report_json(self):
        spec = FamilySpec(d=1, W=2, L=2, B=1.0)
        report = verify_covering_property(spec, eps=0.5, trials=5, seed=1)
        doc = json.loads(report.to_json())
        assert doc["pass"] is True
        assert doc["eps"] == 0.5
        assert doc["b"] == report.b

    def test_quantized_weights_on_grid(self):
        cfg = random_config(2, d=1, width=3, depth=2, magnitude=1.0)
        b = precision_for_radius(3, 2, 1.0, 0.25)
        qcfg = quantize_network(cfg, QuantSpec(B=1.0, b=b))
        step = Fraction(1, 2**b)
        for A, b_ in qcfg.layers:
            for v in np.concatenate([A.ravel(), b_]):
                assert (Fraction(float(v)) / step).denominator == 1
