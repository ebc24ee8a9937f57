"""Dyadic weight quantization and the constructive covering it induces.

Rounding is toward zero onto the grid 2^{-b} Z, so zeros stay zero
(connectivity never grows) and the map is odd.  All grid values are exact
dyadic rationals; float64 represents them exactly as long as the scaled
integer fits in 53 bits, which is enforced rather than assumed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError
from .network import (
    DyadicGrid,
    FamilySpec,
    NetworkConfig,
    default_grid_m,
    grid_distance,
    sample_grid,
)

# beyond this the scaled weights leave float64's exact-integer range
_EXACT_LIMIT = float(1 << 53)


@dataclass(frozen=True)
class QuantSpec:
    """Magnitude bound B >= 1 plus precision b; grid is [-B,B] cap 2^{-b}Z."""

    B: float
    b: int

    def __post_init__(self):
        if not (self.B >= 1 and math.isfinite(self.B)):
            raise PreconditionError(f"need finite B >= 1, got {self.B}", B=self.B)
        if self.b < 0 or self.b != int(self.b):
            raise PreconditionError(f"precision must be a nonnegative integer, got {self.b}", b=self.b)

    @property
    def grid(self) -> DyadicGrid:
        return DyadicGrid(self.B, self.b)


def quantize_scalar(x: float, spec: QuantSpec) -> float:
    """Round x toward zero onto the 2^{-b} grid; exact in float64."""
    if abs(x) > spec.B:
        raise DomainError(f"|{x}| exceeds the magnitude bound {spec.B}", x=x, B=spec.B)
    scaled = x * (2.0 ** spec.b)  # power-of-two scale, exact
    if abs(scaled) > _EXACT_LIMIT:
        raise PreconditionError(
            f"2^{spec.b} * {x} leaves the exact float64 range", x=x, b=spec.b
        )
    k = math.floor(scaled) if x >= 0 else math.ceil(scaled)
    return k * (2.0 ** (-spec.b))


def quantize_network(cfg: NetworkConfig, spec: QuantSpec) -> NetworkConfig:
    """Quantize every weight and bias; architecture is unchanged."""
    if cfg.magnitude > spec.B:
        raise DomainError(
            f"configuration magnitude {cfg.magnitude} exceeds the bound {spec.B}",
            magnitude=cfg.magnitude, B=spec.B,
        )
    scale = 2.0 ** spec.b
    if cfg.magnitude * scale > _EXACT_LIMIT:
        raise PreconditionError(
            f"precision {spec.b} leaves the exact float64 range for this configuration",
            b=spec.b,
        )
    inv = 2.0 ** (-spec.b)

    def q(arr):
        scaled = arr * scale
        return np.where(arr >= 0, np.floor(scaled), np.ceil(scaled)) * inv

    return NetworkConfig([(q(A), q(b)) for A, b in cfg.layers])


def perturbation_bound(W: int, L: int, B: float, delta: float) -> float:
    """Sup-norm distance bound L (W+1)^L B^(L-1) * delta for two networks of
    the same architecture whose weights differ elementwise by at most delta."""
    if B < 1:
        raise PreconditionError(f"the bound assumes B >= 1, got {B}", B=B)
    if delta < 0:
        raise DomainError(f"elementwise distance must be >= 0, got {delta}", delta=delta)
    if W < 1 or L < 1:
        raise PreconditionError(f"need W, L >= 1, got W={W}, L={L}", W=W, L=L)
    return L * (W + 1.0) ** L * B ** (L - 1) * delta


def precision_for_radius(W: int, L: int, B: float, eps: float) -> int:
    """Smallest precision of the ceil(log2) schedule with
    L (W+1)^L B^(L-1) 2^{-b} <= eps, floored at 1."""
    if eps <= 0:
        raise DomainError(f"radius must be positive, got {eps}", eps=eps)
    amp = perturbation_bound(W, L, B, 1.0)
    # (W+1)^L overflows float range near L*log2(W+1) ~ 1024; work in log2
    log2_amp = math.log2(L) + L * math.log2(W + 1) + (L - 1) * math.log2(B)
    b = max(1, math.ceil(log2_amp - math.log2(eps)))

    def certifies(bits: int) -> bool:
        if math.isfinite(amp):
            return amp * 2.0 ** (-bits) <= eps
        return log2_amp - bits <= math.log2(eps)

    # float log2 can land one off the true ceiling; repair both directions
    while not certifies(b):
        b += 1
    while b > 1 and certifies(b - 1) and b - 1 >= log2_amp - math.log2(eps):
        b -= 1
    return b


@dataclass(frozen=True)
class CoveringReport:
    """Outcome of a randomized check of the quantized-covering guarantee."""

    family: dict
    eps: float
    b: int
    max_gap: float
    bound: float
    passed: bool
    trials: int

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "eps": self.eps,
            "b": self.b,
            "max_gap": self.max_gap,
            "bound": self.bound,
            "pass": self.passed,
            "trials": self.trials,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def verify_covering_property(
    spec: FamilySpec,
    eps: float,
    trials: int,
    seed: int,
    m: int | None = None,
) -> CoveringReport:
    """Sample random members, quantize at the schedule's precision, and
    measure the sup-norm gap on a grid.

    The gap must stay below eps and below the sharper pointwise bound
    L (W+1)^L B^(L-1) 2^{-b}.  Failures are recorded in the report, never
    raised.
    """
    if not math.isfinite(spec.B):
        raise PreconditionError("the covering construction needs a finite magnitude bound")
    if trials < 1:
        raise PreconditionError(f"need at least one trial, got {trials}", trials=trials)
    b = precision_for_radius(spec.W, spec.L, spec.B, eps)
    qspec = QuantSpec(B=max(spec.B, 1.0), b=b)
    bound = perturbation_bound(spec.W, spec.L, spec.B, 2.0 ** (-b))
    if m is None:
        m = default_grid_m(spec.d)

    max_gap = 0.0
    children = np.random.SeedSequence(seed).spawn(trials)
    for child in children:
        rng = np.random.default_rng(child)
        depth = int(rng.integers(1, spec.L + 1))
        dims = [spec.d] + [int(rng.integers(1, spec.W + 1)) for _ in range(depth - 1)] + [1]
        layers = [
            (
                rng.uniform(-spec.B, spec.B, size=(dims[i + 1], dims[i])),
                rng.uniform(-spec.B, spec.B, size=dims[i + 1]),
            )
            for i in range(depth)
        ]
        cfg = NetworkConfig(layers)
        qcfg = quantize_network(cfg, qspec)
        gap = grid_distance(sample_grid(cfg, m), sample_grid(qcfg, m), math.inf)
        max_gap = max(max_gap, gap)

    family = {"d": spec.d, "W": spec.W, "L": spec.L, "B": spec.B}
    return CoveringReport(
        family=family,
        eps=eps,
        b=b,
        max_gap=max_gap,
        bound=bound,
        passed=(max_gap <= eps and max_gap <= bound),
        trials=trials,
    )
