"""Brute-force ground truth for small families: exact enumeration,
realization dedup, and greedy covering/packing estimators.

Determinism contract: clouds are built in a sorted order (serialized
configuration for networks, node data for piecewise-linear members, the
value vector for raw grid functions) and the greedy algorithms scan
first-fit in that order, so every reported size is reproducible and can
be frozen as a golden value.

The covering/packing sandwich leans on two facts: a maximal eps-packing
is an eps-covering, and any 2eps-packing injects into any eps-covering.
Greedy first-fit produces a maximal packing, so its size at eps upper
bounds the covering number N(eps) while its size at 2eps lower bounds it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import DomainError, PreconditionError, ResourceError
from .network import (
    FamilySpec,
    FiniteSet,
    GridFunction,
    NetworkConfig,
    config_to_json,
    default_grid_m,
    grid_distance,
    sample_grid,
)
from .pwl import PwlFunction, l1_distance, linf_distance

DEFAULT_ENUM_CAP = 1_000_000


# -- architecture bookkeeping --------------------------------------------


def iter_architectures(spec: FamilySpec):
    """Yield layer-dimension tuples (d, n_1, .., n_{depth-1}, 1) for every
    depth <= L and hidden widths in 1..W."""
    for depth in range(1, spec.L + 1):
        if depth == 1:
            yield (spec.d, 1)
            continue
        for hidden in product(range(1, spec.W + 1), repeat=depth - 1):
            yield (spec.d,) + hidden + (1,)


def arch_slots(dims: tuple) -> int:
    return sum(dims[i + 1] * dims[i] + dims[i + 1] for i in range(len(dims) - 1))


def _domain_values(spec: FamilySpec) -> tuple[float, ...]:
    if not isinstance(spec.domain, FiniteSet):
        raise PreconditionError(
            "enumeration needs an explicit finite weight set",
            domain=type(spec.domain).__name__,
        )
    return spec.domain.enumerate_values()


def count_configs(spec: FamilySpec) -> int:
    """Exact member count of the family, combinatorially (no enumeration).

    With 0 admissible, a configuration's connectivity is the number of
    nonzero slots, so the count per architecture is a binomial sum over
    the connectivity budget; without 0 every slot is nonzero.
    """
    values = _domain_values(spec)
    q = len(values)
    has_zero = 0.0 in values
    total = 0
    for dims in iter_architectures(spec):
        slots = arch_slots(dims)
        if has_zero:
            upto = slots if math.isinf(spec.s) else min(int(spec.s), slots)
            total += sum(math.comb(slots, k) * (q - 1) ** k for k in range(upto + 1))
        else:
            if slots <= spec.s:
                total += q ** slots
    return total


def stream_count_configs(spec: FamilySpec) -> int:
    """Count by actually enumerating every weight assignment, without
    materializing configurations.  Slow but assumption-free; used to
    cross-check count_configs on sizes where materialization would hurt."""
    values = _domain_values(spec)
    total = 0
    for dims in iter_architectures(spec):
        slots = arch_slots(dims)
        if math.isinf(spec.s):
            total += sum(1 for _ in product(values, repeat=slots))
        else:
            budget = int(spec.s)
            for assignment in product(values, repeat=slots):
                nonzero = sum(1 for v in assignment if v != 0.0)
                if nonzero <= budget:
                    total += 1
    return total


def enumerate_configs(
    spec: FamilySpec, cap: int = DEFAULT_ENUM_CAP
) -> tuple[list[NetworkConfig], int]:
    """Materialize every member of the family, each exactly once.

    The cap guards the pre-filter total sum over architectures of
    |A|^slots; when it trips, the error still carries the exact member
    count the enumeration would have produced.
    """
    values = _domain_values(spec)
    q = len(values)
    pre_total = sum(q ** arch_slots(dims) for dims in iter_architectures(spec))
    if pre_total > cap:
        raise ResourceError(
            f"enumeration would scan {pre_total} assignments, above the cap {cap}",
            count=count_configs(spec), scanned=pre_total, budget=cap,
        )
    configs: list[NetworkConfig] = []
    for dims in iter_architectures(spec):
        slots = arch_slots(dims)
        shapes = [(dims[i + 1], dims[i]) for i in range(len(dims) - 1)]
        for assignment in product(values, repeat=slots):
            if not math.isinf(spec.s):
                nonzero = sum(1 for v in assignment if v != 0.0)
                if nonzero > spec.s:
                    continue
            layers = []
            pos = 0
            for n_out, n_in in shapes:
                A = np.array(assignment[pos : pos + n_out * n_in]).reshape(n_out, n_in)
                pos += n_out * n_in
                b = np.array(assignment[pos : pos + n_out])
                pos += n_out
                layers.append((A, b))
            configs.append(NetworkConfig(layers))
    return configs, len(configs)


# -- function clouds ------------------------------------------------------


@dataclass(frozen=True)
class FunctionCloud:
    """A finite set of functions under one metric, in a fixed order.

    kind "grid" holds GridFunction members sharing (d, m); kind "pwl"
    holds PwlFunction members compared by the exact closed-form integrals
    (L^1 and sup only).  provenance, when present, tracks what produced
    each member, index-aligned.
    """

    members: tuple
    provenance: tuple | None = None
    kind: str = "grid"

    def __post_init__(self):
        if self.kind not in ("grid", "pwl"):
            raise DomainError(f"unknown cloud kind {self.kind!r}", kind=self.kind)
        want = GridFunction if self.kind == "grid" else PwlFunction
        if not all(isinstance(m, want) for m in self.members):
            raise DomainError(f"all members must be {want.__name__}")
        if self.kind == "grid" and self.members:
            dm = {(m.d, m.m) for m in self.members}
            if len(dm) != 1:
                raise DomainError(f"members live on different grids: {sorted(dm)}")
        if self.provenance is not None and len(self.provenance) != len(self.members):
            raise DomainError("provenance must align with members")

    def __len__(self) -> int:
        return len(self.members)

    def distance(self, i: int, j: int, p: float = 1.0) -> float:
        if self.kind == "grid":
            return grid_distance(self.members[i], self.members[j], p)
        if p == 1.0:
            return l1_distance(self.members[i], self.members[j])
        if math.isinf(p):
            return linf_distance(self.members[i], self.members[j])
        raise DomainError(f"pwl clouds support p in {{1, inf}}, got {p}", p=p)

    def subset(self, indices) -> "FunctionCloud":
        prov = None
        if self.provenance is not None:
            prov = tuple(self.provenance[i] for i in indices)
        return FunctionCloud(
            members=tuple(self.members[i] for i in indices),
            provenance=prov,
            kind=self.kind,
        )


def cloud_from_configs(configs, m: int | None = None) -> FunctionCloud:
    """Sample configurations on the default grid, sorted canonically."""
    configs = sorted(configs, key=config_to_json)
    if not configs:
        return FunctionCloud(members=(), provenance=(), kind="grid")
    if m is None:
        m = default_grid_m(configs[0].input_dim)
    return FunctionCloud(
        members=tuple(sample_grid(cfg, m) for cfg in configs),
        provenance=tuple(configs),
        kind="grid",
    )


def cloud_from_pwl(functions) -> FunctionCloud:
    """Cloud of piecewise-linear members, sorted by their node data."""
    functions = sorted(functions, key=lambda f: (f.breakpoints, f.values))
    return FunctionCloud(members=tuple(functions), provenance=None, kind="pwl")


def cloud_from_grid_functions(functions, provenance=None) -> FunctionCloud:
    """Cloud of raw grid functions, sorted by their value vectors."""
    order = sorted(range(len(functions)), key=lambda i: tuple(functions[i].values))
    prov = None if provenance is None else tuple(provenance[i] for i in order)
    return FunctionCloud(
        members=tuple(functions[i] for i in order), provenance=prov, kind="grid"
    )


# -- dedup and greedy estimators ------------------------------------------


def _dists_to_kept(cloud: FunctionCloud, i: int, kept: list[int], p: float, V=None):
    if cloud.kind == "grid" and V is not None and kept:
        diff = np.abs(V[kept] - V[i])
        if math.isinf(p):
            return np.max(diff, axis=1)
        if p == 1.0:
            return np.mean(diff, axis=1)
        return np.mean(diff ** p, axis=1) ** (1.0 / p)
    return np.array([cloud.distance(i, j, p) for j in kept])


def _values_matrix(cloud: FunctionCloud):
    if cloud.kind != "grid" or not cloud.members:
        return None
    return np.stack([m.values for m in cloud.members])


def dedup_realizations(cloud: FunctionCloud, tol: float = 1e-12) -> FunctionCloud:
    """Collapse members that agree up to sup distance tol, keeping the
    first representative of each class in cloud order."""
    if tol < 0:
        raise PreconditionError(f"need tol >= 0, got {tol}", tol=tol)
    V = _values_matrix(cloud)
    kept: list[int] = []
    for i in range(len(cloud)):
        d = _dists_to_kept(cloud, i, kept, math.inf, V)
        if len(d) == 0 or np.min(d) > tol:
            kept.append(i)
    return cloud.subset(kept)


def greedy_packing(cloud: FunctionCloud, eps: float, p: float = 1.0) -> list[int]:
    """First-fit maximal packing: keep a member iff it is farther than eps
    from everything already kept.  Returns kept indices in cloud order."""
    if eps < 0:
        raise PreconditionError(f"need eps >= 0, got {eps}", eps=eps)
    V = _values_matrix(cloud)
    kept: list[int] = []
    for i in range(len(cloud)):
        d = _dists_to_kept(cloud, i, kept, p, V)
        if len(d) == 0 or np.min(d) > eps:
            kept.append(i)
    return kept


def greedy_covering(cloud: FunctionCloud, eps: float, p: float = 1.0) -> list[int]:
    """Greedy max-coverage covering: repeatedly pick the member whose
    eps-ball covers the most still-uncovered members (ties to the earliest
    index).  Quadratic in cloud size."""
    if eps < 0:
        raise PreconditionError(f"need eps >= 0, got {eps}", eps=eps)
    n = len(cloud)
    if n == 0:
        return []
    V = _values_matrix(cloud)
    if V is not None:
        rows = []
        for i in range(n):
            rows.append(_dists_to_kept(cloud, i, list(range(n)), p, V) <= eps)
        covers = np.array(rows)
    else:
        covers = np.zeros((n, n), dtype=bool)
        for i in range(n):
            for j in range(i, n):
                within = cloud.distance(i, j, p) <= eps
                covers[i, j] = covers[j, i] = within
    uncovered = np.ones(n, dtype=bool)
    centers: list[int] = []
    while uncovered.any():
        gains = (covers & uncovered).sum(axis=1)
        best = int(np.argmax(gains))  # argmax takes the earliest maximum
        if gains[best] == 0:
            raise DomainError("a member covers nothing, not even itself")
        centers.append(best)
        uncovered &= ~covers[best]
    return centers


def entropy_sandwich(cloud: FunctionCloud, eps: float, p: float = 1.0) -> tuple[int, int]:
    """Bracket the covering number N(eps): a 2eps-packing size from below,
    a maximal eps-packing (which covers) from above."""
    if not (eps > 0):
        raise PreconditionError(f"need eps > 0, got {eps}", eps=eps)
    lower = len(greedy_packing(cloud, 2.0 * eps, p))
    upper = len(greedy_packing(cloud, eps, p))
    return lower, upper
