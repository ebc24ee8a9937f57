"""Network configurations, realizations, and structural constructions.

A configuration is a finite sequence of affine layers (A_l, b_l); its
realization applies the ReLU map between consecutive layers and nothing
after the last one, so a single layer realizes a plain affine map.  The
derived metrics are depth (layer count), width (largest layer dimension,
input counted), magnitude (largest absolute entry) and connectivity
(number of nonzero entries, biases counted).

All constructions here (depth augmentation, output truncation, input
lifting, amplification) return new configurations whose realization is
claimed to equal a stated transform of the input's realization.  Those
identities hold exactly in real arithmetic; tests check them pointwise
in float64.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, DomainError, PreconditionError, ResourceError

# Hard cap on grid sizes produced by sample_grid; callers may pass a
# larger explicit budget but never silently.
DEFAULT_GRID_BUDGET = 1 << 22


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.flags.writeable = False
    return out


class NetworkConfig:
    """Immutable sequence of affine layers with derived metrics.

    ``layers`` is a sequence of (A, b) pairs; A has shape (n_out, n_in)
    and b has shape (n_out,).  Consecutive layers must chain and every
    entry must be finite.
    """

    __slots__ = ("layers", "input_dim", "output_dim")

    def __init__(self, layers: Sequence[tuple], input_dim: int | None = None):
        if not layers:
            raise DimensionError("a configuration needs at least one layer")
        frozen = []
        prev = None
        for idx, (A, b) in enumerate(layers, start=1):
            A = np.atleast_2d(np.asarray(A, dtype=float))
            b = np.atleast_1d(np.asarray(b, dtype=float))
            if b.ndim != 1 or A.ndim != 2 or A.shape[0] != b.shape[0]:
                raise DimensionError(
                    f"layer {idx}: bias length {b.shape} does not match matrix rows {A.shape}",
                    layer=idx,
                )
            if prev is not None and A.shape[1] != prev:
                raise DimensionError(
                    f"layer {idx}: expected {prev} input columns, got {A.shape[1]}",
                    layer=idx, expected=prev, got=A.shape[1],
                )
            if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
                raise DomainError(f"layer {idx}: entries must be finite", layer=idx)
            frozen.append((_freeze(A), _freeze(b)))
            prev = A.shape[0]
        d = frozen[0][0].shape[1]
        if input_dim is not None and input_dim != d:
            raise DimensionError(
                f"layer 1 has {d} input columns, declared input_dim is {input_dim}",
                layer=1, expected=input_dim, got=d,
            )
        object.__setattr__(self, "layers", tuple(frozen))
        object.__setattr__(self, "input_dim", d)
        object.__setattr__(self, "output_dim", frozen[-1][0].shape[0])

    def __setattr__(self, name, value):
        raise AttributeError("NetworkConfig is immutable")

    # -- derived metrics ------------------------------------------------

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def width(self) -> int:
        dims = [self.input_dim] + [A.shape[0] for A, _ in self.layers]
        return max(dims)

    @property
    def magnitude(self) -> float:
        worst = 0.0
        for A, b in self.layers:
            worst = max(worst, float(np.max(np.abs(A))), float(np.max(np.abs(b))))
        return worst

    @property
    def connectivity(self) -> int:
        total = 0
        for A, b in self.layers:
            total += int(np.count_nonzero(A)) + int(np.count_nonzero(b))
        return total

    # -- misc -----------------------------------------------------------

    def __call__(self, x):
        return evaluate(self, x)

    def __eq__(self, other):
        if not isinstance(other, NetworkConfig):
            return NotImplemented
        if len(self.layers) != len(other.layers):
            return False
        return all(
            np.array_equal(A1, A2) and np.array_equal(b1, b2)
            for (A1, b1), (A2, b2) in zip(self.layers, other.layers)
        )

    def __hash__(self):
        return hash(config_to_json(self))

    def __repr__(self):
        return (
            f"NetworkConfig(depth={self.depth}, width={self.width}, "
            f"input_dim={self.input_dim}, magnitude={self.magnitude:g})"
        )


def evaluate(cfg: NetworkConfig, x) -> float:
    """Realize cfg at a single input point.

    Affine for depth 1, otherwise alternates affine maps with elementwise
    ReLU; no activation after the final layer.  Returns a float when the
    output dimension is 1, otherwise the output vector.
    """
    z = np.atleast_1d(np.asarray(x, dtype=float))
    if z.shape != (cfg.input_dim,):
        raise DimensionError(
            f"input has shape {z.shape}, layer 1 expects length {cfg.input_dim}",
            layer=1, expected=cfg.input_dim, got=z.shape,
        )
    last = cfg.depth - 1
    for i, (A, b) in enumerate(cfg.layers):
        z = A @ z + b
        if i != last:
            z = np.maximum(z, 0.0)
    return float(z[0]) if cfg.output_dim == 1 else z


def evaluate_batch(cfg: NetworkConfig, X) -> np.ndarray:
    """Vectorized realization over the rows of X (shape (n, d) or (n,) if d=1)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        if cfg.input_dim != 1:
            raise DimensionError(
                f"flat input only allowed for 1-d networks, layer 1 expects {cfg.input_dim}",
                layer=1, expected=cfg.input_dim, got=1,
            )
        X = X[:, None]
    if X.shape[1] != cfg.input_dim:
        raise DimensionError(
            f"inputs have {X.shape[1]} columns, layer 1 expects {cfg.input_dim}",
            layer=1, expected=cfg.input_dim, got=X.shape[1],
        )
    last = cfg.depth - 1
    Z = X
    for i, (A, b) in enumerate(cfg.layers):
        Z = Z @ A.T + b
        if i != last:
            Z = np.maximum(Z, 0.0)
    return Z[:, 0] if cfg.output_dim == 1 else Z


# -- grid functions -----------------------------------------------------


def default_grid_m(d: int) -> int:
    """Points per axis used when the caller does not pick one."""
    return {1: 1025, 2: 65, 3: 17}.get(d, 5)


def grid_points(d: int, m: int, budget: int = DEFAULT_GRID_BUDGET) -> np.ndarray:
    """Uniform grid {0, 1/(m-1), ..., 1}^d as an (m^d, d) array, row-major."""
    if m < 2:
        raise PreconditionError(f"need at least 2 points per axis, got {m}", m=m)
    total = m ** d
    if total > budget:
        raise ResourceError(
            f"grid of {total} points exceeds budget {budget}",
            count=total, budget=budget,
        )
    axis = np.linspace(0.0, 1.0, m)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.reshape(-1) for g in mesh], axis=-1)


@dataclass(frozen=True)
class GridFunction:
    """A function recorded on the uniform m^d grid over [0,1]^d.

    values is the flat row-major vector: the last axis index moves fastest,
    matching grid_points ordering.
    """

    d: int
    m: int
    values: np.ndarray

    def __post_init__(self):
        if self.m < 2:
            raise PreconditionError(f"need m >= 2, got {self.m}", m=self.m)
        vals = _freeze(np.asarray(self.values, dtype=float).reshape(-1))
        if vals.shape[0] != self.m ** self.d:
            raise DimensionError(
                f"expected {self.m ** self.d} values, got {vals.shape[0]}",
                expected=self.m ** self.d, got=vals.shape[0],
            )
        if not np.all(np.isfinite(vals)):
            raise DomainError("grid values must be finite")
        object.__setattr__(self, "values", vals)


def grid_distance(f: GridFunction, g: GridFunction, p: float = 1.0) -> float:
    """Discrete L^p distance: p-mean of |f - g| over the grid (max for p=inf)."""
    if (f.d, f.m) != (g.d, g.m):
        raise DimensionError(
            f"grids differ: ({f.d},{f.m}) vs ({g.d},{g.m})",
            expected=(f.d, f.m), got=(g.d, g.m),
        )
    diff = np.abs(f.values - g.values)
    if math.isinf(p):
        return float(np.max(diff))
    if p <= 0:
        raise DomainError(f"p must be positive or inf, got {p}", p=p)
    if p == 1.0:
        return float(np.mean(diff))
    return float(np.mean(diff ** p) ** (1.0 / p))


def sample_grid(cfg: NetworkConfig, m: int, budget: int = DEFAULT_GRID_BUDGET) -> GridFunction:
    """Evaluate cfg on the uniform m^d grid; deterministic row-major order."""
    pts = grid_points(cfg.input_dim, m, budget=budget)
    return GridFunction(d=cfg.input_dim, m=m, values=evaluate_batch(cfg, pts))


# -- weight domains -----------------------------------------------------


class WeightDomain:
    """Admissible weight values; subclasses give exact membership tests."""

    finite = False

    def contains(self, x: float) -> bool:
        raise NotImplementedError

    def cardinality(self) -> int:
        raise DomainError(f"{type(self).__name__} is not a finite domain")

    def enumerate_values(self) -> tuple[float, ...]:
        raise DomainError(f"{type(self).__name__} is not a finite domain")


def _is_dyadic(x: float, b: int) -> bool:
    # exact: Fraction(float) is the true binary value of x
    if not math.isfinite(x):
        return False
    return (Fraction(x) * (1 << b)).denominator == 1


@dataclass(frozen=True)
class Interval(WeightDomain):
    """The full interval [-B, B]; B may be math.inf."""

    B: float

    def __post_init__(self):
        if not (self.B > 0):
            raise DomainError(f"interval radius must be positive, got {self.B}", B=self.B)

    def contains(self, x: float) -> bool:
        return math.isfinite(x) and abs(x) <= self.B


@dataclass(frozen=True)
class DyadicGrid(WeightDomain):
    """[-B, B] intersected with 2^{-b} Z. Membership and counting are exact."""

    B: float
    b: int
    finite = True

    def __post_init__(self):
        if not (self.B > 0 and math.isfinite(self.B)):
            raise DomainError(f"dyadic grid needs finite B > 0, got {self.B}", B=self.B)
        if self.b < 0:
            raise DomainError(f"dyadic grid needs b >= 0, got {self.b}", b=self.b)

    def contains(self, x: float) -> bool:
        return _is_dyadic(x, self.b) and Fraction(abs(x)) <= Fraction(self.B)

    def _kmax(self) -> int:
        # largest integer k with k * 2^-b <= B, computed exactly
        return math.floor(Fraction(self.B) * (1 << self.b))

    def cardinality(self) -> int:
        return 2 * self._kmax() + 1

    def enumerate_values(self) -> tuple[float, ...]:
        kmax = self._kmax()
        scale = 2.0 ** (-self.b)
        return tuple(k * scale for k in range(-kmax, kmax + 1))


@dataclass(frozen=True)
class Base2Grid(WeightDomain):
    """(-2^{a+1}, 2^{a+1}) intersected with 2^{-b} Z (open interval)."""

    a: int
    b: int
    finite = True

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise DomainError(f"need a, b >= 0, got a={self.a}, b={self.b}", a=self.a, b=self.b)

    def contains(self, x: float) -> bool:
        return _is_dyadic(x, self.b) and abs(x) < 2.0 ** (self.a + 1)

    def cardinality(self) -> int:
        # integers k with |k| <= 2^{a+b+1} - 1
        return 2 ** (self.a + self.b + 2) - 1

    def max_magnitude(self) -> float:
        return 2.0 ** (self.a + 1) - 2.0 ** (-self.b)

    def enumerate_values(self) -> tuple[float, ...]:
        kmax = 2 ** (self.a + self.b + 1) - 1
        scale = 2.0 ** (-self.b)
        return tuple(k * scale for k in range(-kmax, kmax + 1))


@dataclass(frozen=True)
class FiniteSet(WeightDomain):
    """An explicit finite set of admissible values."""

    values: tuple
    finite = True

    def __post_init__(self):
        vals = tuple(sorted(float(v) for v in set(self.values)))
        if not vals:
            raise DomainError("finite weight set must be nonempty")
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("finite weight set entries must be finite")
        object.__setattr__(self, "values", vals)

    def contains(self, x: float) -> bool:
        return x in self.values

    def cardinality(self) -> int:
        return len(self.values)

    def enumerate_values(self) -> tuple[float, ...]:
        return self.values


@dataclass(frozen=True)
class FamilySpec:
    """The class of networks with input dim d, width <= W, depth <= L,
    magnitude <= B, connectivity <= s and all weights in `domain`.

    W >= d is a standing assumption (the input layer counts toward width).
    """

    d: int
    W: int
    L: int
    B: float = math.inf
    s: float = math.inf
    domain: WeightDomain | None = None

    def __post_init__(self):
        if self.d < 1 or self.W < 1 or self.L < 1:
            raise PreconditionError(
                f"need d, W, L >= 1, got d={self.d}, W={self.W}, L={self.L}",
                d=self.d, W=self.W, L=self.L,
            )
        if self.W < self.d:
            raise PreconditionError(
                f"width bound W={self.W} below input dim d={self.d}", W=self.W, d=self.d
            )
        if not (self.B > 0):
            raise DomainError(f"magnitude bound must be positive, got {self.B}", B=self.B)
        if not (self.s > 0):
            raise DomainError(f"connectivity bound must be positive, got {self.s}", s=self.s)
        if self.domain is None:
            object.__setattr__(self, "domain", Interval(self.B))

    def contains(self, cfg: NetworkConfig) -> bool:
        """Membership check; agrees with the four metric computations."""
        if cfg.input_dim != self.d or cfg.output_dim != 1:
            return False
        if cfg.depth > self.L or cfg.width > self.W:
            return False
        if cfg.magnitude > self.B or cfg.connectivity > self.s:
            return False
        for A, b in cfg.layers:
            for v in np.concatenate([A.reshape(-1), b]):
                if not self.domain.contains(float(v)):
                    return False
        return True


# -- structural constructions ------------------------------------------


def augment_to_depth(cfg: NetworkConfig, L: int, domain: WeightDomain | None = None) -> NetworkConfig:
    """Pad cfg to depth exactly L without changing its realization.

    Splits the final affine map into (A; -A) with biases (b; -b), passes the
    two signed channels through identity layers, and recombines with (1, -1).
    ReLU is idempotent on the split channels, so the identity is exact.
    Needs width headroom 2 and the weights {-1, 0, 1}; pass the family's
    weight domain to have that checked.
    """
    if L < cfg.depth:
        raise PreconditionError(
            f"target depth {L} below current depth {cfg.depth}", L=L, depth=cfg.depth
        )
    if domain is not None:
        for v in (-1.0, 0.0, 1.0):
            if not domain.contains(v):
                raise DomainError(
                    f"weight domain lacks the value {v} needed by the construction", value=v
                )
    if L == cfg.depth:
        return cfg
    A_last, b_last = cfg.layers[-1]
    if A_last.shape[0] != 1:
        raise PreconditionError("depth augmentation needs a single output unit")
    layers = list(cfg.layers[:-1])
    layers.append((np.vstack([A_last, -A_last]), np.concatenate([b_last, -b_last])))
    eye = np.eye(2)
    for _ in range(L - cfg.depth - 1):
        layers.append((eye, np.zeros(2)))
    layers.append((np.array([[1.0, -1.0]]), np.zeros(1)))
    return NetworkConfig(layers)


def truncate_as_network(cfg: NetworkConfig, E: float) -> NetworkConfig:
    """Compose cfg with the clamp to [-E, E], realized inside the network.

    Uses the two-layer identity  clamp_E(y) = -E + relu(y + E) - relu(y - E),
    applied to the pre-activation output: the final affine layer is split
    into signed copies first, so the clamp sees R(cfg) itself and not
    relu(R(cfg)).  Depth grows by exactly 2, width to at least 2.
    """
    if cfg.output_dim != 1:
        raise PreconditionError("truncation needs a single output unit")
    if not (E > 0):
        raise DomainError(f"truncation level must be positive, got {E}", E=E)
    A_last, b_last = cfg.layers[-1]
    layers = list(cfg.layers[:-1])
    # channels (relu(y), relu(-y)); their difference recovers y exactly
    layers.append((np.vstack([A_last, -A_last]), np.concatenate([b_last, -b_last])))
    layers.append((np.array([[1.0, -1.0], [1.0, -1.0]]), np.array([E, -E])))
    layers.append((np.array([[1.0, -1.0]]), np.array([-E])))
    return NetworkConfig(layers)


def lift_to_dim(cfg: NetworkConfig, d: int) -> NetworkConfig:
    """Turn a 1-d network into a d-d network that ignores coordinates 2..d."""
    if cfg.input_dim != 1:
        raise PreconditionError(
            f"lifting starts from a 1-d network, got input_dim={cfg.input_dim}",
            input_dim=cfg.input_dim,
        )
    if d < 1:
        raise PreconditionError(f"target dimension must be >= 1, got {d}", d=d)
    if d == 1:
        return cfg
    A1, b1 = cfg.layers[0]
    A1_lifted = np.hstack([A1, np.zeros((A1.shape[0], d - 1))])
    return NetworkConfig([(A1_lifted, b1)] + list(cfg.layers[1:]))


def amplify(
    cfg: NetworkConfig,
    L2: int,
    B2: float,
    W1: int | None = None,
    B1: float | None = None,
) -> tuple[NetworkConfig, float]:
    """Trade depth and magnitude headroom for an exact gain factor.

    Returns (cfg2, factor) with R(cfg2) = factor * R(cfg), depth(cfg2) =
    depth(cfg) + L2, width(cfg2) <= W1, magnitude(cfg2) <= B2 and
    factor = B2^(L1+L2) * floor(W1/2)^L2 / B1^L1.

    W1 and B1 are the width/magnitude budgets of the family cfg lives in;
    they default to the configuration's own metrics (floored at 2 and 1).
    The construction rescales layer l by B2/B1 on weights and (B2/B1)^l on
    biases (positive homogeneity moves the gain through ReLU), then spends
    the L2 extra layers on duplicate-and-sum blocks of floor(W1/2) signed
    pairs with all weights +-B2.  When B2 > B1 the bias rescaling can
    overflow B2; in that regime a constant channel of value B2^l is added
    to carry the biases, which needs one unit of width slack.
    """
    if W1 is None:
        W1 = max(cfg.width, 2)
    if B1 is None:
        B1 = max(cfg.magnitude, 1.0)
    if W1 < 2:
        raise PreconditionError(f"need width budget W1 >= 2, got {W1}", W1=W1)
    if W1 < cfg.width:
        raise PreconditionError(
            f"width budget {W1} below configuration width {cfg.width}", W1=W1, width=cfg.width
        )
    if B1 < 1 or B1 < cfg.magnitude:
        raise PreconditionError(
            f"need B1 >= max(1, magnitude), got B1={B1}, magnitude={cfg.magnitude}",
            B1=B1, magnitude=cfg.magnitude,
        )
    if B2 < 1:
        raise PreconditionError(f"need B2 >= 1, got {B2}", B2=B2)
    if L2 < 0:
        raise PreconditionError(f"need L2 >= 0, got {L2}", L2=L2)
    if cfg.output_dim != 1:
        raise PreconditionError("amplification needs a single output unit")

    L1 = cfg.depth
    k = B2 / B1

    def clip(arr):
        # float hygiene: k*B1 can exceed B2 by one ulp
        return np.clip(arr, -B2, B2)

    if k == 1.0:
        layers = [(A.copy(), b.copy()) for A, b in cfg.layers]
    else:
        bias_peak = max(
            (k ** (l + 1)) * float(np.max(np.abs(b), initial=0.0))
            for l, (_, b) in enumerate(cfg.layers)
        )
        if k < 1.0 or bias_peak <= B2:
            layers = [
                (clip(k * A), clip((k ** (l + 1)) * b))
                for l, (A, b) in enumerate(cfg.layers)
            ]
        else:
            # constant-channel variant: hidden unit carrying B2^l feeds the
            # rescaled biases back in with weights k^l b_l / B2^(l-1)
            hidden_widths = [A.shape[0] for A, _ in cfg.layers[:-1]]
            if hidden_widths and max(hidden_widths) + 1 > W1:
                raise PreconditionError(
                    "bias rescaling overflows B2 and there is no width slack "
                    "for a carry channel",
                    W1=W1, needed=max(hidden_widths) + 1,
                )
            layers = []
            for l, (A, b) in enumerate(cfg.layers, start=1):
                n_out, n_in = A.shape
                if l == 1:
                    Anew = k * A
                    bnew = k * b
                    if L1 > 1:
                        Anew = np.vstack([Anew, np.zeros((1, n_in))])
                        bnew = np.concatenate([bnew, [B2]])
                else:
                    delta = (k ** l) * b / (B2 ** (l - 1))
                    Anew = np.hstack([k * A, delta[:, None]])
                    bnew = np.zeros(n_out)
                    if l < L1:
                        channel = np.zeros((1, n_in + 1))
                        channel[0, -1] = B2
                        Anew = np.vstack([Anew, channel])
                        bnew = np.concatenate([bnew, [0.0]])
                layers.append((clip(Anew), clip(bnew)))

    u = W1 // 2
    if L2 > 0:
        A_last, b_last = layers[-1]
        layers[-1] = (
            clip(np.vstack([A_last, -A_last] * u)),
            clip(np.concatenate([np.concatenate([b_last, -b_last])] * u)),
        )
        pair_row = np.tile([B2, -B2], u)
        for _ in range(L2 - 1):
            block = np.vstack([pair_row, -pair_row] * u)
            layers.append((block, np.zeros(2 * u)))
        layers.append((pair_row[None, :], np.zeros(1)))

    factor = (B2 ** (L1 + L2)) * (u ** L2) / (B1 ** L1)
    return NetworkConfig(layers), factor


# -- generation and serialization ----------------------------------------


def random_config(
    seed: int,
    d: int = 1,
    width: int = 3,
    depth: int = 2,
    magnitude: float = 1.0,
) -> NetworkConfig:
    """Seeded generator: uniform weights in [-magnitude, magnitude]."""
    rng = np.random.default_rng(np.uint64(seed))
    dims = [d] + [width] * (depth - 1) + [1]
    layers = []
    for i in range(depth):
        A = rng.uniform(-magnitude, magnitude, size=(dims[i + 1], dims[i]))
        b = rng.uniform(-magnitude, magnitude, size=dims[i + 1])
        layers.append((A, b))
    return NetworkConfig(layers)


def config_to_dict(cfg: NetworkConfig) -> dict:
    return {
        "input_dim": cfg.input_dim,
        "output_dim": cfg.output_dim,
        "layers": [{"A": A.tolist(), "b": b.tolist()} for A, b in cfg.layers],
    }


def config_from_dict(data: dict) -> NetworkConfig:
    layers = [(np.asarray(layer["A"], dtype=float), np.asarray(layer["b"], dtype=float))
              for layer in data["layers"]]
    cfg = NetworkConfig(layers, input_dim=data.get("input_dim"))
    if "output_dim" in data and cfg.output_dim != data["output_dim"]:
        raise DimensionError(
            f"declared output_dim {data['output_dim']} but layers give {cfg.output_dim}",
            expected=data["output_dim"], got=cfg.output_dim,
        )
    return cfg


def config_to_json(cfg: NetworkConfig) -> str:
    """Canonical JSON form; also the deterministic sort key for clouds."""
    return json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))


def config_from_json(text: str) -> NetworkConfig:
    return config_from_dict(json.loads(text))
