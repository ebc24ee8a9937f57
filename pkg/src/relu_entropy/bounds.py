"""Closed-form metric-entropy bounds, the constants ledger, and the
transformation / bit-budget / rate-equation calculators built on them.

Every bound here returns log2 of a covering-number estimate.  Constants
come in three kinds: proof-traced values (fixed by the derivations this
package verifies), derived values (computed from other ledger entries,
never hard-coded), and free parameters for genuinely unknown absolute
constants, which default to 1 and mark a formula as shape-only.

Evaluations outside a theorem's hypotheses are allowed for exploration
but flagged: validity is a flag, not an error.  Hard errors are reserved
for inputs where a formula stops denoting anything (nonpositive radius,
or a radius so large the log factor would go negative).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from scipy.optimize import brentq

from .errors import DomainError, PreconditionError, SolverError
from .quantize import perturbation_bound, precision_for_radius


@dataclass(frozen=True)
class ConstantsLedger:
    """All absolute constants in one place.

    c_sparse and c_quant are derived properties so that changing
    c_fc_lower propagates (the derivations define them by division).
    """

    C_fc_upper: float = 30.0
    c_fc_lower: float = 1.0 / (4 * 40**2 * 120**2)
    C_sparse: float = 80.0
    D_sparse: float = 21600.0
    C_quant: float = 100.0
    D_quant: float = 960.0
    E_quant: float = 2.0e5
    C_regression: float = 800.0
    # unknown absolute constants; 1.0 means shape-only
    C_lip_entropy: float = 1.0
    c_lip_entropy: float = 1.0
    c_truncfat: float = 1.0
    K_mendelson: float = 1.0
    c_mendelson: float = 1.0

    @property
    def c_sparse(self) -> float:
        return self.c_fc_lower / 96.0

    @property
    def c_quant(self) -> float:
        c1 = self.c_fc_lower / 4.0
        c2 = (self.c_fc_lower / 8.0) / (32**2 * 8 * 160)
        return min(c1, c2) / 2.0

    @property
    def c_bits(self) -> float:
        """Exponent constant of the bit-budget lower bound: 5/c_fc_lower + 2."""
        return 5.0 / self.c_fc_lower + 2.0

    def table(self) -> list[dict]:
        traced = {
            "C_fc_upper": "covering upper bound, fully-connected families",
            "c_fc_lower": "packing lower bound, fully-connected families",
            "C_sparse": "covering upper bound, sparse families",
            "D_sparse": "validity threshold s >= D_sparse * d^2 * L",
            "C_quant": "covering upper bound, base-2-quantized families",
            "D_quant": "validity threshold W, L >= D_quant",
            "E_quant": "validity threshold L(a+b) >= E_quant * log2(W)",
            "C_regression": "prediction-error certificate, log-term coefficient",
        }
        derived = {
            "c_sparse": "c_fc_lower / 96",
            "c_quant": "min{c_fc_lower/4, (c_fc_lower/8)/(32^2*8*160)} / 2",
            "c_bits": "5/c_fc_lower + 2",
        }
        params = {
            "C_lip_entropy": "Lipschitz-class entropy, upper",
            "c_lip_entropy": "Lipschitz-class entropy, lower",
            "c_truncfat": "fat-shattering constant of the truncated class",
            "K_mendelson": "empirical-covering constant",
            "c_mendelson": "empirical-covering constant, lower",
        }
        rows = []
        for name, note in traced.items():
            rows.append({"name": name, "value": getattr(self, name),
                         "kind": "proof-traced", "note": note})
        for name, formula in derived.items():
            rows.append({"name": name, "value": getattr(self, name),
                         "kind": "derived", "note": formula})
        for name, note in params.items():
            rows.append({"name": name, "value": getattr(self, name),
                         "kind": "parameter", "note": note + "; shape-only default"})
        return rows


DEFAULT_LEDGER = ConstantsLedger()


@dataclass(frozen=True)
class BoundReport:
    """One evaluated bound: its value, the branch taken, and whether the
    theorem's hypotheses actually held."""

    value: float
    regime: str
    constants_used: dict
    validity: bool
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.value >= 0.0):
            raise DomainError(f"bound value must be >= 0, got {self.value}", value=self.value)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "regime": self.regime,
            "constants_used": self.constants_used,
            "validity": self.validity,
            "details": self.details,
        }


def _check_arch(W: int, L: int) -> None:
    if W < 1 or L < 1:
        raise PreconditionError(f"need W, L >= 1, got W={W}, L={L}", W=W, L=L)


def _log_term(W: int, L: int, B: float, eps: float) -> float:
    """log2((W+1)^L B^L / eps), computed in logs to dodge overflow."""
    return L * (math.log2(W + 1) + math.log2(B)) - math.log2(eps)


def _check_eps(eps: float, log2_ceiling: float) -> None:
    # the formula's natural domain: the log factor must stay >= 0
    if not (eps > 0):
        raise DomainError(f"radius must be positive, got {eps}", eps=eps)
    if math.log2(eps) > log2_ceiling:
        raise DomainError(
            f"radius {eps} above the formula's ceiling 2^{log2_ceiling:.6g}",
            eps=eps,
        )


def fc_bound(
    W: int,
    L: int,
    B: float,
    eps: float,
    side: str = "upper",
    ledger: ConstantsLedger = DEFAULT_LEDGER,
    const: float | None = None,
) -> BoundReport:
    """const * W^2 L * log2((W+1)^L B^L / eps) for bounded-weight families.

    side picks the proof-traced constant (upper covering / lower packing);
    const overrides it for shape-only exploration.  The lower bound's
    hypotheses (eps < 1/2 and W, L >= 60) are reported via validity.
    """
    _check_arch(W, L)
    if side not in ("upper", "lower"):
        raise DomainError(f"side must be 'upper' or 'lower', got {side!r}", side=side)
    if B < 1:
        raise PreconditionError(f"the bound assumes B >= 1, got {B}", B=B)
    _check_eps(eps, L * (math.log2(W + 1) + math.log2(B)))
    violations = []
    if not (0 < eps < 0.5):
        violations.append("eps outside (0, 1/2)")
    if side == "lower" and (W < 60 or L < 60):
        violations.append("lower bound needs W, L >= 60")
    used = const if const is not None else (
        ledger.C_fc_upper if side == "upper" else ledger.c_fc_lower
    )
    value = used * W * W * L * _log_term(W, L, B, eps)
    return BoundReport(
        value=value,
        regime=side,
        constants_used={"const": used},
        validity=not violations,
        details={"violations": violations},
    )


def _ceil_sqrt_ratio(s: int, L: int) -> int:
    """Smallest integer t with t^2 * L >= s, exactly."""
    t = math.isqrt((s + L - 1) // L)
    while t * t * L < s:
        t += 1
    while t > 1 and (t - 1) * (t - 1) * L >= s:
        t -= 1
    return t


def sparse_bound(
    W: int,
    L: int,
    B: float,
    s: int,
    d: int,
    eps: float,
    side: str = "upper",
    ledger: ConstantsLedger = DEFAULT_LEDGER,
    const: float | None = None,
) -> BoundReport:
    """const * min{s, W^2 L} * log2(...) for connectivity-limited families.

    The lower bound replaces W with W_tilde = min{ceil(sqrt(s/L)), W}
    inside the log (reported in details) and is only certified for
    eps < 1/4, W, L >= 60 and s >= D_sparse * d^2 * L.
    """
    _check_arch(W, L)
    if side not in ("upper", "lower"):
        raise DomainError(f"side must be 'upper' or 'lower', got {side!r}", side=side)
    if s < max(W, L):
        raise PreconditionError(
            f"need s >= max(W, L) = {max(W, L)}, got {s}", s=s, W=W, L=L
        )
    if B < 1:
        raise PreconditionError(f"the bound assumes B >= 1, got {B}", B=B)
    if d < 1:
        raise PreconditionError(f"need d >= 1, got {d}", d=d)
    W_tilde = _ceil_sqrt_ratio(s, L) if side == "lower" else None
    W_log = min(W_tilde, W) if side == "lower" else W
    _check_eps(eps, L * (math.log2(W_log + 1) + math.log2(B)))
    violations = []
    if side == "upper":
        if not (0 < eps < 0.5):
            violations.append("eps outside (0, 1/2)")
    else:
        if not (0 < eps < 0.25):
            violations.append("eps outside (0, 1/4)")
        if W < 60 or L < 60:
            violations.append("lower bound needs W, L >= 60")
        if s < ledger.D_sparse * d * d * L:
            violations.append("needs s >= D_sparse * d^2 * L")
    used = const if const is not None else (
        ledger.C_sparse if side == "upper" else ledger.c_sparse
    )
    active = min(s, W * W * L)
    value = used * active * _log_term(W_log, L, B, eps)
    details = {
        "violations": violations,
        "min_branch": "s" if s <= W * W * L else "W^2*L",
    }
    if side == "lower":
        details["W_tilde"] = min(W_tilde, W)
    return BoundReport(
        value=value,
        regime=side,
        constants_used={"const": used},
        validity=not violations,
        details=details,
    )


def quantized_bound(
    W: int,
    L: int,
    a: int,
    b: int,
    eps: float,
    side: str = "upper",
    ledger: ConstantsLedger = DEFAULT_LEDGER,
    const: float | None = None,
) -> BoundReport:
    """const * W^2 L * min{a+b, log2((W+1)^L 2^{aL} / eps)}.

    Which branch of the min is active flips at the phase-transition radius
    eps* = (W+1)^L 2^{aL} 2^{-(a+b)}; below it the bit budget a+b wins and
    the value is flat in eps.  eps* and the branch are reported.
    """
    _check_arch(W, L)
    if side not in ("upper", "lower"):
        raise DomainError(f"side must be 'upper' or 'lower', got {side!r}", side=side)
    if a < 0 or b < 0 or a + b < 1:
        raise PreconditionError(f"need a, b >= 0 with a+b >= 1, got a={a}, b={b}", a=a, b=b)
    log2_ceiling = L * math.log2(W + 1) + a * L
    _check_eps(eps, log2_ceiling)
    log_term = log2_ceiling - math.log2(eps)
    log2_eps_star = log2_ceiling - (a + b)
    eps_star = 2.0 ** log2_eps_star if log2_eps_star < 1023 else math.inf
    violations = []
    if side == "upper":
        if not (0 < eps < 0.5):
            violations.append("eps outside (0, 1/2)")
    else:
        if not (0 < eps < 0.01):
            violations.append("eps outside (0, 1/100)")
        if W < ledger.D_quant or L < ledger.D_quant:
            violations.append("lower bound needs W, L >= D_quant")
        if L * (a + b) < ledger.E_quant * math.log2(W):
            violations.append("needs L(a+b) >= E_quant * log2(W)")
    used = const if const is not None else (
        ledger.C_quant if side == "upper" else ledger.c_quant
    )
    if a + b <= log_term:
        branch, active = "bits", float(a + b)
    else:
        branch, active = "log", log_term
    value = used * W * W * L * active
    return BoundReport(
        value=value,
        regime=f"{side}:{branch}",
        constants_used={"const": used},
        validity=not violations,
        details={"violations": violations, "eps_star": eps_star, "branch": branch},
    )


def truncated_bound(
    W: int,
    L: int,
    eps: float,
    ledger: ConstantsLedger = DEFAULT_LEDGER,
    const: float | None = None,
) -> BoundReport:
    """const * W^2 L^2 * log2(WL) * log2(1/eps) for truncated-output
    families with unconstrained weights; const defaults to the derived
    2 * K_mendelson * c_truncfat."""
    if W < 2 or L < 2:
        raise PreconditionError(f"need W, L >= 2, got W={W}, L={L}", W=W, L=L)
    if not (0 < eps <= 1):
        raise DomainError(f"need eps in (0, 1], got {eps}", eps=eps)
    violations = []
    if not (eps < 0.5):
        violations.append("eps outside (0, 1/2)")
    used = const if const is not None else 2.0 * ledger.K_mendelson * ledger.c_truncfat
    value = used * W * W * L * L * math.log2(W * L) * math.log2(1.0 / eps)
    return BoundReport(
        value=value,
        regime="upper",
        constants_used={"const": used},
        validity=not violations,
        details={"violations": violations},
    )


def cardinality_bound(W: int, L: int, cardA: int) -> float:
    """log2-cardinality bound 5 W^2 L log2|A| for finite weight domains."""
    _check_arch(W, L)
    if cardA < 2:
        raise PreconditionError(f"need at least 2 admissible values, got {cardA}", cardA=cardA)
    return 5.0 * W * W * L * math.log2(cardA)


def sparse_cardinality_bound(W: int, L: int, s: int, cardA: int) -> float:
    """log2-cardinality bound 5 s (log2(L(W+1)) + log2|A|), sparse variant."""
    _check_arch(W, L)
    if cardA < 2:
        raise PreconditionError(f"need at least 2 admissible values, got {cardA}", cardA=cardA)
    if s < max(W, L):
        raise PreconditionError(
            f"need s >= max(W, L) = {max(W, L)}, got {s}", s=s, W=W, L=L
        )
    return 5.0 * s * (math.log2(L * (W + 1)) + math.log2(cardA))


@dataclass(frozen=True)
class TransformVerdict:
    """Outcome of the representation-transformation necessary condition."""

    verdict: str  # "necessary-condition-holds" | "impossible"
    lhs: float
    rhs: float
    validity: bool
    details: dict = field(default_factory=dict)


def transform_feasibility(
    src: tuple,
    dst: tuple,
    eps: float,
    ledger: ConstantsLedger = DEFAULT_LEDGER,
    c_const: float | None = None,
    C_const: float | None = None,
) -> TransformVerdict:
    """Can every member of the source family be represented eps-accurately
    inside the destination family?  Checks the necessary counting condition

        c W^2 L log2((W+1)^L B^L / (4 eps)) <= C Wd^2 Ld log2((Wd+1)^Ld Bd^Ld / eps)

    (at eps = 0 the limiting form c W^2 L <= C Wd^2 Ld).  A violated
    inequality proves impossibility; holding proves nothing more than
    consistency, hence the verdict wording.
    """
    W, L, B = src
    Wd, Ld, Bd = dst
    _check_arch(W, L)
    _check_arch(Wd, Ld)
    if B < 1 or Bd < 1:
        raise PreconditionError(f"need B, B~ >= 1, got {B}, {Bd}", B=B, Bd=Bd)
    if not (0 <= eps < 0.125):
        raise DomainError(f"need eps in [0, 1/8), got {eps}", eps=eps)
    c = c_const if c_const is not None else ledger.c_fc_lower
    C = C_const if C_const is not None else ledger.C_fc_upper
    violations = []
    if W < 60 or L < 60:
        violations.append("source side needs W, L >= 60")
    if eps == 0.0:
        lhs = c * W * W * L
        rhs = C * Wd * Wd * Ld
    else:
        lhs = c * W * W * L * _log_term(W, L, B, 4.0 * eps)
        rhs = C * Wd * Wd * Ld * _log_term(Wd, Ld, Bd, eps)
    verdict = "necessary-condition-holds" if lhs <= rhs else "impossible"
    return TransformVerdict(
        verdict=verdict,
        lhs=lhs,
        rhs=rhs,
        validity=not violations,
        details={"violations": violations, "eps": eps},
    )


@dataclass(frozen=True)
class BitBudget:
    """Bits-per-weight accounting for quantized representation."""

    min_bits: float
    achievable_bits: float
    achievable_b: int
    c_used: float
    validity: bool
    details: dict = field(default_factory=dict)


def quantization_bit_budget(
    W: int,
    L: int,
    B: float,
    kappa: float,
    ledger: ConstantsLedger = DEFAULT_LEDGER,
    c: float | None = None,
) -> BitBudget:
    """How many bits per weight a kappa-accurate dyadic representation
    needs (lower bound) and how many the explicit schedule spends.

    min_bits = (1/c) log2((W+1)^L B^L / kappa) with c the derived ledger
    exponent (overridable); the schedule picks the precision b from the
    perturbation bound and spends log2(2 floor(2^b B) + 1) bits, which
    stays below 6 log2((W+1)^L B^L / kappa).
    """
    _check_arch(W, L)
    if B < 1:
        raise PreconditionError(f"need B >= 1, got {B}", B=B)
    if not (kappa > 0):
        raise DomainError(f"need kappa > 0, got {kappa}", kappa=kappa)
    c_used = c if c is not None else ledger.c_bits
    violations = []
    if kappa >= 0.125:
        violations.append("kappa outside (0, 1/8): accuracy clamp regime")
    if W < 60 or L < 60:
        violations.append("lower bound needs W, L >= 60")
    log_term = _log_term(W, L, B, kappa)
    min_bits = log_term / c_used
    b = precision_for_radius(W, L, B, kappa)
    # exact integer count of the dyadic grid [-B, B] at precision b
    kmax = math.floor(Fraction(B) * (1 << b))
    achievable_bits = math.log2(2 * kmax + 1)
    return BitBudget(
        min_bits=min_bits,
        achievable_bits=achievable_bits,
        achievable_b=b,
        c_used=c_used,
        validity=not violations,
        details={"violations": violations, "six_log_cap": 6.0 * log_term},
    )


def yang_barron_kappa(entropy_model, n: int, tol: float = 1e-12) -> float:
    """Solve kappa^2 = entropy_model(kappa) / n for a strictly decreasing
    positive entropy model; bisection via a bracketing root finder."""
    if n < 1:
        raise PreconditionError(f"need n >= 1, got {n}", n=n)
    if not (tol > 0):
        raise DomainError(f"need tol > 0, got {tol}", tol=tol)

    def g(k: float) -> float:
        return k * k - entropy_model(k) / n

    hi = 1.0
    for _ in range(200):
        if g(hi) > 0:
            break
        hi *= 2.0
    else:
        raise SolverError("could not bracket: no sign change going up", hi=hi)
    lo = hi / 2.0
    for _ in range(400):
        if g(lo) < 0:
            break
        lo /= 2.0
    else:
        raise SolverError("could not bracket: no sign change going down", lo=lo)
    return float(brentq(g, lo, hi, xtol=tol))


def lip_entropy_bounds(
    eps: float, p: float = 1.0, ledger: ConstantsLedger = DEFAULT_LEDGER
) -> tuple[float, float]:
    """Two-sided entropy of the bounded 1-Lipschitz class: both sides scale
    as 1/eps; the constants are unknown, so shape-only by default.  The
    L^p index only has to be finite here, the constants absorb it."""
    if not (0 < eps < 0.5):
        raise DomainError(f"need eps in (0, 1/2), got {eps}", eps=eps)
    if not (p >= 1):
        raise DomainError(f"need p >= 1, got {p}", p=p)
    if ledger.c_lip_entropy > ledger.C_lip_entropy:
        raise PreconditionError(
            "lower constant exceeds upper constant",
            c=ledger.c_lip_entropy, C=ledger.C_lip_entropy,
        )
    return ledger.c_lip_entropy / eps, ledger.C_lip_entropy / eps


def approx_error_bounds_H1(
    W: int,
    L: int,
    ledger: ConstantsLedger = DEFAULT_LEDGER,
    C_upper: float = 1.0,
    c_lower: float = 1.0,
    C_unbounded: float = 1.0,
) -> tuple[float, float, float]:
    """Minimax approximation error of the unit Sobolev ball on [0,1]:
    (upper, lower) for bounded-weight networks and the lower bound when
    weights are unconstrained.  All three constants are unknown; the two
    lower expressions carry the min{1/8, .} clamp."""
    if W < 2 or L < 2:
        raise PreconditionError(f"need W, L >= 2, got W={W}, L={L}", W=W, L=L)
    core = W * W * L * L * math.log2(W)
    upper_bounded = C_upper / core
    lower_bounded = min(0.125, c_lower / core)
    lower_unbounded = min(0.125, C_unbounded / (W * W * L * L * math.log2(W * L) ** 2))
    return upper_bounded, lower_bounded, lower_unbounded
