"""Nonparametric regression at desk scale: noisy samples of a bounded
1-Lipschitz target, approximate empirical risk minimization over deep
narrow truncated networks with the n^{1/6} depth schedule, prediction
error measurement, the finite-sample certificate, and the rate fit
against the n^{-2/3} benchmark.

The minimizer is approximate by design: projected full-batch gradient
descent, best of several seeded restarts, with the best iterate kept.
The gap to a true minimizer is what the certificate's slack term absorbs;
on exactly enumerable families the brute-force oracle below pins it down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .bounds import ConstantsLedger, DEFAULT_LEDGER
from .errors import DomainError, PreconditionError
from .network import FamilySpec, NetworkConfig, augment_to_depth, evaluate_batch, random_config
from .oracle import enumerate_configs


# -- targets and tasks ----------------------------------------------------


def _g_abs(x):
    # |x - 1/2| recentered to zero mean; slope +-1 everywhere
    return np.abs(x - 0.5) - 0.25


def _g_hat(x):
    return 0.5 - np.abs(x - 0.5)


def _g_sine_clamped(x):
    base = np.sin(2.0 * np.pi * x) / (2.0 * np.pi)
    return np.clip(base, -0.125, 0.125)


BUILTIN_TARGETS: dict[str, Callable] = {
    "abs": _g_abs,
    "hat": _g_hat,
    "sine-clamped": _g_sine_clamped,
}


def lipschitz_audit(g: Callable, stride: int = 1024, slack: float = 1e-9) -> bool:
    """Finite-difference check that g is 1-Lipschitz and bounded by 1 on the
    stride grid; the built-in targets must pass this."""
    xs = np.linspace(0.0, 1.0, stride + 1)
    vals = np.asarray(g(xs), dtype=float)
    if np.max(np.abs(vals)) > 1.0 + slack:
        return False
    steps = np.abs(np.diff(vals)) * stride
    return bool(np.max(steps) <= 1.0 + slack * stride)


@dataclass(frozen=True)
class RegressionTask:
    """A target, a noise level, a sample budget, and a sampling law."""

    g: Callable
    sigma: float
    n: int
    P: str = "uniform"
    seed: int = 0
    name: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise PreconditionError(f"need n >= 1, got {self.n}", n=self.n)
        if self.sigma < 0:
            raise DomainError(f"noise level must be >= 0, got {self.sigma}", sigma=self.sigma)
        if self.P != "uniform" and not callable(self.P):
            raise DomainError("P must be 'uniform' or a callable rng, n -> x", P=self.P)


def make_task(target: str, sigma: float, n: int, seed: int = 0) -> RegressionTask:
    if target not in BUILTIN_TARGETS:
        raise DomainError(
            f"unknown target {target!r}; choose from {sorted(BUILTIN_TARGETS)}",
            target=target,
        )
    return RegressionTask(
        g=BUILTIN_TARGETS[target], sigma=sigma, n=n, seed=seed, name=target
    )


def generate_samples(task: RegressionTask) -> tuple[np.ndarray, np.ndarray]:
    """Draw (x_i, g(x_i) + sigma * xi_i); byte-deterministic in the seed."""
    rng = np.random.default_rng(np.uint64(task.seed))
    if task.P == "uniform":
        x = rng.uniform(0.0, 1.0, task.n)
    else:
        x = np.asarray(task.P(rng, task.n), dtype=float)
    noise = rng.standard_normal(task.n)
    y = np.asarray(task.g(x), dtype=float) + task.sigma * noise
    return x, y


def depth_schedule(n: int, width_const: float, rate_const: float) -> int:
    """ceil(2 (width_const+1) sqrt(rate_const+1) n^{1/6}).

    The nudge keeps exact powers (64^{1/6} = 2 up to float error) from
    ceiling one layer too high.
    """
    if n < 1:
        raise PreconditionError(f"need n >= 1, got {n}", n=n)
    if width_const < 0 or rate_const < 0:
        raise DomainError(
            f"constants must be >= 0, got {width_const}, {rate_const}",
            width_const=width_const, rate_const=rate_const,
        )
    v = 2.0 * (width_const + 1.0) * math.sqrt(rate_const + 1.0) * n ** (1.0 / 6.0)
    return math.ceil(v * (1.0 - 1e-12))


# -- approximate ERM ------------------------------------------------------


@dataclass(frozen=True)
class RegressionRun:
    """One fitted model plus the bookkeeping the certificate needs."""

    family: FamilySpec
    config: NetworkConfig
    trajectory: tuple
    achieved_risk: float
    slack: float
    diverged: int
    restarts: int
    prediction_estimate: float | None = None
    certificate_value: float | None = None


def _truncate_predictions(out: np.ndarray) -> np.ndarray:
    return np.clip(out, -1.0, 1.0)


def empirical_risk(cfg: NetworkConfig, x: np.ndarray, y: np.ndarray) -> float:
    """Mean squared error of the truncated realization on the sample."""
    pred = _truncate_predictions(evaluate_batch(cfg, x))
    return float(np.mean((pred - y) ** 2))


def _forward(params, x):
    acts = [x[:, None]]
    z = acts[0]
    for A, b in params[:-1]:
        z = np.maximum(z @ A.T + b, 0.0)
        acts.append(z)
    A, b = params[-1]
    out = (z @ A.T + b)[:, 0]
    return out, acts


def _loss_and_grads(params, x, y):
    n = x.shape[0]
    out, acts = _forward(params, x)
    pred = np.clip(out, -1.0, 1.0)
    resid = pred - y
    loss = float(np.mean(resid ** 2))
    # zero subgradient wherever the truncation clamps (boundary counts as
    # clamped) and at the ReLU kink
    live = (np.abs(out) < 1.0).astype(float)
    delta = (2.0 / n) * resid * live
    delta = delta[:, None]
    grads = [None] * len(params)
    for l in reversed(range(len(params))):
        A, _ = params[l]
        grads[l] = (delta.T @ acts[l], delta.sum(axis=0))
        if l > 0:
            delta = (delta @ A) * (acts[l] > 0.0)
    return loss, grads


def _arch_shapes(width: int, depth: int) -> list[tuple[int, int]]:
    if depth == 1:
        return [(1, 1)]
    return [(width, 1)] + [(width, width)] * (depth - 2) + [(1, width)]


def _init_uniform(rng, shapes):
    # scale keeps layer-to-layer signal variance near 1 under ReLU, capped
    # by the weight bound
    return [
        (
            rng.uniform(-s, s, size=shape),
            rng.uniform(-0.05, 0.05, size=shape[0]),
        )
        for shape in shapes
        for s in (min(1.0, math.sqrt(6.0 / shape[1])),)
    ]


def _init_chain(rng, shapes, width, depth):
    """Embed a shallow random net augmented to full depth, so the stack
    passes signal at initialization even when deep and narrow."""
    seedling = random_config(
        int(rng.integers(0, 2**63)), d=1, width=min(width, 3), depth=min(2, depth),
        magnitude=0.9,
    )
    deep = augment_to_depth(seedling, depth)
    params = []
    for (n_out, n_in), (A_src, b_src) in zip(shapes, [(A, b) for A, b in deep.layers]):
        A = np.zeros((n_out, n_in))
        b = np.zeros(n_out)
        A[: A_src.shape[0], : A_src.shape[1]] = A_src
        b[: b_src.shape[0]] = b_src
        params.append((A, b))
    noisy = [
        (
            np.clip(A + rng.uniform(-0.02, 0.02, A.shape), -1.0, 1.0),
            np.clip(b + rng.uniform(-0.02, 0.02, b.shape), -1.0, 1.0),
        )
        for A, b in params
    ]
    return noisy


def fit_erm(
    task: RegressionTask,
    family: FamilySpec,
    restarts: int = 32,
    steps: int = 5000,
    lr: float = 0.01,
    seed: int = 0,
    optimizer: str = "gd",
) -> RegressionRun:
    """Approximate ERM over the truncated family by projected full-batch
    gradient descent, best iterate over seeded restarts.

    Restart 0 starts at exactly zero (constants are then learned through
    the bias path); even restarts use variance-preserving uniform weights;
    odd restarts use the embedded-chain initialization.  The step rule is
    plain descent with the learning rate halved on plateau, or per-entry
    adaptive moments with optimizer="adam"; either way the projection onto
    the weight bound runs after every step.  Runs that go non-finite are
    excluded.  slack is the returned model's risk minus the lowest risk
    seen anywhere in the search; returning the best iterate pins it at 0.
    """
    if family.B != 1.0:
        raise PreconditionError(
            f"the fitting family is weight-bounded at 1, got B={family.B}", B=family.B
        )
    if restarts < 1 or steps < 1:
        raise PreconditionError(
            f"need restarts, steps >= 1, got {restarts}, {steps}",
            restarts=restarts, steps=steps,
        )
    if optimizer not in ("gd", "adam"):
        raise DomainError(f"unknown optimizer {optimizer!r}", optimizer=optimizer)
    x, y = generate_samples(task)
    width = family.W
    depth = family.L
    shapes = _arch_shapes(width, depth)

    best_loss = math.inf
    best_params = None
    best_traj: list[float] = []
    diverged = 0
    children = np.random.SeedSequence(seed).spawn(restarts)
    for r, child in enumerate(children):
        rng = np.random.default_rng(child)
        if r == 0:
            params = [(np.zeros(shape), np.zeros(shape[0])) for shape in shapes]
        elif r % 2 == 0 or width < 2:
            params = _init_uniform(rng, shapes)
        else:
            params = _init_chain(rng, shapes, width, depth)
        m = [(np.zeros_like(A), np.zeros_like(b)) for A, b in params]
        v = [(np.zeros_like(A), np.zeros_like(b)) for A, b in params]
        b1, b2, adam_eps = 0.9, 0.999, 1e-8
        cur_lr = lr
        stall = 0
        run_best = math.inf
        traj: list[float] = []
        bad = False
        for step in range(steps):
            loss, grads = _loss_and_grads(params, x, y)
            traj.append(loss)
            if not math.isfinite(loss):
                bad = True
                break
            if loss < run_best - 1e-12:
                run_best = loss
                stall = 0
            else:
                stall += 1
                if stall >= 100:
                    cur_lr *= 0.5
                    stall = 0
            if loss < best_loss:
                best_loss = loss
                best_params = [(A.copy(), b.copy()) for A, b in params]
                best_traj = traj.copy()
            if optimizer == "adam":
                corr = cur_lr * math.sqrt(1.0 - b2 ** (step + 1)) / (1.0 - b1 ** (step + 1))
                new_params = []
                for l, ((A, b), (gA, gb)) in enumerate(zip(params, grads)):
                    mA, mb = m[l]
                    vA, vb = v[l]
                    mA = b1 * mA + (1 - b1) * gA
                    mb = b1 * mb + (1 - b1) * gb
                    vA = b2 * vA + (1 - b2) * gA * gA
                    vb = b2 * vb + (1 - b2) * gb * gb
                    m[l], v[l] = (mA, mb), (vA, vb)
                    new_params.append(
                        (
                            np.clip(A - corr * mA / (np.sqrt(vA) + adam_eps), -1.0, 1.0),
                            np.clip(b - corr * mb / (np.sqrt(vb) + adam_eps), -1.0, 1.0),
                        )
                    )
                params = new_params
            else:
                params = [
                    (
                        np.clip(A - cur_lr * gA, -1.0, 1.0),
                        np.clip(b - cur_lr * gb, -1.0, 1.0),
                    )
                    for (A, b), (gA, gb) in zip(params, grads)
                ]
        if bad:
            diverged += 1
            continue
        loss, _ = _loss_and_grads(params, x, y)
        if math.isfinite(loss) and loss < best_loss:
            best_loss = loss
            best_params = [(A.copy(), b.copy()) for A, b in params]
            best_traj = traj + [loss]
    if best_params is None:
        raise DomainError("every restart diverged", diverged=diverged)
    cfg = NetworkConfig(best_params)
    achieved = empirical_risk(cfg, x, y)
    slack = max(0.0, achieved - best_loss)
    return RegressionRun(
        family=family,
        config=cfg,
        trajectory=tuple(best_traj),
        achieved_risk=achieved,
        slack=slack,
        diverged=diverged,
        restarts=restarts,
    )


def exact_erm_quantized(
    samples: tuple[np.ndarray, np.ndarray], spec: FamilySpec, cap: int = 1_000_000
) -> tuple[NetworkConfig, float]:
    """Brute-force minimizer of the truncated empirical risk over an
    exactly enumerable family."""
    x, y = samples
    configs, _ = enumerate_configs(spec, cap=cap)
    best_cfg = None
    best_risk = math.inf
    for cfg in configs:
        risk = empirical_risk(cfg, x, y)
        if risk < best_risk:
            best_risk = risk
            best_cfg = cfg
    return best_cfg, best_risk


# -- measurement ----------------------------------------------------------


@dataclass(frozen=True)
class ErrorEstimate:
    value: float
    stderr: float


def prediction_error(
    fitted,
    task: RegressionTask,
    mc_points: int = 4096,
    seed: int = 12345,
    method: str = "auto",
) -> ErrorEstimate:
    """Squared L^2(P) distance between the fitted predictor and the target.

    Uniform P admits a deterministic grid quadrature (stderr 0); anything
    else is Monte-Carlo with the usual standard error.  fitted may be a
    RegressionRun (truncated network predictor) or a bare callable.
    """
    if mc_points < 1000:
        raise PreconditionError(f"need mc_points >= 1000, got {mc_points}", mc_points=mc_points)
    if isinstance(fitted, RegressionRun):
        cfg = fitted.config
        predict = lambda t: _truncate_predictions(evaluate_batch(cfg, t))
    elif callable(fitted):
        predict = fitted
    else:
        raise DomainError(f"cannot predict with {type(fitted).__name__}")
    if method not in ("auto", "grid", "mc"):
        raise DomainError(f"unknown method {method!r}", method=method)
    use_grid = method == "grid" or (method == "auto" and task.P == "uniform")
    if use_grid and task.P != "uniform":
        raise DomainError("grid quadrature needs the uniform law")
    if use_grid:
        xs = np.linspace(0.0, 1.0, mc_points)
        sq = (np.asarray(predict(xs), dtype=float) - np.asarray(task.g(xs), dtype=float)) ** 2
        # trapezoid weights: half weight at the two endpoints
        w = np.full(mc_points, 1.0 / (mc_points - 1))
        w[0] = w[-1] = 0.5 / (mc_points - 1)
        return ErrorEstimate(value=float(np.sum(sq * w)), stderr=0.0)
    rng = np.random.default_rng(np.uint64(seed))
    if task.P == "uniform":
        xs = rng.uniform(0.0, 1.0, mc_points)
    else:
        xs = np.asarray(task.P(rng, mc_points), dtype=float)
    sq = (np.asarray(predict(xs), dtype=float) - np.asarray(task.g(xs), dtype=float)) ** 2
    return ErrorEstimate(
        value=float(np.mean(sq)),
        stderr=float(np.std(sq, ddof=1) / math.sqrt(mc_points)),
    )


def certificate(
    A: float,
    kappa: float,
    delta: float,
    sigma: float,
    R: float,
    logN: float,
    n: int,
    ledger: ConstantsLedger = DEFAULT_LEDGER,
) -> float:
    """Finite-sample prediction-error certificate:
    16(A^2 + kappa) + 64(sigma + delta) delta
    + C_regression (sigma + sigma^2 + R^2)(logN + 1)/n."""
    if not (0 < delta < 0.5):
        raise DomainError(f"need delta in (0, 1/2), got {delta}", delta=delta)
    for nm, v in (("A", A), ("kappa", kappa), ("sigma", sigma), ("R", R), ("logN", logN)):
        if v < 0:
            raise DomainError(f"need {nm} >= 0, got {v}", **{nm: v})
    if n < 1:
        raise PreconditionError(f"need n >= 1, got {n}", n=n)
    return (
        16.0 * (A * A + kappa)
        + 64.0 * (sigma + delta) * delta
        + ledger.C_regression * (sigma + sigma * sigma + R * R) * (logN + 1.0) / n
    )


def rate_fit(errors: Sequence[tuple]) -> tuple[float, float, float]:
    """Least squares of log2(err) on log2(n): (slope, intercept, r2)."""
    if len(errors) < 4:
        raise PreconditionError(f"need at least 4 points, got {len(errors)}", points=len(errors))
    ns = np.array([float(n) for n, _ in errors])
    errs = np.array([float(e) for _, e in errors])
    if np.any(errs <= 0):
        raise DomainError("all errors must be positive for a log-log fit")
    lx, ly = np.log2(ns), np.log2(errs)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


# -- the maxima lemma -----------------------------------------------------


@dataclass(frozen=True)
class Bernoulli:
    """Coin in {0,1}; the V-sample mean is drawn exactly as Binomial/V."""

    p: float = 0.5

    @property
    def mean(self) -> float:
        return self.p

    def sample_mean(self, rng, V: int, size: int) -> np.ndarray:
        return rng.binomial(V, self.p, size=size) / V


@dataclass(frozen=True)
class Uniform01:
    @property
    def mean(self) -> float:
        return 0.5

    def sample_mean(self, rng, V: int, size: int) -> np.ndarray:
        out = np.empty(size)
        chunk = max(1, 10_000_000 // max(V, 1))
        done = 0
        while done < size:
            take = min(chunk, size - done)
            out[done : done + take] = rng.uniform(0, 1, (take, V)).mean(axis=1)
            done += take
        return out


@dataclass(frozen=True)
class MaximaReport:
    estimate: float
    stderr: float
    bound: float
    passed: bool


def maxima_lemma_check(
    U: int, V: int, dist, trials: int = 10_000, seed: int = 0
) -> MaximaReport:
    """Monte-Carlo check that E max_j (mu_j - (2/V) sum_i Z_ji) stays below
    8 log2(U) / V for [0,1]-valued i.i.d. Z."""
    if U < 1 or V < 1:
        raise PreconditionError(f"need U, V >= 1, got U={U}, V={V}", U=U, V=V)
    if trials < 2:
        raise PreconditionError(f"need trials >= 2, got {trials}", trials=trials)
    rng = np.random.default_rng(np.uint64(seed))
    mu = dist.mean
    sups = np.empty(trials)
    for t in range(trials):
        means = dist.sample_mean(rng, V, U)
        sups[t] = np.max(mu - 2.0 * means)
    bound = 8.0 * math.log2(U) / V
    est = float(np.mean(sups))
    se = float(np.std(sups, ddof=1) / math.sqrt(trials))
    return MaximaReport(estimate=est, stderr=se, bound=bound, passed=est <= bound + 3.0 * se)


# -- the rate experiment ---------------------------------------------------


@dataclass(frozen=True)
class RateExperiment:
    """Median prediction error per sample size plus the log-log fit."""

    target: str
    sigma: float
    width: int
    rows: tuple  # (n, depth, median_err, slope_so_far or None)
    errors: dict  # n -> tuple of per-repetition errors
    slope: float
    intercept: float
    r2: float


def run_rate_experiment(
    target: str = "abs",
    sigma: float = 0.1,
    n_list: Sequence[int] = (128, 256, 512, 1024, 2048, 4096, 8192),
    width: int = 8,
    width_const: float = 1.0,
    rate_const: float = 0.0,
    reps: int = 8,
    restarts: int = 8,
    steps: int = 700,
    lr: float = 0.05,
    seed: int = 0,
    optimizer: str = "gd",
) -> RateExperiment:
    """Fit at every n on fresh seeded samples, reps times, take the median
    prediction error, and regress log error on log n."""
    if reps < 1:
        raise PreconditionError(f"need reps >= 1, got {reps}", reps=reps)
    rows = []
    errors: dict[int, tuple] = {}
    medians = []
    root = np.random.SeedSequence(seed)
    for idx, n in enumerate(n_list):
        depth = depth_schedule(n, width_const, rate_const)
        family = FamilySpec(d=1, W=width, L=depth, B=1.0)
        errs = []
        for rep in range(reps):
            task_seed = int(np.random.default_rng(root.spawn(1)[0]).integers(0, 2**63))
            task = make_task(target, sigma, n, seed=task_seed)
            run = fit_erm(task, family, restarts=restarts, steps=steps, lr=lr,
                          seed=task_seed ^ 0x5DEECE66D, optimizer=optimizer)
            est = prediction_error(run, task, mc_points=4097, method="grid")
            errs.append(est.value)
        errors[n] = tuple(errs)
        med = float(np.median(errs))
        medians.append((n, med))
        if idx >= 1:
            lx = np.log2([m[0] for m in medians])
            ly = np.log2([max(m[1], 1e-300) for m in medians])
            slope_so_far = float(np.polyfit(lx, ly, 1)[0])
        else:
            slope_so_far = None
        rows.append((n, depth, med, slope_so_far))
    slope, intercept, r2 = rate_fit(medians)
    return RateExperiment(
        target=target,
        sigma=sigma,
        width=width,
        rows=tuple(rows),
        errors=errors,
        slope=slope,
        intercept=intercept,
        r2=r2,
    )
