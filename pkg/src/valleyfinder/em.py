"""Weighted univariate Gaussian mixture fitting by expectation maximization.

Works in log2-gap space throughout. The EM loop is written directly (log-domain
E-step with log-sum-exp, closed-form weighted M-step) so its behaviour under
restarts, variance flooring and degeneracy is fully under our control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._validation import as_sample_array, require_min_samples
from .errors import DataError, NumericalError
from .types import (
    BREAK_BOUNDARY_LOG2,
    LOG2_HOUR,
    FitConfig,
    Label,
    MixtureComponent,
    MixtureFit,
)

_LOG_2PI = math.log(2.0 * math.pi)

# A component whose weight falls below this has collapsed onto nothing; the
# run is discarded during restart selection.
COLLAPSE_WEIGHT = 1e-6

# Tolerance for the EM monotonicity guarantee (floating-point slack only).
MONOTONIC_SLACK = 1e-9


def _param_arrays(components) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    means = np.array([c.mean for c in components], dtype=np.float64)
    stddevs = np.array([c.stddev for c in components], dtype=np.float64)
    weights = np.array([c.weight for c in components], dtype=np.float64)
    return means, stddevs, weights


def _log_weighted_density(xs: np.ndarray, means, stddevs, weights) -> np.ndarray:
    """(n, k) matrix of ln(lambda_j * phi(x_i; mu_j, sigma_j))."""
    z = (xs[:, None] - means[None, :]) / stddevs[None, :]
    return np.log(weights)[None, :] - np.log(stddevs)[None, :] - 0.5 * _LOG_2PI - 0.5 * z * z


def _logsumexp_rows(lp: np.ndarray) -> np.ndarray:
    m = lp.max(axis=1)
    return m + np.log(np.exp(lp - m[:, None]).sum(axis=1))


def normal_pdf(x, mean: float, stddev: float):
    """Gaussian density; the single phi implementation every consumer shares."""
    z = (np.asarray(x, dtype=np.float64) - mean) / stddev
    return np.exp(-0.5 * z * z) / (stddev * math.sqrt(2.0 * math.pi))


def weighted_density(components, x):
    """Total mixture density sum_j lambda_j phi(x; mu_j, sigma_j)."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x, dtype=np.float64)
    for c in components:
        out = out + c.weight * normal_pdf(x, c.mean, c.stddev)
    return out


def responsibilities(xs, components) -> np.ndarray:
    """Posterior component memberships, one row per sample, rows summing to 1."""
    arr = as_sample_array(xs)
    means, stddevs, weights = _param_arrays(components)
    lp = _log_weighted_density(arr, means, stddevs, weights)
    return np.exp(lp - _logsumexp_rows(lp)[:, None])


def log_likelihood(components, xs) -> float:
    """Sum over xs of ln(mixture density), log-sum-exp stabilized; empty xs -> 0."""
    arr = as_sample_array(xs)
    if arr.size == 0:
        return 0.0
    means, stddevs, weights = _param_arrays(components)
    lp = _log_weighted_density(arr, means, stddevs, weights)
    return float(_logsumexp_rows(lp).sum())


def bic_value(k: int, n: float, ll: float) -> float:
    """Bayesian information criterion for a k-component univariate mixture."""
    return (3.0 * k - 1.0) * math.log(n) - 2.0 * ll


def bic(fit: MixtureFit) -> float:
    if fit.n <= 0:
        raise DataError("bic requires a fit over at least one sample")
    return bic_value(fit.k, fit.n, fit.log_likelihood)


def init_params(xs, k: int, seed: int, strategy: str = "quantile", sigma_floor: float = 1e-3):
    """Initial components for one EM run.

    quantile: k equal-count blocks of the sorted data, one component per block.
    random: component means at data quantiles jittered by the seeded RNG, a
    shared spread estimate, equal weights.
    """
    arr = as_sample_array(xs)
    if not 2 <= k <= 4:
        raise DataError(f"k must be in [2, 4], got {k}")
    require_min_samples(arr, k)
    floor = float(sigma_floor)

    if strategy == "quantile":
        blocks = np.array_split(np.sort(arr), k)
        means = [float(b.mean()) for b in blocks]
        stddevs = [max(float(b.std()), floor) for b in blocks]
    elif strategy == "random":
        rng = np.random.default_rng(seed)
        base = (np.arange(k) + 0.5) / k
        qs = np.clip(base + rng.uniform(-0.4, 0.4, size=k) / k, 0.0, 1.0)
        means = sorted(float(v) for v in np.quantile(arr, qs))
        spread = max(float(arr.std()) / k, floor)
        stddevs = [spread] * k
    else:
        raise DataError(f"unknown init strategy {strategy!r}")

    weight = 1.0 / k
    return [MixtureComponent(mean=m, stddev=s, weight=weight) for m, s in zip(means, stddevs)]


@dataclass
class _RunResult:
    means: np.ndarray
    stddevs: np.ndarray
    weights: np.ndarray
    log_likelihood: float
    iterations: int
    converged: bool
    degenerate: bool  # hit the sigma floor at some point
    collapsed: bool  # lost a component entirely; unusable
    history: list[float]


def _m_step(xs: np.ndarray, resp: np.ndarray, sigma_floor: float):
    n = xs.size
    counts = resp.sum(axis=0)
    collapsed = bool((counts / n < COLLAPSE_WEIGHT).any())
    counts = np.maximum(counts, 1e-300)
    weights = counts / n
    means = (resp * xs[:, None]).sum(axis=0) / counts
    variances = (resp * (xs[:, None] - means[None, :]) ** 2).sum(axis=0) / counts
    stddevs = np.sqrt(variances)
    hit_floor = bool((stddevs < sigma_floor).any())
    stddevs = np.maximum(stddevs, sigma_floor)
    return means, stddevs, weights, hit_floor, collapsed


def _run_em(xs: np.ndarray, init, config: FitConfig) -> _RunResult:
    means, stddevs, weights = _param_arrays(init)
    degenerate = bool((stddevs <= config.sigma_floor).any())
    collapsed = False
    converged = False
    iterations = 0
    history: list[float] = []
    ll = -math.inf

    while iterations < config.max_iter:
        lp = _log_weighted_density(xs, means, stddevs, weights)
        lse = _logsumexp_rows(lp)
        ll = float(lse.sum())
        if history and ll < history[-1] - MONOTONIC_SLACK:
            raise NumericalError(
                f"log-likelihood decreased from {history[-1]} to {ll} at iteration {iterations}"
            )
        if history and abs(ll - history[-1]) <= config.rel_tol * max(1.0, abs(history[-1])):
            history.append(ll)
            converged = True
            break
        history.append(ll)

        resp = np.exp(lp - lse[:, None])
        means, stddevs, weights, hit_floor, collapsed = _m_step(xs, resp, config.sigma_floor)
        degenerate = degenerate or hit_floor
        if collapsed:
            break
        iterations += 1

    if not converged and not collapsed:
        # report the likelihood of the final parameters, not the stale one
        lp = _log_weighted_density(xs, means, stddevs, weights)
        ll = float(_logsumexp_rows(lp).sum())
        history.append(ll)

    return _RunResult(means, stddevs, weights, ll, iterations, converged, degenerate, collapsed, history)


def _restart_seed(seed: int, restart: int) -> np.random.Generator:
    return np.random.default_rng([seed, restart])


def em_fit(xs, config: FitConfig) -> MixtureFit:
    """Best-of-restarts EM fit over log2 gaps.

    Restart 0 uses config.init_strategy; later restarts draw fresh random
    initializations, each seeded deterministically from (config.seed, restart).
    Collapsed runs (a weight below 1e-6) are discarded; sigma-floor runs are
    kept but flagged degenerate. The winner is the highest final
    log-likelihood, ties resolved by restart index.
    """
    arr = as_sample_array(xs)
    require_min_samples(arr, config.k)

    best: _RunResult | None = None
    for restart in range(config.restarts):
        strategy = config.init_strategy if restart == 0 else "random"
        # derive an int seed for init jitter from the restart stream
        init_seed = int(_restart_seed(config.seed, restart).integers(0, 2**31 - 1))
        init = init_params(arr, config.k, init_seed, strategy=strategy, sigma_floor=config.sigma_floor)
        run = _run_em(arr, init, config)
        if run.collapsed:
            continue
        if best is None or run.log_likelihood > best.log_likelihood:
            best = run

    if best is None:
        raise NumericalError(
            f"all {config.restarts} EM restarts collapsed (k={config.k} too rich for this data)"
        )

    order = np.lexsort((best.stddevs, best.means))
    weights = best.weights[order]
    weights = weights / weights.sum()
    components = tuple(
        MixtureComponent(mean=float(best.means[i]), stddev=float(best.stddevs[i]), weight=float(w))
        for i, w in zip(order, weights)
    )
    try:
        return MixtureFit(
            components=components,
            log_likelihood=best.log_likelihood,
            n=int(arr.size),
            iterations=best.iterations,
            converged=best.converged,
            seed=config.seed,
            degenerate=best.degenerate,
        )
    except ValueError as exc:
        # e.g. two components converged onto the same point on constant data
        raise NumericalError(f"degenerate fit: {exc}") from exc


def label_components(fit: MixtureFit) -> MixtureFit:
    """Attach cluster roles by mean time scale.

    Components with means under one hour form the within group (largest mean
    WITHIN, any faster ones SHORT_WITHIN); the rest are BETWEEN up to the
    break boundary (~one month) and BREAK beyond it. If nothing sits under an
    hour the smallest-mean component anchors the within group.
    """
    comps = list(fit.components)
    labels: dict[int, Label] = {}
    within_idx = [i for i, c in enumerate(comps) if c.mean < LOG2_HOUR]
    if within_idx:
        for i in within_idx:
            labels[i] = Label.SHORT_WITHIN
        labels[within_idx[-1]] = Label.WITHIN
    else:
        labels[0] = Label.WITHIN
    for i, c in enumerate(comps):
        if i in labels:
            continue
        labels[i] = Label.BREAK if c.mean >= BREAK_BOUNDARY_LOG2 else Label.BETWEEN
    relabeled = tuple(replace(c, label=labels[i]) for i, c in enumerate(comps))
    return replace(fit, components=relabeled)
