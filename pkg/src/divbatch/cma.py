"""CMA-ES core with a one-candidate ask interface.

Implements weighted-recombination CMA-ES with cumulative step-size
adaptation and rank-one plus rank-mu covariance updates, exposed as
``init_cma`` / ``ask_one`` / ``tell`` / ``should_stop`` so a driver can
interleave sampling with candidate filtering.  Candidates are sampled one
at a time; ``tell`` accepts any population of size between mu and lambda,
so drivers that drop candidates can still advance the distribution.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .boxes import Box

__all__ = [
    "AlreadyStopped",
    "CmaParams",
    "CmaState",
    "InsufficientPopulation",
    "InvalidMean",
    "STOP_DEGENERATE",
    "STOP_MAXITER",
    "STOP_TOLFUN",
    "STOP_TOLFUNHIST",
    "STOP_TOLFUNREL",
    "STOP_TOLSTAGNATION",
    "STOP_TOLX",
    "ask_one",
    "init_cma",
    "should_stop",
    "tell",
]

STOP_TOLX = "tolx"
STOP_TOLFUN = "tolfun"
STOP_TOLFUNHIST = "tolfunhist"
STOP_TOLFUNREL = "tolfunrel"
STOP_TOLSTAGNATION = "tolstagnation"
STOP_MAXITER = "maxiter"
STOP_DEGENERATE = "degenerate"

# out-of-box candidates are redrawn this many times before clipping
_RESAMPLE_TRIES = 100
_MAX_CONDITION = 1e14


class InvalidMean(ValueError):
    """Initial mean lies outside the search box."""


class AlreadyStopped(RuntimeError):
    """ask_one called on a state that has met a stopping criterion."""


class InsufficientPopulation(ValueError):
    """tell called with fewer than mu candidates."""


@dataclass(frozen=True)
class CmaParams:
    """Strategy parameters, frozen at initialization.

    Defaults follow the standard parameterization: population size
    ``lambda = 4 + floor(3 ln D)``, ``mu = floor(lambda / 2)`` parents with
    positive log-rank weights, and the usual CSA / rank-one / rank-mu
    learning rates derived from ``mu_eff``.
    """

    dimension: int
    lambda_: int
    mu: int
    weights: np.ndarray
    mu_eff: float
    c_sigma: float
    d_sigma: float
    c_c: float
    c_1: float
    c_mu: float
    sigma0: float = 1.0
    tol_x: float = 1e-11
    tol_fun: float = 1e-11
    tol_fun_hist: float = 1e-12
    tol_fun_rel: float = 0.0
    tol_stagnation: int = 146
    max_iter: int = 0

    @classmethod
    def defaults(cls, dimension: int, lambda_: int | None = None) -> "CmaParams":
        d = float(dimension)
        if lambda_ is None:
            lambda_ = 4 + int(math.floor(3.0 * math.log(dimension)))
        mu = lambda_ // 2
        raw = np.log((lambda_ + 1) / 2.0) - np.log(np.arange(1, mu + 1))
        weights = raw / raw.sum()
        mu_eff = 1.0 / float(np.sum(weights**2))
        c_sigma = (mu_eff + 2.0) / (d + mu_eff + 5.0)
        d_sigma = 1.0 + 2.0 * max(0.0, math.sqrt((mu_eff - 1.0) / (d + 1.0)) - 1.0) + c_sigma
        c_c = (4.0 + mu_eff / d) / (d + 4.0 + 2.0 * mu_eff / d)
        c_1 = 2.0 / ((d + 1.3) ** 2 + mu_eff)
        c_mu = min(1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((d + 2.0) ** 2 + mu_eff))
        return cls(
            dimension=dimension,
            lambda_=lambda_,
            mu=mu,
            weights=weights,
            mu_eff=mu_eff,
            c_sigma=c_sigma,
            d_sigma=d_sigma,
            c_c=c_c,
            c_1=c_1,
            c_mu=c_mu,
            max_iter=1000 * dimension**2,
        )

    def with_overrides(self, **changes) -> "CmaParams":
        return replace(self, **changes)


@dataclass
class CmaState:
    """Mutable sampling distribution plus stop bookkeeping."""

    params: CmaParams
    mean: np.ndarray
    sigma: float
    cov: np.ndarray
    p_sigma: np.ndarray
    p_c: np.ndarray
    rng: np.random.Generator
    iteration: int = 0
    stop_reason: str | None = None
    # eigendecomposition cache, refreshed after every covariance update
    eig_vectors: np.ndarray = field(default=None, repr=False)
    eig_scale: np.ndarray = field(default=None, repr=False)
    degenerate: bool = field(default=False, repr=False)
    last_range: float | None = field(default=None, repr=False)
    first_median: float | None = field(default=None, repr=False)
    best_median: float | None = field(default=None, repr=False)
    hist_best: deque = field(default=None, repr=False)
    stagn_best: deque = field(default=None, repr=False)
    stagn_median: deque = field(default=None, repr=False)

    @property
    def chi_n(self) -> float:
        d = self.params.dimension
        return math.sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d))


def init_cma(
    dimension: int,
    mean: np.ndarray,
    params: CmaParams | None = None,
    seed: int = 0,
    box: Box | None = None,
) -> CmaState:
    """Fresh state centered at ``mean`` with unit step size and identity covariance."""
    if params is None:
        params = CmaParams.defaults(dimension)
    if box is None:
        box = Box.cube(dimension)
    mean = np.asarray(mean, dtype=float)
    if mean.shape != (dimension,):
        raise InvalidMean(f"mean must have shape ({dimension},), got {mean.shape}")
    if not box.contains(mean):
        raise InvalidMean(f"mean {mean} lies outside the box")
    hist_len = 10 + math.ceil(30.0 * dimension / params.lambda_)
    return CmaState(
        params=params,
        mean=mean.copy(),
        sigma=params.sigma0,
        cov=np.eye(dimension),
        p_sigma=np.zeros(dimension),
        p_c=np.zeros(dimension),
        rng=np.random.default_rng(seed),
        eig_vectors=np.eye(dimension),
        eig_scale=np.ones(dimension),
        hist_best=deque(maxlen=hist_len),
        stagn_best=deque(maxlen=2 * params.tol_stagnation),
        stagn_median=deque(maxlen=2 * params.tol_stagnation),
    )


def ask_one(state: CmaState, box: Box | None = None) -> np.ndarray:
    """Draw one candidate from the current distribution, kept inside the box.

    Out-of-box draws are resampled a bounded number of times, then clipped.
    Sampling consumes the state's rng but never changes the distribution.
    """
    if state.stop_reason is not None:
        raise AlreadyStopped(f"state already stopped ({state.stop_reason})")
    if box is None:
        box = Box.cube(state.params.dimension)
    x = state.mean
    for _ in range(_RESAMPLE_TRIES):
        z = state.rng.standard_normal(state.params.dimension)
        x = state.mean + state.sigma * (state.eig_vectors @ (state.eig_scale * z))
        if box.contains(x):
            return x
    return box.clip(x)


def tell(state: CmaState, population: list[tuple[np.ndarray, float]]) -> None:
    """Advance the distribution one generation from evaluated candidates.

    ``population`` holds (x, fitness) pairs, lower fitness better.  Any
    size in [mu, lambda] is accepted; the mu best are recombined with the
    standard weights.
    """
    params = state.params
    n = len(population)
    if n < params.mu:
        raise InsufficientPopulation(f"need at least mu={params.mu} candidates, got {n}")
    if n > params.lambda_:
        raise ValueError(f"population larger than lambda={params.lambda_}: {n}")

    xs = np.asarray([np.asarray(x, dtype=float) for x, _ in population])
    fs = np.asarray([float(f) for _, f in population])
    order = np.argsort(fs, kind="stable")
    parents = xs[order[: params.mu]]
    w = params.weights

    mean_old = state.mean
    sigma = state.sigma
    mean_new = w @ parents
    y_w = (mean_new - mean_old) / sigma

    c_s, d_s = params.c_sigma, params.d_sigma
    c_c, c_1, c_mu = params.c_c, params.c_1, params.c_mu
    mu_eff = params.mu_eff
    dim = params.dimension

    # CSA path in the whitened coordinate system
    cov_inv_half_yw = state.eig_vectors @ ((state.eig_vectors.T @ y_w) / state.eig_scale)
    p_sigma = (1.0 - c_s) * state.p_sigma + math.sqrt(c_s * (2.0 - c_s) * mu_eff) * cov_inv_half_yw
    norm_ps = float(np.linalg.norm(p_sigma))
    chi_n = state.chi_n
    expected = math.sqrt(1.0 - (1.0 - c_s) ** (2 * (state.iteration + 1)))
    h_sigma = 1.0 if norm_ps / expected / chi_n < 1.4 + 2.0 / (dim + 1.0) else 0.0

    p_c = (1.0 - c_c) * state.p_c + h_sigma * math.sqrt(c_c * (2.0 - c_c) * mu_eff) * y_w

    ys = (parents - mean_old) / sigma
    rank_mu = ys.T @ (w[:, None] * ys)
    delta_h = (1.0 - h_sigma) * c_c * (2.0 - c_c)
    cov = (
        (1.0 - c_1 - c_mu) * state.cov
        + c_1 * (np.outer(p_c, p_c) + delta_h * state.cov)
        + c_mu * rank_mu
    )
    cov = (cov + cov.T) / 2.0

    arg = (c_s / d_s) * (norm_ps / chi_n - 1.0)
    sigma = sigma * math.exp(min(arg, 700.0))

    state.mean = mean_new
    state.sigma = sigma
    state.cov = cov
    state.p_sigma = p_sigma
    state.p_c = p_c
    state.iteration += 1

    best = float(fs[order[0]])
    med = float(np.median(fs))
    state.last_range = float(fs.max() - fs.min())
    state.hist_best.append(best)
    state.stagn_best.append(best)
    state.stagn_median.append(med)
    if state.first_median is None:
        state.first_median = med
    state.best_median = med if state.best_median is None else min(state.best_median, med)

    _refresh_eigensystem(state)
    state.stop_reason = should_stop(state)


def _refresh_eigensystem(state: CmaState) -> None:
    if not (np.all(np.isfinite(state.cov)) and math.isfinite(state.sigma) and state.sigma > 0):
        state.degenerate = True
        return
    try:
        vals, vecs = np.linalg.eigh(state.cov)
    except np.linalg.LinAlgError:
        state.degenerate = True
        return
    if not np.all(np.isfinite(vals)) or vals[0] <= 0.0 or vals[-1] / vals[0] > _MAX_CONDITION:
        state.degenerate = True
        return
    state.eig_vectors = vecs
    state.eig_scale = np.sqrt(vals)


def should_stop(state: CmaState) -> str | None:
    """First triggered stopping criterion, or None while the run may continue."""
    params = state.params

    scales = state.sigma * np.sqrt(np.diag(state.cov))
    if np.all(scales < params.tol_x) and np.all(state.sigma * np.abs(state.p_c) < params.tol_x):
        return STOP_TOLX

    if state.last_range is not None and state.hist_best:
        span = max(state.hist_best) - min(state.hist_best)
        if state.last_range < params.tol_fun and span < params.tol_fun:
            return STOP_TOLFUN

    if len(state.hist_best) >= 10:
        span = max(state.hist_best) - min(state.hist_best)
        if span < params.tol_fun_hist:
            return STOP_TOLFUNHIST

    if state.last_range is not None and state.first_median is not None:
        drop = state.first_median - state.best_median
        if state.last_range < params.tol_fun_rel * drop:
            return STOP_TOLFUNREL

    window = params.tol_stagnation
    if len(state.stagn_best) >= 2 * window:
        best = list(state.stagn_best)
        med = list(state.stagn_median)
        if (
            np.median(best[-window:]) >= np.median(best[:window])
            and np.median(med[-window:]) >= np.median(med[:window])
        ):
            return STOP_TOLSTAGNATION

    if state.iteration >= params.max_iter:
        return STOP_MAXITER

    if state.degenerate:
        return STOP_DEGENERATE

    return None
