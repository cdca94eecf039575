"""Blocked Gibbs sampler for a truncated stick-breaking mixture of normals.

The model places mass on at most ``trunc`` components:

    f(y) = sum_h weights[h] * Normal(y | means[h], variances[h])

with stick-breaking weights built from Beta(1, alpha) fractions and
conjugate normal / inverse-gamma priors on the component parameters.  One
:func:`gibbs_sweep` updates, in order: allocations, sticks, component
parameters, and the concentration alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import samplers
from .survey import CONTINUOUS, SurveySample

# Allocation probabilities for components whose log density trails the row
# maximum by more than this are flushed to exact zero.
_LOG_PROB_CUTOFF = 700.0

_STICK_EPS = 1e-15


@dataclass(frozen=True)
class DpmmPriors:
    """Hyperparameters of the truncated mixture."""

    trunc: int
    alpha_shape: float = 0.25
    alpha_rate: float = 0.25
    mu_mean: float = 0.0
    mu_var: float = 1.0
    tau2_shape: float = 2.0
    tau2_scale: float = 1.0

    def __post_init__(self):
        if self.trunc < 2:
            raise ValueError("truncation level must be at least 2")
        for name in ("alpha_shape", "alpha_rate", "mu_var", "tau2_shape", "tau2_scale"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def from_data(cls, y, trunc=20, alpha_shape=0.25, alpha_rate=0.25,
                  tau2_shape=2.0, tau2_scale_divisor=2.0):
        """Data-driven defaults: means centered on the sample mean with the
        sample variance, and component variances with prior mean
        ``var(y) / tau2_scale_divisor``."""
        y = np.asarray(y, dtype=float)
        var = float(np.var(y))
        if var <= 0:
            var = 1.0
        return cls(
            trunc=trunc,
            alpha_shape=alpha_shape,
            alpha_rate=alpha_rate,
            mu_mean=float(np.mean(y)),
            mu_var=var,
            tau2_shape=tau2_shape,
            tau2_scale=var / tau2_scale_divisor,
        )


@dataclass(frozen=True)
class MixtureState:
    """One Gibbs draw: sticks, mixture weights, component parameters,
    per-record allocations, and the concentration."""

    sticks: np.ndarray      # stick fractions, last one pinned to 1
    weights: np.ndarray     # stick-breaking mixture weights
    means: np.ndarray
    variances: np.ndarray
    alloc: np.ndarray       # component index per record, 0-based
    alpha: float

    @property
    def trunc(self):
        return len(self.weights)

    def component_counts(self):
        return np.bincount(self.alloc, minlength=self.trunc)


def stick_weights(sticks):
    """Mixture weights from stick fractions: w_h = V_h * prod_{l<h} (1 - V_l)."""
    sticks = np.asarray(sticks, dtype=float)
    remaining = np.concatenate(([1.0], np.cumprod(1.0 - sticks[:-1])))
    return sticks * remaining


def normal_logpdf(x, mean, var):
    return -0.5 * ((x - mean) ** 2 / var + np.log(var)) - 0.5 * math.log(2.0 * math.pi)


def init_state(sample, priors, rng):
    """Initial state: uniform allocations, prior component parameters,
    Beta(1, alpha) sticks with alpha from its prior."""
    if isinstance(sample, SurveySample):
        if sample.space != CONTINUOUS:
            raise ValueError(
                "sample holds count data; fit it through the rounded-kernel "
                "machinery in svymix.counts instead"
            )
        n = len(sample)
    else:
        n = len(np.asarray(sample))
    if n == 0:
        raise ValueError("sample must be nonempty")
    return init_state_from_size(n, priors, rng)


def init_state_from_size(n, priors, rng):
    H = priors.trunc
    alpha = float(samplers.sample_gamma(rng, priors.alpha_shape, priors.alpha_rate))
    sticks = np.ones(H)
    sticks[:-1] = samplers.sample_beta(rng, 1.0, alpha, size=H - 1)
    means = samplers.sample_normal(rng, priors.mu_mean, math.sqrt(priors.mu_var), size=H)
    variances = samplers.sample_inverse_gamma(rng, priors.tau2_shape, priors.tau2_scale, size=H)
    alloc = rng.gen.integers(0, H, size=n)
    return MixtureState(
        sticks=sticks,
        weights=stick_weights(sticks),
        means=means,
        variances=variances,
        alloc=alloc,
        alpha=alpha,
    )


def allocation_probs(state, y):
    """Posterior allocation probabilities, one row per record.

    Computed in log space with per-row max subtraction; components trailing
    the row maximum by more than 700 nats get probability exactly 0.
    """
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        logw = np.log(state.weights)
    logp = logw[None, :] + normal_logpdf(
        y[:, None], state.means[None, :], state.variances[None, :]
    )
    top = logp.max(axis=1, keepdims=True)
    rel = logp - top
    probs = np.where(rel < -_LOG_PROB_CUTOFF, 0.0, np.exp(rel))
    return probs / probs.sum(axis=1, keepdims=True)


def update_allocations(state, y, rng):
    probs = allocation_probs(state, y)
    alloc = samplers.sample_categorical_rows(rng, probs)
    return replace(state, alloc=alloc)


def update_sticks(state, rng):
    """Conjugate stick update: V_h ~ Beta(1 + n_h, alpha + n_{>h})."""
    H = state.trunc
    counts = state.component_counts()
    tail = np.concatenate((np.cumsum(counts[::-1])[::-1][1:], [0.0]))
    sticks = np.ones(H)
    sticks[:-1] = samplers.sample_beta(
        rng, 1.0 + counts[:-1], state.alpha + tail[:-1]
    )
    return replace(state, sticks=sticks, weights=stick_weights(sticks))


def update_components(state, y, priors, rng):
    """Conjugate normal / inverse-gamma refresh of every component.

    Empty components come out as fresh prior draws, which is what keeps the
    truncated sampler mixing over unused slots.
    """
    y = np.asarray(y, dtype=float)
    H = state.trunc
    counts = state.component_counts().astype(float)
    sums = np.bincount(state.alloc, weights=y, minlength=H)

    post_var = 1.0 / (1.0 / priors.mu_var + counts / state.variances)
    post_mean = post_var * (priors.mu_mean / priors.mu_var + sums / state.variances)
    means = samplers.sample_normal(rng, post_mean, np.sqrt(post_var))

    resid_sq = np.bincount(
        state.alloc, weights=(y - means[state.alloc]) ** 2, minlength=H
    )
    variances = samplers.sample_inverse_gamma(
        rng, priors.tau2_shape + 0.5 * counts, priors.tau2_scale + 0.5 * resid_sq
    )
    return replace(state, means=means, variances=variances)


def update_concentration(state, priors, rng):
    """Gamma update for alpha given the sticks, clamping 1 - V at 1e-15."""
    one_minus = np.clip(1.0 - state.sticks[:-1], _STICK_EPS, None)
    rate = priors.alpha_rate - np.log(one_minus).sum()
    alpha = float(samplers.sample_gamma(rng, priors.alpha_shape + state.trunc - 1, rate))
    return replace(state, alpha=alpha)


def gibbs_sweep(state, y, priors, rng):
    """One full blocked sweep: allocations, sticks, components, concentration."""
    state = update_allocations(state, y, rng)
    state = update_sticks(state, rng)
    state = update_components(state, y, priors, rng)
    state = update_concentration(state, priors, rng)
    return state


def mixture_density(weights, means, variances, grid):
    """Pointwise sum_h weights[h] * Normal(grid | means[h], variances[h])."""
    grid = np.asarray(grid, dtype=float)
    z2 = (grid[:, None] - means[None, :]) ** 2 / variances[None, :]
    kernels = np.exp(-0.5 * z2) / np.sqrt(2.0 * math.pi * variances[None, :])
    return kernels @ np.asarray(weights, dtype=float)


def density_at(state, grid):
    """Mixture density of ``state`` evaluated on ``grid``."""
    return mixture_density(state.weights, state.means, state.variances, grid)
