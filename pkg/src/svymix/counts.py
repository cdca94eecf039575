"""Rounded-kernel extension of the mixture sampler to count data.

An observed count y corresponds to a latent continuous value falling in the
half-open cell [a_y, a_{y+1}) of a cut-point sequence.  The latent values
follow the truncated stick-breaking normal mixture, so one sweep is: impute
latents from their truncated-normal conditionals, then run the continuous
blocked Gibbs sweep on the imputed values.

Two cut-point schemes are provided: plain integers (a_k = k for k >= 1) and
log cut-points (a_k = log k), the latter suited to heavily right-skewed
counts.  Both set a_0 = -infinity so every scheme puts zero mass on negative
counts by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from . import dpmm
from .samplers import sample_truncated_normal


@dataclass(frozen=True)
class CutpointScheme:
    kind: str  # "integer" or "log"

    def __post_init__(self):
        if self.kind not in ("integer", "log"):
            raise ValueError(f"unknown cut-point scheme {self.kind!r}")

    def edges(self, k_max):
        """Cut points a_0 .. a_{k_max+1} (length k_max + 2, a_0 = -inf)."""
        k = np.arange(1, k_max + 2, dtype=float)
        upper = np.log(k) if self.kind == "log" else k
        return np.concatenate(([-np.inf], upper))

    def latent_proxy(self, counts):
        """Deterministic latent stand-ins used for initialization and for
        data-driven prior moments; always interior to each count's cell."""
        counts = np.asarray(counts, dtype=float)
        return np.log(counts + 0.5) if self.kind == "log" else counts + 0.5


INTEGER_CUTPOINTS = CutpointScheme("integer")
LOG_CUTPOINTS = CutpointScheme("log")


def count_interval(y, scheme):
    """The latent cell [a_y, a_{y+1}) of an observed count."""
    y = int(y)
    if y < 0:
        raise ValueError(f"counts must be nonnegative, got {y}")
    edges = scheme.edges(y)
    return float(edges[y]), float(edges[y + 1])


def sample_latents(counts, state, scheme, rng):
    """Impute latent values: component-h normals truncated to each count's cell."""
    counts = np.asarray(counts, dtype=np.int64)
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    edges = scheme.edges(int(counts.max()))
    lower = edges[counts]
    upper = edges[counts + 1]
    mean = state.means[state.alloc]
    sd = np.sqrt(state.variances[state.alloc])
    return sample_truncated_normal(rng, mean, sd, lower, upper)


def rounded_kernel_sweep(counts, state, scheme, priors, rng):
    """One sweep of the count sampler: impute latents, then the continuous sweep.

    Returns (latents, state).
    """
    latents = sample_latents(counts, state, scheme, rng)
    state = dpmm.gibbs_sweep(state, latents, priors, rng)
    return latents, state


def pmf_from_weights(weights, state, scheme, k_max):
    """Probability of each count 0..k_max under the given mixture weights.

    pr(y = k) = sum_h w_h * [Phi((a_{k+1}-mu_h)/tau_h) - Phi((a_k-mu_h)/tau_h)].
    Mass beyond k_max is not included here; see :func:`tail_mass`.
    """
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    weights = np.asarray(weights, dtype=float)
    edges = scheme.edges(k_max)
    sd = np.sqrt(state.variances)
    z = (edges[None, :] - state.means[:, None]) / sd[:, None]
    cdf = ndtr(z)
    cell = cdf[:, 1:] - cdf[:, :-1]
    return np.clip(weights @ cell, 0.0, None)


def pmf_from_state(state, adjusted, scheme, k_max):
    """PMF over 0..k_max using the adjusted weights (or a raw state's weights
    when ``adjusted`` is None)."""
    weights = state.weights if adjusted is None else adjusted.weights
    return pmf_from_weights(weights, state, scheme, k_max)


def tail_mass(state, weights, scheme, k_max):
    """Probability mass on counts strictly greater than k_max."""
    edges = scheme.edges(k_max)
    sd = np.sqrt(state.variances)
    upper = (edges[-1] - state.means) / sd
    return float(np.asarray(weights, dtype=float) @ (1.0 - ndtr(upper)))


def log_transform_competitor(counts):
    """Shifted log transform y* = log(y + 0.5) applied before fitting the
    continuous regression competitors to count data."""
    counts = np.asarray(counts, dtype=float)
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    return np.log(counts + 0.5)


def pmf_from_normal(mean, sd, k_max):
    """Count pmf of a normal on the log scale via pr{log k < y* <= log(k+1)}.

    ``mean`` and ``sd`` may be arrays; the pmf is returned with a trailing
    axis of length k_max + 1.
    """
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    edges = LOG_CUTPOINTS.edges(k_max)
    z = (edges.reshape((1,) * mean.ndim + (-1,)) - mean[..., None]) / sd[..., None]
    cdf = ndtr(z)
    return cdf[..., 1:] - cdf[..., :-1]
