"""Seedable random-variate layer shared by every sampler in this package.

All randomness flows through an :class:`RngStream`, so a ``(seed, stream_id)``
pair pins down the complete variate sequence of a chain.  Streams with
different ids are statistically independent, which lets e.g. a weight
adjustment step consume its own randomness without perturbing the chain it
decorates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

_MASK64 = (1 << 64) - 1


@dataclass(eq=False)
class RngStream:
    """Deterministic random stream keyed by (seed, stream_id)."""

    seed: int
    stream_id: int = 0
    gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        ss = np.random.SeedSequence(
            entropy=int(self.seed) & _MASK64, spawn_key=(int(self.stream_id),)
        )
        self.gen = np.random.default_rng(ss)

    def substream(self, offset):
        """A fresh independent stream derived from the same seed."""
        return RngStream(self.seed, self.stream_id + offset)


def _require_positive(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(arr > 0):
        raise ValueError(f"{name} must be positive, got {value!r}")
    return arr


def sample_normal(rng, mean=0.0, sd=1.0, size=None):
    _require_positive("sd", sd)
    return rng.gen.normal(mean, sd, size=size)


def sample_beta(rng, a, b, size=None):
    _require_positive("a", a)
    _require_positive("b", b)
    return rng.gen.beta(a, b, size=size)


def sample_gamma(rng, shape, rate=1.0, size=None):
    """Gamma draw in the shape/rate parameterization (mean = shape/rate)."""
    _require_positive("shape", shape)
    _require_positive("rate", rate)
    return rng.gen.gamma(shape, 1.0 / np.asarray(rate, dtype=float), size=size)


def sample_inverse_gamma(rng, shape, scale, size=None):
    """Inverse-gamma draw with density proportional to x^(-shape-1) exp(-scale/x).

    The mean is scale / (shape - 1) for shape > 1.
    """
    _require_positive("shape", shape)
    _require_positive("scale", scale)
    g = rng.gen.gamma(shape, 1.0, size=size)
    return np.asarray(scale, dtype=float) / g


def sample_poisson(rng, rate, size=None):
    _require_positive("rate", rate)
    return rng.gen.poisson(rate, size=size)


def sample_dirichlet(rng, params):
    """Draw a probability vector from a Dirichlet distribution.

    Parameters may be arbitrarily large (counts of the order of a population
    size are routine here); they must all be strictly positive.
    """
    params = np.asarray(params, dtype=float)
    if params.ndim != 1 or params.size < 2:
        raise ValueError("params must be a vector of length >= 2")
    if not np.all(params > 0):
        raise ValueError(f"Dirichlet parameters must be positive, got {params!r}")
    return rng.gen.dirichlet(params)


def sample_categorical(rng, weights):
    """Sample one index proportionally to ``weights`` (need not be normalized)."""
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or weights.size == 0:
        raise ValueError("weights must be a nonempty vector")
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    total = weights.sum()
    if not total > 0:
        raise ValueError("weights must not all be zero")
    cum = np.cumsum(weights)
    u = rng.gen.uniform() * total
    return int(np.searchsorted(cum, u, side="right").clip(0, weights.size - 1))


def sample_categorical_rows(rng, probs):
    """Vectorized categorical sampling, one draw per row of ``probs``.

    Rows must be normalized probability vectors.
    """
    probs = np.asarray(probs, dtype=float)
    cum = np.cumsum(probs, axis=1)
    u = rng.gen.uniform(size=probs.shape[0])
    idx = (u[:, None] > cum).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1)


def sample_truncated_normal(rng, mean, sd, lower, upper, size=None):
    """Normal draw restricted to [lower, upper), robust far into the tails.

    Uses inverse-CDF sampling, reflected so the CDF is always evaluated on
    the side where it is small; that keeps relative precision even for
    intervals many standard deviations from the mean.  Arguments broadcast.
    """
    mean = np.asarray(mean, dtype=float)
    sd = _require_positive("sd", sd)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if not np.all(lower < upper):
        raise ValueError("require lower < upper elementwise")

    shape = np.broadcast_shapes(mean.shape, sd.shape, lower.shape, upper.shape)
    if size is not None:
        shape = np.broadcast_shapes(shape, size if isinstance(size, tuple) else (size,))
    a = np.broadcast_to((lower - mean) / sd, shape)
    b = np.broadcast_to((upper - mean) / sd, shape)
    u = rng.gen.uniform(size=shape)

    z = np.empty(shape, dtype=float)
    # Right-tail intervals are reflected to the left tail where ndtr is accurate.
    right = a >= 0
    fa = np.where(right, ndtr(-b), ndtr(a))
    fb = np.where(right, ndtr(-a), ndtr(b))
    p = fa + u * (fb - fa)
    # Degenerate slivers where both CDF values coincide in double precision.
    p = np.clip(p, np.finfo(float).tiny, 1.0)
    z = ndtri(p)
    z = np.where(right, -z, z)
    z = np.clip(z, a, b)

    out = np.broadcast_to(mean, shape) + np.broadcast_to(sd, shape) * z
    out = np.clip(out, np.broadcast_to(lower, shape), None)
    hi = np.broadcast_to(upper, shape)
    inside = np.where(np.isfinite(hi), np.nextafter(hi, -np.inf), hi)
    out = np.minimum(out, inside)
    return out if out.shape else float(out)


def cholesky_with_jitter(cov, max_doublings=8):
    """Cholesky factor of a covariance, adding diagonal jitter if needed.

    Starts at 1e-10 * trace/dim and doubles up to ``max_doublings`` times
    before giving up.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError("covariance must be a square matrix")
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    jitter = 1e-10 * np.trace(cov) / cov.shape[0]
    if jitter <= 0:
        jitter = 1e-10
    eye = np.eye(cov.shape[0])
    for _ in range(max_doublings):
        try:
            return np.linalg.cholesky(cov + jitter * eye)
        except np.linalg.LinAlgError:
            jitter *= 2.0
    raise ValueError("covariance not positive definite even after jitter")


def sample_mvn_chol(rng, mean, cov):
    """Multivariate normal draw via a (jittered) Cholesky factor."""
    mean = np.asarray(mean, dtype=float)
    L = cholesky_with_jitter(cov)
    if mean.shape != (L.shape[0],):
        raise ValueError("mean and covariance dimensions disagree")
    z = rng.gen.standard_normal(mean.size)
    return mean + L @ z
