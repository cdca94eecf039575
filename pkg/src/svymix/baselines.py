"""Regression competitors that model the response through the design.

Three model-based estimators, each fit by Gibbs sampling and each producing
a population density by mixing its per-stratum predictive normals with the
stratum shares recovered from the weights (share_m proportional to w_m * n_m):

* ``ht``: response proportional to the inclusion probability, with
  heteroscedastic errors scaled by it.
* ``re``: quadratic polynomial in the inclusion probability plus exchangeable
  stratum random effects, same heteroscedastic errors.
* ``gp``: stratum-level function of the log weight with an exponential
  covariance Gaussian-process prior and homoscedastic errors.

Count responses go through the shifted-log transform first; the predictive
normals then map back to count probabilities through the log cut points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from . import samplers
from .adjust import summarize_posterior
from .counts import pmf_from_normal
from .dpmm import mixture_density
from .samplers import cholesky_with_jitter


@dataclass(frozen=True)
class StratumDesign:
    """Per-stratum design quantities recovered from a sample."""

    ids: np.ndarray          # sorted stratum ids
    weights: np.ndarray      # the (common) survey weight per stratum
    sizes: np.ndarray        # records per stratum
    shares: np.ndarray       # estimated population shares w_m * n_m / sum(w)
    index: np.ndarray        # stratum position per record
    pis: np.ndarray          # inclusion probabilities 1 / w_m

    @property
    def n_strata(self):
        return len(self.ids)

    @property
    def log_weights(self):
        return np.log(self.weights)


def stratum_design(sample):
    ids, index = np.unique(sample.strata, return_inverse=True)
    weights = np.zeros(len(ids))
    sizes = np.zeros(len(ids), dtype=np.int64)
    for pos in range(len(ids)):
        mask = index == pos
        w = sample.weights[mask]
        if not np.allclose(w, w[0]):
            raise ValueError(f"stratum {ids[pos]}: weights are not constant")
        weights[pos] = w[0]
        sizes[pos] = mask.sum()
    mass = weights * sizes
    return StratumDesign(
        ids=ids,
        weights=weights,
        sizes=sizes,
        shares=mass / mass.sum(),
        index=index,
        pis=1.0 / weights,
    )


@dataclass(frozen=True)
class HtState:
    beta: float
    sigma2: float


@dataclass(frozen=True)
class ReState:
    beta: np.ndarray        # (intercept, linear, quadratic) coefficients
    gamma: np.ndarray       # stratum effects
    sigma2: float
    tau2: float


@dataclass(frozen=True)
class GpState:
    mu: np.ndarray          # stratum-level function values
    beta: float
    sigma2: float
    tau2: float
    kappa: float


def _response(sample, values=None):
    y = np.asarray(sample.values if values is None else values, dtype=float)
    var = float(np.var(y))
    return y, (var if var > 0 else 1.0)


def fit_ht(sample, schedule, rng, values=None):
    """Gibbs fit of y_i = beta * pi_i + eps_i with eps_i ~ N(0, pi_i^2 sigma^2).

    Dividing by pi_i gives iid N(beta, sigma^2) observations, so both updates
    are conjugate.  Returns the kept states.
    """
    y, s2 = _response(sample, values)
    design = stratum_design(sample)
    z = y / design.pis[design.index]
    n = len(z)

    beta = float(z.mean())
    sigma2 = float(np.var(z)) or 1.0
    kept = []
    for sweep in range(schedule.burnin + schedule.iters):
        prec = n / sigma2 + 1.0 / s2
        mean = (z.sum() / sigma2) / prec
        beta = float(samplers.sample_normal(rng, mean, math.sqrt(1.0 / prec)))
        resid = z - beta
        sigma2 = float(
            samplers.sample_inverse_gamma(
                rng, 2.0 + 0.5 * n, 0.5 * s2 + 0.5 * float(resid @ resid)
            )
        )
        if _keep(sweep, schedule):
            kept.append(HtState(beta=beta, sigma2=sigma2))
    return kept


def fit_re(sample, schedule, rng, values=None):
    """Gibbs fit of the quadratic regression with stratum random effects."""
    design = stratum_design(sample)
    if design.n_strata < 2:
        raise ValueError("random-effects model needs at least 2 strata")
    y, s2 = _response(sample, values)
    pis = design.pis[design.index]
    z = y / pis
    n = len(z)
    M = design.n_strata

    # Model in rescaled form: z_i = x_i beta / pi_i + gamma_m / pi_i + eps_i
    # with eps_i ~ N(0, sigma^2), which restores conjugacy.
    X = np.column_stack([np.ones(n), pis, pis**2]) / pis[:, None]
    inv_pi = 1.0 / pis
    xtx = X.T @ X
    group_sq = np.bincount(design.index, weights=inv_pi**2, minlength=M)

    beta = np.linalg.solve(xtx + np.eye(3) / s2, X.T @ z)
    gamma = np.zeros(M)
    sigma2 = float(np.var(z - X @ beta)) or 1.0
    tau2 = 0.5 * s2

    kept = []
    for sweep in range(schedule.burnin + schedule.iters):
        resid = z - gamma[design.index] * inv_pi
        prec = xtx / sigma2 + np.eye(3) / s2
        mean = np.linalg.solve(prec, X.T @ resid / sigma2)
        cov_chol = cholesky_with_jitter(np.linalg.inv(prec))
        beta = mean + cov_chol @ rng.gen.standard_normal(3)

        resid = z - X @ beta
        g_prec = group_sq / sigma2 + 1.0 / tau2
        g_mean = np.bincount(design.index, weights=resid * inv_pi, minlength=M)
        g_mean = (g_mean / sigma2) / g_prec
        gamma = g_mean + rng.gen.standard_normal(M) / np.sqrt(g_prec)

        resid = z - X @ beta - gamma[design.index] * inv_pi
        sigma2 = float(
            samplers.sample_inverse_gamma(
                rng, 2.0 + 0.5 * n, 0.5 * s2 + 0.5 * float(resid @ resid)
            )
        )
        tau2 = float(
            samplers.sample_inverse_gamma(
                rng, 2.0 + 0.5 * M, 0.5 * s2 + 0.5 * float(gamma @ gamma)
            )
        )
        if _keep(sweep, schedule):
            kept.append(ReState(beta=beta.copy(), gamma=gamma.copy(),
                                sigma2=sigma2, tau2=tau2))
    return kept


def _gp_corr(x, kappa):
    return np.exp(-kappa * np.abs(x[:, None] - x[None, :]))


def fit_gp(sample, schedule, rng, values=None, kappa_proposal_sd=0.3):
    """Gibbs fit of the Gaussian-process regression on log survey weights.

    The stratum-level function gets a blocked multivariate-normal update;
    beta, sigma^2 and tau^2 are conjugate; the correlation decay kappa moves
    by random-walk Metropolis on its log with a Ga(1, 2) prior.
    Strata sharing a weight are merged into one node.
    """
    design = stratum_design(sample)
    y, s2 = _response(sample, values)

    # Merge strata with identical weights: the covariance would be singular.
    node_w, node_of = np.unique(design.weights, return_inverse=True)
    if len(node_w) < 2:
        raise ValueError("gp model needs at least 2 distinct stratum weights")
    x = np.log(node_w)
    obs_node = node_of[design.index]
    M = len(node_w)
    n = len(y)
    counts = np.bincount(obs_node, minlength=M).astype(float)
    sums = np.bincount(obs_node, weights=y, minlength=M)

    mu = sums / counts
    beta = 0.0
    sigma2 = float(np.var(y - mu[obs_node])) or 1.0
    tau2 = float(np.var(mu)) or 1.0
    kappa = 0.5

    def corr_chol(k):
        return cholesky_with_jitter(_gp_corr(x, k))

    L_R = corr_chol(kappa)
    kept = []
    for sweep in range(schedule.burnin + schedule.iters):
        # Stratum-level function values given everything else.
        cov_inv = cho_solve((L_R, True), np.eye(M)) / tau2
        prec = cov_inv + np.diag(counts / sigma2)
        L_prec = cholesky_with_jitter(prec)
        rhs = cov_inv @ (beta * x) + sums / sigma2
        mean = cho_solve((L_prec, True), rhs)
        mu = mean + solve_triangular(L_prec.T, rng.gen.standard_normal(M), lower=False)

        # Mean slope of the process.
        xcx = float(x @ (cov_inv @ x))
        b_prec = xcx + 1.0 / s2
        b_mean = float(x @ (cov_inv @ mu)) / b_prec
        beta = float(samplers.sample_normal(rng, b_mean, math.sqrt(1.0 / b_prec)))

        resid = y - mu[obs_node]
        sigma2 = float(
            samplers.sample_inverse_gamma(
                rng, 2.0 + 0.5 * n, 0.5 * s2 + 0.5 * float(resid @ resid)
            )
        )

        dev = mu - beta * x
        quad = float(dev @ cho_solve((L_R, True), dev))
        tau2 = float(
            samplers.sample_inverse_gamma(rng, 2.0 + 0.5 * M, 0.5 * s2 + 0.5 * quad)
        )

        # Metropolis step for kappa on the log scale, prior Ga(1, 2).
        log_kappa_new = math.log(kappa) + kappa_proposal_sd * rng.gen.standard_normal()
        kappa_new = math.exp(log_kappa_new)
        L_new = corr_chol(kappa_new)
        log_accept = (
            _gp_mu_loglik(dev, L_new, tau2)
            - _gp_mu_loglik(dev, L_R, tau2)
            - 2.0 * (kappa_new - kappa)
            + (log_kappa_new - math.log(kappa))
        )
        if math.log(rng.gen.uniform()) < log_accept:
            kappa = kappa_new
            L_R = L_new

        if _keep(sweep, schedule):
            kept.append(GpState(mu=mu.copy(), beta=beta, sigma2=sigma2,
                                tau2=tau2, kappa=kappa))

    return kept, node_of


def _gp_mu_loglik(dev, L_R, tau2):
    M = len(dev)
    half = solve_triangular(L_R, dev, lower=True)
    logdet = 2.0 * np.log(np.diag(L_R)).sum() + M * math.log(tau2)
    return -0.5 * (logdet + float(half @ half) / tau2)


def _keep(sweep, schedule):
    k = sweep - schedule.burnin + 1
    return k > 0 and k % schedule.thin == 0


def ht_predictives(states, design):
    beta = np.array([s.beta for s in states])
    sigma = np.sqrt([s.sigma2 for s in states])
    means = beta[:, None] * design.pis[None, :]
    sds = sigma[:, None] * design.pis[None, :]
    return means, sds


def re_predictives(states, design):
    pis = design.pis
    X = np.column_stack([np.ones(len(pis)), pis, pis**2])
    beta = np.array([s.beta for s in states])
    gamma = np.array([s.gamma for s in states])
    sigma = np.sqrt([s.sigma2 for s in states])
    means = beta @ X.T + gamma
    sds = sigma[:, None] * pis[None, :]
    return means, sds


def gp_predictives(states, design, node_of):
    mu = np.array([s.mu for s in states])
    sigma = np.sqrt([s.sigma2 for s in states])
    means = mu[:, node_of]
    sds = np.broadcast_to(sigma[:, None], means.shape)
    return means, sds


def competitor_population_density(means, sds, shares, grid=None, k_max=None):
    """Population estimate from per-draw stratum predictive normals.

    Every kept draw contributes the share-weighted mixture of its stratum
    predictives; the draws are then summarized pointwise.  With ``grid`` the
    result is a density; with ``k_max`` the predictives are taken to live on
    the log scale and are mapped to count probabilities.
    """
    means = np.asarray(means, dtype=float)
    sds = np.asarray(sds, dtype=float)
    shares = np.asarray(shares, dtype=float)
    if (grid is None) == (k_max is None):
        raise ValueError("exactly one of grid / k_max must be given")
    n_draws = means.shape[0]
    if grid is not None:
        grid = np.asarray(grid, dtype=float)
        draws = np.empty((n_draws, len(grid)))
        for i in range(n_draws):
            draws[i] = mixture_density(shares, means[i], sds[i] ** 2, grid)
        return summarize_posterior(grid, draws)
    pmf = pmf_from_normal(means, sds, k_max)      # (draws, strata, k)
    draws = np.tensordot(pmf, shares, axes=([1], [0]))
    return summarize_posterior(np.arange(k_max + 1, dtype=float), draws)
