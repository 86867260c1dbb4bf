"""Exact posterior quantities for the global-scale family under normal data.

For y_i ~ N(beta_i, sigma2) with beta_i | kappa ~ N(0, sigma2 (1-kappa)/kappa),
the shrinkage weight kappa is conjugate in the sense that its posterior stays
inside the same family: only the first power parameter and the exponential
tilt move, via a_post = a + p/2 and s_post = s + Z/(2 sigma2) with Z = sum
y_i^2.  Every posterior functional below reduces to ratios of the family's
normalizing constant, hence to ratios of the two-variable confluent series,
which are always evaluated as differences of logs so that correlated
truncation error cancels.

sigma2 is treated as fixed throughout; callers may plug in an estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .prior import HIBParams
from .specfun import (
    DEFAULT_MAX_TERMS,
    DEFAULT_REL_TOL,
    log_beta,
    log_phi1,
    log_phi1_batch,
    pochhammer,
)

__all__ = [
    "PosteriorState",
    "ShrinkageFit",
    "update",
    "prior_state",
    "kappa_moment",
    "kappa_moment12_batch",
    "shrink",
    "marginal_log_likelihood",
    "mgf_kappa",
    "m_kernel",
    "log_m_kernel",
]


@dataclass(frozen=True)
class PosteriorState:
    """Posterior of the shrinkage weight after observing p squared values.

    a_post and s_post are exact arithmetic images of the prior parameters;
    b and tau2 never move.  p = 0 with Z = 0 denotes the prior itself.
    """

    prior: HIBParams
    a_post: float
    s_post: float
    p: int
    Z: float
    sigma2: float


@dataclass(frozen=True)
class ShrinkageFit:
    """Posterior-mean fit of a mean vector under one family member."""

    post_mean: np.ndarray
    post_var_scalar: float
    kappa_bar: float
    log_marginal: float


def _check_data(p: int, Z: float, sigma2: float) -> None:
    if not (isinstance(p, (int, np.integer)) and p >= 1):
        raise DomainError(f"p must be a positive integer, got {p!r}")
    if not (math.isfinite(Z) and Z >= 0.0):
        raise DomainError(f"Z must be nonnegative and finite, got {Z}")
    if not (math.isfinite(sigma2) and sigma2 > 0.0):
        raise DomainError(f"sigma2 must be positive and finite, got {sigma2}")


def update(prior: HIBParams, p: int, Z: float, sigma2: float = 1.0) -> PosteriorState:
    """Condition on p observations with squared norm Z at noise level sigma2."""
    _check_data(p, Z, sigma2)
    return PosteriorState(
        prior=prior,
        a_post=prior.a + 0.5 * p,
        s_post=prior.s + 0.5 * Z / sigma2,
        p=int(p),
        Z=float(Z),
        sigma2=float(sigma2),
    )


def prior_state(prior: HIBParams) -> PosteriorState:
    """The no-data state, so prior moments use the posterior machinery."""
    return PosteriorState(
        prior=prior, a_post=prior.a, s_post=prior.s, p=0, Z=0.0, sigma2=1.0
    )


def kappa_moment(
    state: PosteriorState,
    n: int,
    rel_tol: float = DEFAULT_REL_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> float:
    """n-th posterior moment of the shrinkage weight, in [0, 1].

    E(kappa^n | y) = [(a')_n / (a'+b)_n] * phi1(b,1; a'+b+n; s', y)
                                         / phi1(b,1; a'+b; s', y).
    """
    if not (isinstance(n, (int, np.integer)) and n >= 0):
        raise DomainError(f"moment order must be a nonnegative integer, got {n!r}")
    if n == 0:
        return 1.0
    pr = state.prior
    c = state.a_post + pr.b
    log_num = log_phi1(pr.b, 1.0, c + n, state.s_post, pr.y, rel_tol, max_terms)
    log_den = log_phi1(pr.b, 1.0, c, state.s_post, pr.y, rel_tol, max_terms)
    ratio = pochhammer(state.a_post, int(n)) / pochhammer(c, int(n))
    return ratio * math.exp(log_num - log_den)


def kappa_moment12_batch(
    prior: HIBParams,
    p: int,
    z_values: np.ndarray,
    rel_tol: float = DEFAULT_REL_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> tuple[np.ndarray, np.ndarray]:
    """First and second posterior kappa moments over many Z values at once.

    Used by the risk Monte Carlo, where hundreds of thousands of Z draws
    share (prior, p) and differ only in the series tilt argument.
    """
    z = np.asarray(z_values, dtype=float)
    if z.ndim != 1:
        raise DomainError("z_values must be a 1-D array")
    if np.any(~np.isfinite(z)) or np.any(z < 0.0):
        raise DomainError("z_values must be nonnegative and finite")
    _check_data(p, 0.0, 1.0)
    a_post = prior.a + 0.5 * p
    c = a_post + prior.b
    s_post = prior.s + 0.5 * z
    log_den = log_phi1_batch(prior.b, 1.0, c, s_post, prior.y, rel_tol, max_terms)
    log_n1 = log_phi1_batch(prior.b, 1.0, c + 1.0, s_post, prior.y, rel_tol, max_terms)
    log_n2 = log_phi1_batch(prior.b, 1.0, c + 2.0, s_post, prior.y, rel_tol, max_terms)
    g1 = (a_post / c) * np.exp(log_n1 - log_den)
    g2 = (a_post * (a_post + 1.0) / (c * (c + 1.0))) * np.exp(log_n2 - log_den)
    return g1, g2


def marginal_log_likelihood(
    y: np.ndarray,
    sigma2: float,
    prior: HIBParams,
    rel_tol: float = DEFAULT_REL_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> float:
    """Log of p(y) with the mean vector and shrinkage weight integrated out.

    Equals the Gaussian base measure times the ratio of posterior to prior
    normalizing constants of the weight distribution.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size < 1:
        raise DomainError("y must be a 1-D vector of length >= 1")
    if np.any(~np.isfinite(y)):
        raise DomainError("y must be finite")
    p = y.size
    Z = float(y @ y)
    state = update(prior, p, Z, sigma2)
    pr = prior
    c_prior = pr.a + pr.b
    c_post = state.a_post + pr.b
    return (
        -0.5 * p * math.log(2.0 * math.pi * sigma2)
        - 0.5 * Z / sigma2
        + log_beta(state.a_post, pr.b)
        - log_beta(pr.a, pr.b)
        + log_phi1(pr.b, 1.0, c_post, state.s_post, pr.y, rel_tol, max_terms)
        - log_phi1(pr.b, 1.0, c_prior, pr.s, pr.y, rel_tol, max_terms)
    )


def shrink(
    y: np.ndarray,
    sigma2: float,
    prior: HIBParams,
    rel_tol: float = DEFAULT_REL_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> ShrinkageFit:
    """Posterior-mean estimate of the mean vector with its shrinkage weight."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size < 1:
        raise DomainError("y must be a 1-D vector of length >= 1")
    if np.any(~np.isfinite(y)):
        raise DomainError("y must be finite")
    Z = float(y @ y)
    state = update(prior, y.size, Z, sigma2)
    kappa_bar = kappa_moment(state, 1, rel_tol, max_terms)
    return ShrinkageFit(
        post_mean=(1.0 - kappa_bar) * y,
        post_var_scalar=(1.0 - kappa_bar) * sigma2,
        kappa_bar=kappa_bar,
        log_marginal=marginal_log_likelihood(y, sigma2, prior, rel_tol, max_terms),
    )


def mgf_kappa(
    state: PosteriorState,
    t: float,
    rel_tol: float = DEFAULT_REL_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> float:
    """Moment generating function E(e^{t kappa} | y), always positive.

    Tilting by t shifts the series argument: M(t) = e^t phi1(..., s'-t, y)
    / phi1(..., s', y).
    """
    if not math.isfinite(t):
        raise DomainError(f"t must be finite, got {t}")
    pr = state.prior
    c = state.a_post + pr.b
    log_num = log_phi1(pr.b, 1.0, c, state.s_post - t, pr.y, rel_tol, max_terms)
    log_den = log_phi1(pr.b, 1.0, c, state.s_post, pr.y, rel_tol, max_terms)
    return math.exp(t + log_num - log_den)


def log_m_kernel(
    prior: HIBParams,
    p_eff: int,
    Z: float,
    rel_tol: float = DEFAULT_REL_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> float:
    """Log of the kernel moment integral(kappa^{p_eff/2} e^{-Z kappa/2} dP).

    Computed as a log-normalizer difference: the integrand is, up to the
    prior normalizer, the unnormalized weight density with parameters
    (a + p_eff/2, b, tau2, s + Z/2).
    """
    if not (isinstance(p_eff, (int, np.integer)) and p_eff >= 0):
        raise DomainError(f"p_eff must be a nonnegative integer, got {p_eff!r}")
    if not (math.isfinite(Z) and Z >= 0.0):
        raise DomainError(f"Z must be nonnegative and finite, got {Z}")
    pr = prior
    a_num = pr.a + 0.5 * p_eff
    s_num = pr.s + 0.5 * Z
    log_c_num = (
        -s_num
        + log_beta(a_num, pr.b)
        + log_phi1(pr.b, 1.0, a_num + pr.b, s_num, pr.y, rel_tol, max_terms)
    )
    log_c_den = (
        -pr.s
        + log_beta(pr.a, pr.b)
        + log_phi1(pr.b, 1.0, pr.a + pr.b, pr.s, pr.y, rel_tol, max_terms)
    )
    return log_c_num - log_c_den


def m_kernel(
    prior: HIBParams,
    p_eff: int,
    Z: float,
    rel_tol: float = DEFAULT_REL_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> float:
    """Kernel moment m_{p_eff}(Z), a positive real."""
    return math.exp(log_m_kernel(prior, p_eff, Z, rel_tol, max_terms))
