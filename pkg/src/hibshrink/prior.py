"""The hypergeometric inverted-beta prior family for a global scale.

A member of the family is described by four numbers (a, b, tau2, s).  The
most convenient parameterization is the shrinkage weight kappa = 1/(1+lambda^2)
in (0, 1), where the density is

    p(kappa) = kappa^(a-1) (1-kappa)^(b-1)
               / (1/tau2 + (1 - 1/tau2) kappa) * exp(-s kappa) / C,

with normalizer C = e^(-s) Be(a, b) phi1(b, 1; a+b; s, 1 - 1/tau2).  The same
distribution expressed for lambda^2 = (1-kappa)/kappa is an inverted-beta
(beta-prime) law when tau2 = 1 and s = 0; ``a`` governs the lambda tail and
``b`` the mass near lambda = 0.  The half-Cauchy prior on lambda is the
member (a=1/2, b=1/2, tau2=1, s=0).

Also provided: the heavier-tailed scale mixture obtained by giving the
half-Cauchy's own scale another half-Cauchy prior (its closed-form density is
ln(lambda) / (lambda^2 - 1) up to normalization), and the hyperbolic secant
density that the half-Cauchy induces on psi = ln lambda^2.  Densities are
computed in log form internally; linear densities are thin wrappers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .quadrature import QuadConfig, integrate_unit
from .specfun import DEFAULT_MAX_TERMS, DEFAULT_REL_TOL, log_beta, log_phi1

__all__ = [
    "HIBParams",
    "LogNormalizer",
    "half_cauchy",
    "log_normalizer",
    "log_density_kappa",
    "density_kappa",
    "log_density_lambda2",
    "density_lambda2",
    "density_lambda",
    "double_half_cauchy_log_density",
    "double_half_cauchy_density",
    "double_half_cauchy_kappa_kernel",
    "hyperbolic_secant_density",
]


@dataclass(frozen=True)
class HIBParams:
    """Hyperparameters of one family member.

    a: tail-weight parameter (larger a, thinner lambda tails).
    b: origin-mass parameter (smaller b, more mass near lambda = 0).
    tau2: global scale tau^2 of the underlying half-Cauchy-type scale.
    s: exponential tilt in kappa; any real number.
    """

    a: float
    b: float
    tau2: float
    s: float

    def __post_init__(self) -> None:
        for name in ("a", "b", "tau2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"{name} must be positive and finite, got {value}")
        if not math.isfinite(self.s):
            raise DomainError(f"s must be finite, got {self.s}")

    @property
    def y(self) -> float:
        """Second series argument 1 - 1/tau2 shared by all family formulas."""
        return 1.0 - 1.0 / self.tau2


@dataclass(frozen=True)
class LogNormalizer:
    """Natural log of the family's normalizing constant C."""

    log_c: float


def half_cauchy() -> HIBParams:
    """Member whose implied prior on lambda is standard half-Cauchy."""
    return HIBParams(a=0.5, b=0.5, tau2=1.0, s=0.0)


def log_normalizer(
    prior: HIBParams,
    rel_tol: float = DEFAULT_REL_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> LogNormalizer:
    """Normalizing constant of the kappa density, in log form."""
    value = (
        -prior.s
        + log_beta(prior.a, prior.b)
        + log_phi1(prior.b, 1.0, prior.a + prior.b, prior.s, prior.y, rel_tol, max_terms)
    )
    return LogNormalizer(log_c=value)


def _check_kappa(kappa: float) -> None:
    if not 0.0 < kappa < 1.0:
        raise DomainError(f"kappa must lie strictly inside (0, 1), got {kappa}")


def log_density_kappa(prior: HIBParams, kappa: float) -> float:
    """Log of the normalized shrinkage-weight density."""
    _check_kappa(kappa)
    inv_tau2 = 1.0 / prior.tau2
    return (
        (prior.a - 1.0) * math.log(kappa)
        + (prior.b - 1.0) * math.log1p(-kappa)
        - math.log(inv_tau2 + (1.0 - inv_tau2) * kappa)
        - prior.s * kappa
        - log_normalizer(prior).log_c
    )


def density_kappa(prior: HIBParams, kappa: float) -> float:
    """Normalized density of the shrinkage weight kappa on (0, 1)."""
    return math.exp(log_density_kappa(prior, kappa))


def log_density_lambda2(prior: HIBParams, lambda2: float) -> float:
    """Log density of lambda^2 = (1-kappa)/kappa on (0, infinity).

    Written directly in the lambda^2 variable (not by delegating to the
    kappa form) so that small and large lambda^2 keep full precision; the
    two forms agree through the Jacobian (1+lambda^2)^(-2) exactly.
    """
    if not (math.isfinite(lambda2) and lambda2 > 0.0):
        raise DomainError(f"lambda2 must be positive and finite, got {lambda2}")
    inv_tau2 = 1.0 / prior.tau2
    log1p_l2 = math.log1p(lambda2)
    kappa = 1.0 / (1.0 + lambda2)
    return (
        (prior.b - 1.0) * math.log(lambda2)
        - (prior.a + prior.b) * log1p_l2
        - math.log(inv_tau2 + (1.0 - inv_tau2) * kappa)
        - prior.s * kappa
        - log_normalizer(prior).log_c
    )


def density_lambda2(prior: HIBParams, lambda2: float) -> float:
    """Normalized density of lambda^2 on (0, infinity)."""
    return math.exp(log_density_lambda2(prior, lambda2))


def density_lambda(prior: HIBParams, lam: float) -> float:
    """Implied density of lambda itself: density_lambda2(lam^2) * 2 lam.

    Defined by continuity at lam = 0, where the limit is finite only for
    b = 1/2 (the half-Cauchy case gives 2/pi there).
    """
    if lam < 0.0 or not math.isfinite(lam):
        raise DomainError(f"lam must be nonnegative and finite, got {lam}")
    if lam == 0.0:
        # density ~ (2/C) lam^(2b-1) e^(-s) near 0
        if prior.b > 0.5:
            return 0.0
        if prior.b < 0.5:
            return math.inf
        return 2.0 * math.exp(-prior.s - log_normalizer(prior).log_c)
    return math.exp(log_density_lambda2(prior, lam * lam) + math.log(2.0 * lam))


# kernel of the scale mixture where the half-Cauchy's own scale gets another
# half-Cauchy prior; its normalizer over (0, inf) is computed once on demand
_DHC_LOG_NORM: float | None = None


def _dhc_lambda_kernel(lam: float) -> float:
    """Unnormalized mixture density ln(lam)/(lam^2 - 1), with the removable
    point at lam = 1 filled in by a local expansion."""
    e = lam - 1.0
    if abs(e) < 1e-6:
        return 0.5 * (1.0 - e + (5.0 / 6.0) * e * e)
    return math.log(lam) / (lam * lam - 1.0)


def double_half_cauchy_kappa_kernel(kappa: float) -> float:
    """The same mixture expressed for the shrinkage weight (unnormalized).

    Equal to ln((1-kappa)/kappa) / (1-2 kappa) * kappa^(-1/2) (1-kappa)^(-1/2),
    symmetric about 1/2, where its removable singularity evaluates to 4.
    """
    _check_kappa(kappa)
    e = kappa - 0.5
    if abs(e) < 1e-6:
        ratio = 2.0 + (8.0 / 3.0) * e * e
    else:
        ratio = math.log1p(-kappa) - math.log(kappa)
        ratio /= 1.0 - 2.0 * kappa
    return ratio / math.sqrt(kappa * (1.0 - kappa))


def _dhc_log_norm() -> float:
    """Log normalizer of the mixture kernel over lam in (0, inf), cached.

    Integrated in the kappa variable, where the change of variables gives
    integral(lambda kernel) = (1/4) integral(kappa kernel); the value is
    pi^2 / 4, and tests pin the computed constant against that closed form.
    """
    global _DHC_LOG_NORM
    if _DHC_LOG_NORM is None:
        total = integrate_unit(
            double_half_cauchy_kappa_kernel,
            0.5,
            0.5,
            QuadConfig(),
            f_complement=double_half_cauchy_kappa_kernel,
        )
        _DHC_LOG_NORM = math.log(0.25 * total)
    return _DHC_LOG_NORM


def double_half_cauchy_log_density(lam: float) -> float:
    """Log of the normalized mixture density of lambda on (0, infinity)."""
    if not (math.isfinite(lam) and lam > 0.0):
        raise DomainError(f"lam must be positive and finite, got {lam}")
    return math.log(_dhc_lambda_kernel(lam)) - _dhc_log_norm()


def double_half_cauchy_density(lam: float) -> float:
    """Normalized mixture density of lambda on (0, infinity)."""
    return math.exp(double_half_cauchy_log_density(lam))


def hyperbolic_secant_density(psi: float) -> float:
    """Density the half-Cauchy induces on psi = ln lambda^2.

    p(psi) = (1/pi) / (e^(psi/2) + e^(-psi/2)), evaluated through the
    decaying exponential only so large |psi| cannot overflow.
    """
    if not math.isfinite(psi):
        raise DomainError(f"psi must be finite, got {psi}")
    h = 0.5 * abs(psi)
    edown = math.exp(-h)
    return edown / (math.pi * (1.0 + edown * edown))
