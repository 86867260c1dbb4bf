"""Series evaluation of the special functions behind the HIB family.

Everything is plain double-precision arithmetic implemented in-repo: rising
factorials, log-gamma (Lanczos approximation), log-beta, the Gauss
hypergeometric function 2F1, and the bivariate confluent hypergeometric
function

    phi1(alpha, beta; gamma; x, y)
        = sum_{m,n >= 0} (alpha)_{m+n} (beta)_n
          / ((gamma)_{m+n} m! n!) * x^m y^n,

which converges for all real x when y < 1.  ``phi1`` evaluates the function
through single series of 2F1 values chosen by the signs of ``x`` and ``y`` so
that, for the parameter patterns used by the statistical modules, every term
is positive and no cancellation occurs.  ``phi1_double_series`` sums the raw
double series and exists as an independent oracle for tests.

Large arguments make the function value overflow a float even though ratios
of values stay moderate, so the statistical modules consume ``log_phi1`` and
the vectorized ``log_phi1_batch`` rather than the linear-scale ``phi1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, NumericalWarning

__all__ = [
    "DEFAULT_REL_TOL",
    "DEFAULT_MAX_TERMS",
    "Phi1Args",
    "SeriesResult",
    "pochhammer",
    "log_gamma",
    "log_beta",
    "gauss_2f1",
    "phi1",
    "log_phi1",
    "log_phi1_batch",
    "phi1_double_series",
]

DEFAULT_REL_TOL = 1e-12
DEFAULT_MAX_TERMS = 100_000

# y in [0.999, 1) makes the inner 2F1 series degenerate slowly; such calls get
# a warning and a hard cap on the work they may spend.
_Y_WARN = 0.999
_Y_WARN_MAX_TERMS = 50_000

# Scaled accumulation bounds: partial sums are renormalized by 2**512 whenever
# they leave [1e-280, 1e280] so that series ~ exp(x) never overflow.
_SCALE_HI = 1e280
_SCALE_LO = 1e-280
_RESCALE = 2.0**512
_LOG_RESCALE = 512.0 * math.log(2.0)

_EXP_OVERFLOW = 709.782712893384  # log of the largest double

# Lanczos approximation, g = 7, 9 coefficients: relative error below 1e-13
# over the positive real axis once the reflection below 0.5 is applied.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


@dataclass(frozen=True)
class Phi1Args:
    """Arguments and convergence controls for a phi1 evaluation.

    ``alpha``, ``beta``, ``gamma`` must be positive; ``x`` is unrestricted and
    ``y`` must satisfy ``y < 1`` (checked at evaluation time).
    """

    alpha: float
    beta: float
    gamma: float
    x: float
    y: float
    rel_tol: float = DEFAULT_REL_TOL
    max_terms: int = DEFAULT_MAX_TERMS

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"{name} must be positive and finite, got {value}")
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DomainError("x and y must be finite")
        if not 0.0 < self.rel_tol < 1.0:
            raise DomainError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")


@dataclass(frozen=True)
class SeriesResult:
    """Value of a series evaluation together with how it converged."""

    value: float
    terms_used: int
    converged: bool


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``.

    Accurate to at least 12 significant digits everywhere on the positive
    axis; arguments below 0.5 go through the reflection formula so the
    Lanczos sum stays in its accurate range.
    """
    if not (math.isfinite(x) and x > 0.0):
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - log_gamma(1.0 - x)
    z = x - 1.0
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (z + 0.5) * math.log(t) - t + math.log(acc)


def pochhammer(c: float, n: int) -> float:
    """Rising factorial ``c (c+1) ... (c+n-1)``; equals 1 when ``n == 0``."""
    if n < 0 or n != int(n):
        raise DomainError(f"pochhammer requires a nonnegative integer n, got {n}")
    out = 1.0
    for k in range(int(n)):
        out *= c + k
    return out


def log_beta(a: float, b: float) -> float:
    """Natural log of the beta function for positive ``a`` and ``b``."""
    if not (a > 0.0 and b > 0.0):
        raise DomainError(f"log_beta requires positive arguments, got ({a}, {b})")
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b)


def _hyp2f1_series(
    a: float,
    b: float,
    c: float,
    z: float,
    rel_tol: float,
    max_terms: int,
    compensated: bool = False,
) -> tuple[float, int]:
    """Raw 2F1 power series; caller guarantees it converges (|z| < 1).

    Returns ``(value, terms)``.  Raises ConvergenceError past ``max_terms``.
    """
    total = 1.0
    term = 1.0
    comp = 0.0
    streak = 0
    for m in range(1, max_terms + 1):
        term *= (a + m - 1.0) * (b + m - 1.0) / ((c + m - 1.0) * m) * z
        if compensated:
            yv = term - comp
            t = total + yv
            comp = (t - total) - yv
            total = t
        else:
            total += term
        if abs(term) <= rel_tol * abs(total):
            streak += 1
            if streak >= 3 or term == 0.0:
                return total, m + 1
        else:
            streak = 0
    raise ConvergenceError("2F1 series did not converge", terms_used=max_terms)


def gauss_2f1(
    a: float,
    b: float,
    c: float,
    y: float,
    rel_tol: float = DEFAULT_REL_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
    *,
    compensated: bool = False,
) -> SeriesResult:
    """Gauss hypergeometric function 2F1(a, b; c; y) for ``y < 1``.

    Arguments ``y`` in [0, 1) are summed directly; negative ``y`` is mapped
    into [0, 1) with the Pfaff transformation

        2F1(a, b; c; y) = (1 - y)^(-a) 2F1(a, c - b; c; y / (y - 1)).

    The pair ``(a, b)`` is put in a canonical order first, which makes the
    mathematical symmetry in (a, b) exact in floating point as well.
    """
    if not c > 0.0:
        raise DomainError(f"gauss_2f1 requires c > 0, got {c}")
    if y >= 1.0:
        raise DomainError(f"gauss_2f1 requires y < 1, got {y}")
    if not 0.0 < rel_tol < 1.0:
        raise DomainError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    if max_terms < 1:
        raise DomainError(f"max_terms must be >= 1, got {max_terms}")
    lo, hi = sorted((a, b))
    if y < 0.0:
        z = y / (y - 1.0)
        value, terms = _hyp2f1_series(hi, c - lo, c, z, rel_tol, max_terms, compensated)
        value *= (1.0 - y) ** (-hi)
    else:
        value, terms = _hyp2f1_series(hi, lo, c, y, rel_tol, max_terms, compensated)
    return SeriesResult(value=value, terms_used=terms, converged=True)


def _check_y(y: float, max_terms: int) -> int:
    """Domain checks shared by all phi1 entry points; may tighten max_terms."""
    if y >= 1.0:
        raise DomainError(f"phi1 requires y < 1, got {y}")
    if y >= _Y_WARN:
        warnings.warn(
            f"phi1 argument y={y} lies in [{_Y_WARN}, 1); results this close to "
            "the boundary are unsupported and the term budget is capped",
            NumericalWarning,
            stacklevel=3,
        )
        return min(max_terms, _Y_WARN_MAX_TERMS)
    return max_terms


def _phi1_core(
    alpha: float,
    beta: float,
    gamma: float,
    x: float,
    y: float,
    rel_tol: float,
    max_terms: int,
    compensated: bool = False,
    _transformed: bool = False,
) -> tuple[float, float, int]:
    """Shared phi1 engine returning ``(log|value|, sign, outer_terms)``.

    Dispatch:
      * y < 0: flip once via
        phi1(alpha,beta;gamma;x,y) = e^x (1-y)^(-beta)
            phi1(gamma-alpha, beta; gamma; -x, y/(y-1)),
        which lands in [0, 1) and is never applied twice.
      * 0 <= y < 1, x >= 0: sum_n (alpha)_n/(gamma)_n x^n/n!
            * 2F1(beta, alpha+n; gamma+n; y).
      * 0 <= y < 1, x < 0: e^x sum_n (gamma-alpha)_n/(gamma)_n (-x)^n/n!
            * 2F1(beta, alpha; gamma+n; y),
        whose terms carry no sign changes from x, avoiding cancellation.

    Partial sums are rescaled by powers of two so series comparable to
    exp(|x|) never overflow; the log of the accumulated scale is folded into
    the returned log value.
    """
    max_terms = _check_y(y, max_terms)
    if y < 0.0:
        if _transformed:  # dispatch lands in [0,1) after one flip; never recurse twice
            raise AssertionError("phi1 y<0 transformation applied twice")
        log_abs, sign, terms = _phi1_core(
            gamma - alpha,
            beta,
            gamma,
            -x,
            y / (y - 1.0),
            rel_tol,
            max_terms,
            compensated,
            _transformed=True,
        )
        return log_abs + x - beta * math.log1p(-y), sign, terms

    if x >= 0.0:
        # weight ratio (alpha+n-1) x / ((gamma+n-1) n), inner 2F1 shifts both
        a_param = alpha
        xabs = x
        prefactor = 0.0

        def inner(n: int) -> float:
            if y == 0.0:
                return 1.0
            value, _ = _hyp2f1_series(beta, alpha + n, gamma + n, y, rel_tol, max_terms)
            return value

    else:
        a_param = gamma - alpha
        xabs = -x
        prefactor = x

        def inner(n: int) -> float:
            if y == 0.0:
                return 1.0
            value, _ = _hyp2f1_series(beta, alpha, gamma + n, y, rel_tol, max_terms)
            return value

    weight = 1.0
    off = 0.0
    total = weight * inner(0)
    comp = 0.0
    streak = 0
    n = 0
    converged = False
    while n < max_terms:
        n += 1
        weight *= (a_param + n - 1.0) * xabs / ((gamma + n - 1.0) * n)
        term = weight * inner(n)
        if compensated:
            yv = term - comp
            t = total + yv
            comp = (t - total) - yv
            total = t
        else:
            total += term
        if abs(term) <= rel_tol * abs(total):
            streak += 1
            if streak >= 3 or (term == 0.0 and weight == 0.0):
                converged = True
                break
        else:
            streak = 0
        magnitude = max(abs(total), abs(weight))
        if magnitude > _SCALE_HI:
            total /= _RESCALE
            weight /= _RESCALE
            comp /= _RESCALE
            off += _LOG_RESCALE
        elif 0.0 < magnitude < _SCALE_LO:
            total *= _RESCALE
            weight *= _RESCALE
            comp *= _RESCALE
            off -= _LOG_RESCALE
    if not converged:
        raise ConvergenceError("phi1 series did not converge", terms_used=n)
    if total == 0.0:
        return -math.inf, 0.0, n
    return math.log(abs(total)) + off + prefactor, math.copysign(1.0, total), n


def phi1(args: Phi1Args, *, compensated: bool = False) -> SeriesResult:
    """Evaluate phi1 at ``args`` on the linear scale.

    The value can legitimately overflow to ``inf`` for large positive ``x``
    (the function grows like ``e^x``); callers needing ratios of large values
    should use :func:`log_phi1` instead.
    """
    log_abs, sign, terms = _phi1_core(
        args.alpha,
        args.beta,
        args.gamma,
        args.x,
        args.y,
        args.rel_tol,
        args.max_terms,
        compensated,
    )
    if sign == 0.0:
        value = 0.0
    elif log_abs > _EXP_OVERFLOW:
        value = sign * math.inf
    else:
        value = sign * math.exp(log_abs)
    return SeriesResult(value=value, terms_used=terms, converged=True)


def log_phi1(
    alpha: float,
    beta: float,
    gamma: float,
    x: float,
    y: float,
    rel_tol: float = DEFAULT_REL_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> float:
    """Natural log of phi1 for positive parameters.

    For positive ``alpha``, ``beta``, ``gamma`` (and in particular for every
    argument pattern produced by the HIB posterior formulas) phi1 is strictly
    positive, so the log is well defined for arbitrarily large ``x``.
    """
    Phi1Args(alpha, beta, gamma, x, y, rel_tol, max_terms)  # validate
    log_abs, sign, _ = _phi1_core(alpha, beta, gamma, x, y, rel_tol, max_terms)
    if sign <= 0.0:
        raise DomainError("phi1 evaluated non-positive; log_phi1 undefined here")
    return log_abs


def _batch_sum(
    x: np.ndarray,
    a_param: float,
    gamma: float,
    inner,
    rel_tol: float,
    max_terms: int,
) -> np.ndarray:
    """log of sum_n (a_param)_n/(gamma)_n x^n/n! inner(n) over an array x >= 0.

    All series terms are nonnegative, so a streaming rescaled accumulation is
    stable; the convergence test runs every 8 terms and requires the largest
    relative term across the batch to stay below ``rel_tol`` on 3 checks.
    """
    q_prev = inner(0)
    if q_prev <= 0.0:
        raise DomainError("phi1 batch requires positive series coefficients")
    total = np.full(x.shape, q_prev)
    term = total.copy()
    off = np.zeros_like(total)
    scratch = np.empty_like(total)
    poch_ratio = 1.0
    streak = 0
    n = 0
    while n < max_terms:
        n += 1
        poch_ratio *= (a_param + n - 1.0) / (gamma + n - 1.0)
        q = poch_ratio * inner(n)
        np.multiply(x, q / (q_prev * n), out=scratch)
        term *= scratch
        total += term
        q_prev = q
        # per-step growth can exceed 1e6 when x is huge, so rescale checks
        # cannot be amortized the way the convergence checks are
        if float(total.max()) > _SCALE_HI:
            big = total > _SCALE_HI
            total[big] /= _RESCALE
            term[big] /= _RESCALE
            off[big] += _LOG_RESCALE
        if n % 8 == 0:
            np.abs(term, out=scratch)
            worst = float(np.max(scratch / total))
            if worst <= rel_tol:
                streak += 1
                if streak >= 3:
                    break
            else:
                streak = 0
    else:
        raise ConvergenceError("phi1 batch series did not converge", terms_used=n)
    if not np.all(total > 0.0):
        raise DomainError("phi1 batch accumulated a non-positive partial sum")
    return np.log(total) + off


def log_phi1_batch(
    alpha: float,
    beta: float,
    gamma: float,
    x: np.ndarray,
    y: float,
    rel_tol: float = DEFAULT_REL_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> np.ndarray:
    """Vectorized :func:`log_phi1` over an array of ``x`` values.

    ``alpha``, ``beta``, ``gamma`` and ``y`` are fixed across the batch, the
    situation that arises when a Monte Carlo risk loop evaluates posterior
    moments at many data draws.  Negative and nonnegative ``x`` entries are
    routed to the sign-appropriate representation (the same ones ``phi1``
    dispatches to), and each sub-batch is summed with only positive terms, so
    the results match the scalar path to near machine precision for any
    magnitude of ``x``.  Requires ``gamma > alpha`` when negative ``x`` are
    present (always true for the posterior patterns, where gamma - alpha is
    the posterior shape a').
    """
    if not (alpha > 0.0 and beta > 0.0 and gamma > 0.0):
        raise DomainError("log_phi1_batch requires positive alpha, beta, gamma")
    max_terms = _check_y(y, max_terms)
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape, dtype=float)

    if y < 0.0:
        # one flip of the y<0 transformation, folded into the coefficients
        y_t = y / (y - 1.0)
        pref = -beta * math.log1p(-y)
        alpha_t = gamma - alpha

        def inner_pos(n: int) -> float:
            return _hyp2f1_series(beta, alpha_t, gamma + n, y_t, rel_tol, max_terms)[0]

        def inner_neg(n: int) -> float:
            return _hyp2f1_series(beta, alpha_t + n, gamma + n, y_t, rel_tol, max_terms)[0]

        a_pos, a_neg = alpha, alpha_t
    elif y == 0.0:
        pref = 0.0
        one = lambda n: 1.0  # noqa: E731
        inner_pos = inner_neg = one
        a_pos, a_neg = alpha, gamma - alpha
    else:
        pref = 0.0

        def inner_pos(n: int) -> float:
            return _hyp2f1_series(beta, alpha + n, gamma + n, y, rel_tol, max_terms)[0]

        def inner_neg(n: int) -> float:
            return _hyp2f1_series(beta, alpha, gamma + n, y, rel_tol, max_terms)[0]

        a_pos, a_neg = alpha, gamma - alpha

    nonneg = x >= 0.0
    if np.any(nonneg):
        xs = x[nonneg]
        out[nonneg] = _batch_sum(xs, a_pos, gamma, inner_pos, rel_tol, max_terms) + pref
    if not np.all(nonneg):
        if gamma <= alpha:
            raise DomainError("log_phi1_batch with negative x requires gamma > alpha")
        xs = -x[~nonneg]
        out[~nonneg] = (
            _batch_sum(xs, a_neg, gamma, inner_neg, rel_tol, max_terms)
            + pref
            + x[~nonneg]
        )
    return out


def _rect_sum(
    alpha: float,
    beta: float,
    gamma: float,
    x: float,
    y: float,
    rel_tol: float,
    max_terms: int,
    compensated: bool,
    flipped: bool,
) -> tuple[float, float, int]:
    """Rectangle-truncated double series; needs ``x >= 0`` and ``0 <= y < 1``.

    ``flipped=False`` sums the defining series

        sum_{m,n} (alpha)_{m+n} (beta)_n x^m y^n / ((gamma)_{m+n} m! n!),

    ``flipped=True`` sums the exponential-flip rearrangement

        sum_{m,n} (gamma-alpha)_m (alpha)_n (beta)_n x^m y^n
            / ((gamma)_{m+n} m! n!),

    which equals e^{x} phi1(alpha, beta; gamma; -x, y); the caller accounts
    for the prefactor.  Rows are indexed by the power of ``x``, and both
    directions stop after three consecutive negligible contributions.
    Returns ``(log|value|, sign, terms)``.
    """
    row_param = gamma - alpha if flipped else alpha
    total = 0.0
    comp = 0.0
    off = 0.0
    row_head = 1.0  # (row_param)_m / (gamma)_m * x^m / m!
    terms = 0
    row_streak = 0
    m = 0
    converged = False
    while m <= max_terms:
        term = row_head
        row = term
        streak = 0
        n = 0
        while n < max_terms:
            n += 1
            first = alpha + n - 1.0 if flipped else alpha + m + n - 1.0
            term *= first * (beta + n - 1.0) * y / ((gamma + m + n - 1.0) * n)
            row += term
            if abs(term) <= rel_tol * max(abs(row), abs(total)):
                streak += 1
                if streak >= 3 or term == 0.0:
                    break
            else:
                streak = 0
        terms += n + 1
        if compensated:
            yv = row - comp
            t = total + yv
            comp = (t - total) - yv
            total = t
        else:
            total += row
        if abs(row) <= rel_tol * abs(total):
            row_streak += 1
            if row_streak >= 3:
                converged = True
                break
        else:
            row_streak = 0
        m += 1
        row_head *= (row_param + m - 1.0) * x / ((gamma + m - 1.0) * m)
        magnitude = max(abs(total), abs(row_head))
        if magnitude > _SCALE_HI:
            total /= _RESCALE
            row_head /= _RESCALE
            comp /= _RESCALE
            off += _LOG_RESCALE
        elif 0.0 < magnitude < _SCALE_LO:
            total *= _RESCALE
            row_head *= _RESCALE
            comp *= _RESCALE
            off -= _LOG_RESCALE
        if row_head == 0.0 and converged is False and m > 3:
            converged = True  # terminating row coefficients
            break
    if not converged:
        raise ConvergenceError("phi1 double series did not converge", terms_used=terms)
    if total == 0.0:
        return -math.inf, 0.0, terms
    return math.log(abs(total)) + off, math.copysign(1.0, total), terms


def phi1_double_series(args: Phi1Args, *, compensated: bool = False) -> SeriesResult:
    """Sum the phi1 double series directly over a truncated (m, n) rectangle.

    This is the test-oracle counterpart of :func:`phi1`: sign flips first
    move the evaluation into x >= 0, 0 <= y < 1, and the rectangle is then
    summed term by term with no single-series nesting.  Negative ``y`` is
    removed by the substitution identity (the same one :func:`phi1` applies,
    used exactly once); a remaining negative ``x`` is removed by the
    exponential-flip rearrangement, whose rectangle carries the numerator
    (gamma-alpha)_m (alpha)_n in place of (alpha)_{m+n}.  After the flips all
    terms are nonnegative whenever gamma > alpha, so the summation itself is
    cancellation-free for the parameter patterns the tests exercise.
    """
    max_terms = _check_y(args.y, args.max_terms)
    alpha, beta, gamma = args.alpha, args.beta, args.gamma
    x, y = args.x, args.y
    log_pref = 0.0
    if y < 0.0:
        log_pref += x - beta * math.log1p(-y)
        alpha = gamma - alpha
        x = -x
        y = y / (y - 1.0)
    flipped = x < 0.0
    if flipped:
        log_pref += x
        x = -x
    log_abs, sign, terms = _rect_sum(
        alpha, beta, gamma, x, y, args.rel_tol, max_terms, compensated, flipped
    )
    log_abs += log_pref
    if sign == 0.0:
        value = 0.0
    elif log_abs > _EXP_OVERFLOW:
        value = sign * math.inf
    else:
        value = sign * math.exp(log_abs)
    return SeriesResult(value=value, terms_used=terms, converged=True)
