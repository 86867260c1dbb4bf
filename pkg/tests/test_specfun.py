"""Special-function layer: log-gamma, Gauss 2F1, and the confluent
two-variable series behind every posterior quantity in this package.

Expected values come from closed forms, from an inline brute-force double
series written independently here, or from cross-checking the two in-repo
representations against each other.
"""

import math

import pytest

from hibshrink.errors import ConvergenceError, DomainError, NumericalWarning
from hibshrink.specfun import (
    Phi1Args,
    gauss_2f1,
    log_beta,
    log_gamma,
    log_phi1,
    log_phi1_batch,
    phi1,
    phi1_double_series,
    pochhammer,
)


def rel_err(got: float, expected: float) -> float:
    if expected == 0.0:
        return abs(got)
    return abs(got - expected) / abs(expected)


# ---- inline oracles, kept deliberately naive ----------------------------


def raw_2f1(a: float, b: float, c: float, y: float, n_terms: int = 400) -> float:
    term = 1.0
    total = 1.0
    for n in range(n_terms):
        term *= (a + n) * (b + n) * y / ((c + n) * (n + 1.0))
        total += term
    return total


def raw_phi1_double_sum(
    alpha: float,
    beta: float,
    gamma: float,
    x: float,
    y: float,
    m_max: int = 120,
    n_max: int = 120,
) -> float:
    """Direct (m, n) rectangle of the defining double series.

    Only trustworthy for small |x| and |y| < 1; used to anchor one point,
    not as a general oracle.
    """
    total = 0.0
    row_start = 1.0  # term at m=0 for the current n
    for n in range(n_max):
        term = row_start
        for m in range(m_max):
            total += term
            term *= (alpha + m + n) * x / ((gamma + m + n) * (m + 1.0))
        row_start *= (alpha + n) * (beta + n) * y / ((gamma + n) * (n + 1.0))
    return total


def raw_confluent_1f1(alpha: float, gamma: float, x: float, n_terms: int = 400) -> float:
    term = 1.0
    total = 1.0
    for n in range(n_terms):
        term *= (alpha + n) * x / ((gamma + n) * (n + 1.0))
        total += term
    return total


# ---- log_gamma / pochhammer / log_beta ----------------------------------


def test_log_gamma_matches_stdlib_on_wide_grid():
    xs = [0.01, 0.1, 0.3, 0.5, 0.9, 1.0, 1.5, 2.0, 3.7, 10.0, 55.5, 171.0, 1e4]
    for x in xs:
        assert rel_err(log_gamma(x), math.lgamma(x)) < 1e-12, x


def test_log_gamma_integer_anchors():
    assert abs(log_gamma(1.0)) < 1e-14
    assert abs(log_gamma(2.0)) < 1e-14
    assert rel_err(log_gamma(6.0), math.log(120.0)) < 1e-14
    # half-integer closed form: Gamma(1/2) = sqrt(pi)
    assert rel_err(log_gamma(0.5), 0.5 * math.log(math.pi)) < 1e-14


def test_log_gamma_rejects_nonpositive():
    with pytest.raises(DomainError):
        log_gamma(0.0)
    with pytest.raises(DomainError):
        log_gamma(-1.5)


def test_pochhammer_basics():
    assert pochhammer(3.0, 0) == 1.0
    assert pochhammer(3.0, 4) == 3.0 * 4.0 * 5.0 * 6.0
    assert rel_err(pochhammer(0.5, 3), 0.5 * 1.5 * 2.5) < 1e-15


def test_log_beta_symmetry_and_anchor():
    assert log_beta(2.0, 3.0) == log_beta(3.0, 2.0)
    # Be(1/2, 1/2) = pi
    assert rel_err(math.exp(log_beta(0.5, 0.5)), math.pi) < 1e-13
    assert rel_err(math.exp(log_beta(2.0, 3.0)), 1.0 / 12.0) < 1e-13


# ---- gauss_2f1 -----------------------------------------------------------


def test_2f1_at_zero_is_one():
    assert gauss_2f1(1.3, 0.7, 2.1, 0.0).value == 1.0


def test_2f1_log_closed_form():
    # 2F1(1,1;2;z) = -ln(1-z)/z
    got = gauss_2f1(1.0, 1.0, 2.0, 0.5).value
    assert rel_err(got, 2.0 * math.log(2.0)) < 1e-12


def test_2f1_binomial_closed_form():
    # 2F1(a,b;b;z) = (1-z)^(-a), here via the symmetric argument order;
    # the term-ratio stop leaves a ~2e-12 truncation tail at y = 0.75
    got = gauss_2f1(1.0, 0.5, 1.0, 0.75).value
    assert rel_err(got, 2.0) < 1e-10


def test_2f1_argument_symmetry():
    for (a, b, c, y) in [
        (0.5, 2.5, 1.5, 0.6),
        (1.0, 0.3, 2.0, -0.8),
        (2.0, 0.7, 3.5, 0.9),
    ]:
        assert rel_err(gauss_2f1(a, b, c, y).value, gauss_2f1(b, a, c, y).value) < 1e-12


def test_2f1_negative_argument_matches_direct_series():
    # |y| < 1 keeps the naive alternating series usable as an oracle
    for (a, b, c) in [(0.5, 1.0, 1.5), (1.0, 1.0, 2.5), (2.0, 0.5, 3.0)]:
        for y in (-0.5, -0.9):
            assert rel_err(gauss_2f1(a, b, c, y).value, raw_2f1(a, b, c, y)) < 1e-11


def test_2f1_far_negative_argument_is_finite_and_positive():
    # the direct series diverges here; the implementation must transform
    r = gauss_2f1(0.5, 1.0, 1.5, -40.0)
    assert r.converged
    assert 0.0 < r.value < 1.0


def test_2f1_convergence_error_carries_terms():
    with pytest.raises(ConvergenceError) as exc:
        gauss_2f1(1.0, 0.5, 1.0, 0.99, max_terms=50)
    assert exc.value.terms_used == 50


# ---- phi1: closed forms and spec anchors ---------------------------------


def test_phi1_at_origin():
    r = phi1(Phi1Args(0.5, 1.0, 1.0, 0.0, 0.0))
    assert r.value == 1.0
    assert r.converged


def test_phi1_x_zero_reduces_to_2f1():
    # (0.5, 1, 1, 0, 0.75): collapses to 2F1(1, 0.5; 1; 0.75) = 2
    r = phi1(Phi1Args(0.5, 1.0, 1.0, 0.0, 0.75))
    assert rel_err(r.value, 2.0) < 1e-10


def test_phi1_y_zero_alpha_equals_gamma_is_exponential():
    # with y = 0 the series is sum_m (alpha)_m/(gamma)_m x^m/m!,
    # which is e^x whenever alpha = gamma
    for alpha in (0.5, 1.0):
        r = phi1(Phi1Args(alpha, 1.0, alpha, 5.0, 0.0))
        assert rel_err(r.value, math.exp(5.0)) < 1e-12


def test_phi1_y_zero_matches_confluent_series():
    for (alpha, gamma) in [(0.5, 1.0), (1.0, 2.5), (2.5, 1.5)]:
        for x in (-2.0, -1.0, 1.0, 10.0):
            got = phi1(Phi1Args(alpha, 1.0, gamma, x, 0.0)).value
            assert rel_err(got, raw_confluent_1f1(alpha, gamma, x)) < 1e-10


def test_phi1_gamma_equals_alpha_factorizes():
    # alpha = gamma makes the double series factor into e^x (1-y)^(-beta)
    for (beta, x, y) in [(1.0, 2.0, 0.5), (0.5, -3.0, 0.7), (2.0, 1.0, -1.5)]:
        got = phi1(Phi1Args(1.5, beta, 1.5, x, y)).value
        expected = math.exp(x) * (1.0 - y) ** (-beta)
        assert rel_err(got, expected) < 1e-11


def test_phi1_negative_x_anchor_against_raw_double_sum():
    got = phi1(Phi1Args(0.5, 1.0, 1.5, -2.0, 0.3)).value
    oracle = raw_phi1_double_sum(0.5, 1.0, 1.5, -2.0, 0.3)
    assert rel_err(got, oracle) < 1e-11


def test_phi1_double_series_cross_check_anchor():
    a = Phi1Args(0.5, 1.0, 1.5, 2.0, 0.3)
    assert rel_err(phi1_double_series(a).value, phi1(a).value) < 1e-10


def test_phi1_double_series_trivial():
    assert phi1_double_series(Phi1Args(0.5, 1.0, 1.0, 0.0, 0.0)).value == 1.0


# ---- phi1: cross-representation grid -------------------------------------


PARAM_GRID = [0.5, 1.0, 2.5]
X_GRID = [-10.0, -1.0, 0.0, 1.0, 10.0]
Y_GRID = [-5.0, -0.5, 0.0, 0.5, 0.9]


def test_phi1_agrees_with_double_series_on_full_grid():
    """Both representations must agree to 1e-8 relative across the grid.

    Near a genuine zero of the function (possible when gamma - alpha is a
    negative integer, making one series factor a polynomial) the relative
    scale collapses, so tiny values are compared absolutely instead.
    """
    worst = 0.0
    for alpha in PARAM_GRID:
        for beta in PARAM_GRID:
            for gamma in PARAM_GRID:
                for x in X_GRID:
                    for y in Y_GRID:
                        a = phi1(Phi1Args(alpha, beta, gamma, x, y)).value
                        b = phi1_double_series(Phi1Args(alpha, beta, gamma, x, y)).value
                        if abs(b) < 1e-8:
                            assert abs(a - b) < 1e-10, (alpha, beta, gamma, x, y)
                            continue
                        err = rel_err(a, b)
                        worst = max(worst, err)
                        assert err < 1e-8, (alpha, beta, gamma, x, y, err)
    assert worst < 1e-8


def test_phi1_positive_for_unit_beta_patterns():
    # the statistical layers always call with beta = 1 and gamma > alpha
    # (gamma - alpha is a positive shape parameter there); positivity is
    # only claimed for that pattern
    for alpha in PARAM_GRID:
        for gamma in PARAM_GRID:
            if gamma <= alpha:
                continue
            for x in (-10.0, 1.0, 10.0):
                for y in (-5.0, 0.0, 0.9):
                    assert phi1(Phi1Args(alpha, 1.0, gamma, x, y)).value > 0.0


def test_phi1_negative_y_transform_self_consistency():
    # applying value = e^x (1-y)^(-beta) * phi1(gamma-alpha, beta, gamma,
    # -x, y/(y-1)) twice lands back on the original arguments
    for (alpha, beta, gamma) in [(0.5, 1.0, 1.5), (1.0, 0.5, 2.5)]:
        for x in (-1.0, 2.0):
            for y in (-5.0, -0.5):
                direct = phi1(Phi1Args(alpha, beta, gamma, x, y)).value

                def flip(al, be, ga, xx, yy):
                    inner = phi1(Phi1Args(ga - al, be, ga, -xx, yy / (yy - 1.0))).value
                    return math.exp(xx) * (1.0 - yy) ** (-be) * inner

                once_args = (gamma - alpha, beta, gamma, -x, y / (y - 1.0))
                once_pref = math.exp(x) * (1.0 - y) ** (-beta)
                twice = once_pref * flip(*once_args)
                assert rel_err(twice, direct) < 1e-10


# ---- phi1: error and warning contracts -----------------------------------


def test_phi1_rejects_y_at_or_above_one():
    with pytest.raises(DomainError):
        phi1(Phi1Args(0.5, 1.0, 1.0, 0.0, 1.0))
    with pytest.raises(DomainError):
        phi1(Phi1Args(0.5, 1.0, 1.0, 0.0, 1.5))


def test_phi1_rejects_nonpositive_parameters():
    with pytest.raises(DomainError):
        Phi1Args(0.0, 1.0, 1.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        Phi1Args(0.5, -1.0, 1.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        Phi1Args(0.5, 1.0, 0.0, 0.0, 0.0)


def test_phi1_warns_close_to_unit_y():
    with pytest.warns(NumericalWarning):
        r = phi1(Phi1Args(0.5, 1.0, 1.0, 0.0, 0.9995))
    # truncation tail scales like rel_tol * y / (1 - y), so only ~2e-9 here
    assert rel_err(r.value, (1.0 - 0.9995) ** -0.5) < 1e-7


def test_phi1_convergence_error_carries_terms():
    with pytest.raises(ConvergenceError) as exc:
        phi1(Phi1Args(0.5, 1.0, 1.5, 30.0, 0.3, max_terms=20))
    assert exc.value.terms_used == 20


def test_phi1_compensated_flag_matches_plain():
    for args in [Phi1Args(0.5, 1.0, 1.5, -8.0, 0.6), Phi1Args(2.5, 1.0, 1.0, 10.0, 0.9)]:
        plain = phi1(args).value
        comp = phi1(args, compensated=True).value
        assert rel_err(comp, plain) < 1e-12


# ---- log variants and batching --------------------------------------------


def test_log_phi1_consistent_with_linear_scale():
    for (alpha, gamma, x, y) in [(0.5, 1.0, 3.0, 0.5), (2.5, 3.0, -4.0, -2.0)]:
        lin = phi1(Phi1Args(alpha, 1.0, gamma, x, y)).value
        assert rel_err(math.exp(log_phi1(alpha, 1.0, gamma, x, y)), lin) < 1e-12


def test_log_phi1_survives_huge_argument():
    # e^700-scale values overflow the linear scale but not the log scale
    val = log_phi1(0.5, 1.0, 1.0, 700.0, 0.0)
    assert math.isfinite(val)
    assert val > 600.0


def test_log_phi1_batch_matches_scalar():
    np = pytest.importorskip("numpy")
    xs = np.array([-6.0, -1.0, 0.0, 0.5, 3.0, 25.0])
    for y in (-1.5, 0.0, 0.6):
        batch = log_phi1_batch(0.5, 1.0, 1.5, xs, y)
        for x, got in zip(xs, batch):
            assert rel_err(got, log_phi1(0.5, 1.0, 1.5, float(x), y)) < 1e-11


def test_log_phi1_batch_negative_x_requires_gamma_above_alpha():
    np = pytest.importorskip("numpy")
    with pytest.raises(DomainError):
        log_phi1_batch(2.5, 1.0, 1.0, np.array([-1.0, 2.0]), 0.5)
