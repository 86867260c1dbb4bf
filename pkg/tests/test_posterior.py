"""Posterior layer: conjugate-style updating, shrinkage-weight moments,
marginal likelihood, the moment generating function, and the kernel-moment
ratios tying them together.

Oracle values were produced by the independent quadrature route and frozen;
closed forms cover the untilted special cases.
"""

import math

import numpy as np
import pytest

from hibshrink.errors import ConvergenceError, DomainError
from hibshrink.posterior import (
    kappa_moment,
    kappa_moment12_batch,
    m_kernel,
    marginal_log_likelihood,
    mgf_kappa,
    prior_state,
    shrink,
    update,
)
from hibshrink.prior import HIBParams, density_kappa, half_cauchy
from hibshrink.quadrature import integrate_unit

PRIOR_GRID = [
    HIBParams(a, b, tau2, s)
    for a in (0.3, 0.5, 1.0, 2.0)
    for b in (0.3, 0.5, 1.0, 2.0)
    for tau2 in (0.25, 1.0, 4.0)
    for s in (-1.0, 0.0, 3.0)
]
PZ_PAIRS = [(0, 0.0), (7, 5.0), (15, 50.0)]


def rel_err(got: float, expected: float) -> float:
    return abs(got - expected) / abs(expected)


def state_for(prior: HIBParams, p: int, z: float):
    if p == 0:
        assert z == 0.0
        return prior_state(prior)
    return update(prior, p, z, 1.0)


# ---- update ------------------------------------------------------------------


def test_update_arithmetic_examples():
    st = update(half_cauchy(), 10, 20.0, 1.0)
    assert st.a_post == 5.5
    assert st.s_post == 10.0
    st = update(half_cauchy(), 7, 14.0, 2.0)
    assert st.a_post == 4.0
    assert st.s_post == 3.5
    st = update(HIBParams(0.7, 0.4, 2.0, 1.0), 2, 0.0, 1.0)
    assert st.a_post == 0.7 + 1.0
    assert st.s_post == 1.0


def test_update_validation():
    hc = half_cauchy()
    with pytest.raises(DomainError):
        update(hc, 0, 1.0, 1.0)
    with pytest.raises(DomainError):
        update(hc, 5, -1.0, 1.0)
    with pytest.raises(DomainError):
        update(hc, 5, 1.0, 0.0)


def test_update_composes_exactly():
    # two-block updating must land on the same parameters bit for bit
    prior = HIBParams(0.5, 0.5, 4.0, 1.0)
    st_once = update(prior, 12, 20.0, 1.0)
    st_first = update(prior, 4, 8.0, 1.0)
    carried = HIBParams(st_first.a_post, prior.b, prior.tau2, st_first.s_post)
    st_two = update(carried, 8, 12.0, 1.0)
    assert st_two.a_post == st_once.a_post
    assert st_two.s_post == st_once.s_post


def test_prior_state_round_trip():
    prior = HIBParams(1.2, 0.4, 0.5, -2.0)
    st = prior_state(prior)
    assert st.p == 0 and st.Z == 0.0
    assert st.a_post == prior.a
    assert st.s_post == prior.s


# ---- kappa_moment ---------------------------------------------------------------


def test_kappa_moment_n_zero_is_exactly_one():
    st = update(half_cauchy(), 10, 20.0, 1.0)
    assert kappa_moment(st, 0) == 1.0


def test_kappa_moment_prior_mean():
    assert rel_err(kappa_moment(prior_state(half_cauchy()), 1), 0.5) < 1e-12


def test_kappa_moment_frozen_oracle_anchors():
    # frozen from quadrature.oracle_hib_moment
    st = update(half_cauchy(), 10, 20.0, 1.0)
    assert rel_err(kappa_moment(st, 1), 0.60053125024977094) < 1e-9
    assert rel_err(kappa_moment(st, 2), 0.41085000039961345) < 1e-9
    st = update(HIBParams(0.3, 0.3, 0.25, -1.0), 15, 50.0, 1.0)
    assert rel_err(kappa_moment(st, 1), 0.36210025169868004) < 1e-9
    st = update(HIBParams(2.0, 2.0, 4.0, 3.0), 7, 5.0, 1.0)
    assert rel_err(kappa_moment(st, 2), 0.32460546680617852) < 1e-9


def test_kappa_moment_bounds_and_ordering():
    for prior in (half_cauchy(), HIBParams(0.3, 2.0, 4.0, -1.0)):
        for (p, z) in ((1, 0.0), (7, 5.0), (15, 200.0)):
            st = update(prior, p, z, 1.0)
            m1 = kappa_moment(st, 1)
            m2 = kappa_moment(st, 2)
            m3 = kappa_moment(st, 3)
            assert 0.0 < m3 <= m2 <= m1 <= 1.0
            assert m2 >= m1 * m1 - 1e-15  # Jensen


def test_kappa_moment_strictly_decreasing_in_data_norm():
    z_grid = np.arange(0.0, 101.0)
    for prior in PRIOR_GRID:
        g1, _ = kappa_moment12_batch(prior, 7, z_grid)
        assert np.all(np.diff(g1) < 0.0), prior


def test_kappa_moment_batch_matches_scalar():
    z_values = np.array([0.0, 1.0, 10.0, 77.5, 400.0])
    for prior in (half_cauchy(), HIBParams(2.0, 0.3, 0.25, 3.0)):
        g1, g2 = kappa_moment12_batch(prior, 9, z_values)
        for z, m1, m2 in zip(z_values, g1, g2):
            st = update(prior, 9, float(z), 1.0)
            assert rel_err(m1, kappa_moment(st, 1)) < 1e-11
            assert rel_err(m2, kappa_moment(st, 2)) < 1e-11


def test_kappa_moment_huge_tilt_needs_longer_series():
    st = update(half_cauchy(), 10, 1e6, 1.0)
    with pytest.raises(ConvergenceError):
        kappa_moment(st, 1)  # default term budget is too small here
    val = kappa_moment(st, 1, max_terms=3_000_000)
    assert 0.0 < val < 1e-4


# ---- score identity -------------------------------------------------------------


def test_kernel_moment_ratio_equals_posterior_mean():
    for prior in PRIOR_GRID:
        for (p, z) in PZ_PAIRS:
            ratio = m_kernel(prior, p + 2, z) / m_kernel(prior, p, z)
            expected = kappa_moment(state_for(prior, p, z), 1)
            assert rel_err(ratio, expected) < 1e-10, (prior, p, z)


def test_m_kernel_anchors():
    hc = half_cauchy()
    assert rel_err(m_kernel(hc, 0, 0.0), 1.0) < 1e-12
    assert rel_err(m_kernel(hc, 2, 0.0), 0.5) < 1e-12
    assert rel_err(m_kernel(hc, 4, 0.0), 0.375) < 1e-12


# ---- shrink ----------------------------------------------------------------------


def test_shrink_zero_vector():
    fit = shrink(np.zeros(7), 1.0, half_cauchy())
    assert np.all(fit.post_mean == 0.0)
    st = update(half_cauchy(), 7, 0.0, 1.0)
    assert rel_err(fit.kappa_bar, kappa_moment(st, 1)) < 1e-12
    assert rel_err(fit.post_var_scalar, (1.0 - fit.kappa_bar)) < 1e-12


def test_shrink_constant_vector_frozen_anchor():
    y = np.full(10, 2.0)
    fit = shrink(y, 1.0, half_cauchy())
    assert rel_err(fit.kappa_bar, 0.28655938893011501) < 1e-9
    np.testing.assert_allclose(fit.post_mean, (1.0 - fit.kappa_bar) * y, rtol=1e-14)
    assert rel_err(
        fit.log_marginal, marginal_log_likelihood(y, 1.0, half_cauchy())
    ) < 1e-12


def test_shrink_huge_signal_barely_shrinks():
    y = np.full(10, math.sqrt(1e5))
    fit = shrink(y, 1.0, half_cauchy(), max_terms=3_000_000)
    assert fit.kappa_bar < 1e-4
    assert np.all(np.abs(fit.post_mean - y) / y < 1e-4)


# ---- marginal likelihood ----------------------------------------------------------


def test_marginal_scalar_uniform_closed_form():
    got = marginal_log_likelihood(np.zeros(1), 1.0, HIBParams(1.0, 1.0, 1.0, 0.0))
    assert rel_err(got, math.log(math.sqrt(2.0 / math.pi) / 3.0)) < 1e-12


def test_marginal_sigma_rescaling_identity():
    y = np.array([0.3, -1.2, 2.5, 0.0, 4.0])
    prior = HIBParams(0.5, 1.0, 4.0, -1.0)
    for sigma2 in (0.25, 2.0, 9.0):
        sigma = math.sqrt(sigma2)
        lhs = marginal_log_likelihood(y, sigma2, prior)
        rhs = marginal_log_likelihood(y / sigma, 1.0, prior) - len(y) * math.log(sigma)
        assert abs(lhs - rhs) < 1e-10


def test_marginal_matches_mixture_quadrature():
    # independent route: integrate prod_i N(y_i | 0, 1/kappa) against the
    # prior kappa density
    rng = np.random.default_rng(12345)
    y = rng.normal(0.0, 1.5, size=10)
    z = float(np.sum(y * y))
    p = len(y)
    for prior in (half_cauchy(), HIBParams(1.0, 2.0, 4.0, 1.0)):
        def f(k: float) -> float:
            return density_kappa(prior, k) * k ** (p / 2.0) * math.exp(-0.5 * k * z)

        mix = integrate_unit(f, prior.a + p / 2.0, prior.b)
        expected = -0.5 * p * math.log(2.0 * math.pi) + math.log(mix)
        got = marginal_log_likelihood(y, 1.0, prior)
        assert rel_err(math.exp(got), math.exp(expected)) < 1e-6


def test_marginal_scalar_density_integrates_to_one():
    # a thin-tailed member keeps the truncation error of the finite data
    # window below the tolerance (tail decays like |y|^-6 here)
    prior = HIBParams(2.0, 1.0, 1.0, 0.0)
    half_width = 100.0

    def f(t: float) -> float:
        y = np.array([half_width * t])
        return half_width * math.exp(marginal_log_likelihood(y, 1.0, prior))

    mass = 2.0 * integrate_unit(f, 1.0, 1.0)
    assert abs(mass - 1.0) < 1e-6


# ---- moment generating function ----------------------------------------------------


def test_mgf_at_zero_is_one():
    st = update(half_cauchy(), 5, 3.0, 1.0)
    assert mgf_kappa(st, 0.0) == 1.0


def test_mgf_derivative_matches_first_moment():
    st = update(half_cauchy(), 10, 20.0, 1.0)
    h = 1e-5
    deriv = (mgf_kappa(st, h) - mgf_kappa(st, -h)) / (2.0 * h)
    assert abs(deriv - kappa_moment(st, 1)) < 1e-6


def test_mgf_uniform_prior_closed_form():
    st = prior_state(HIBParams(1.0, 1.0, 1.0, 0.0))
    assert rel_err(mgf_kappa(st, 1.0), math.e - 1.0) < 1e-10
    assert rel_err(mgf_kappa(st, -1.0), 1.0 - math.exp(-1.0)) < 1e-10
