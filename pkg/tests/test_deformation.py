import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from conftest import M_P, random_distribution, random_model
from mlqm.deformation import (
    DeformationModel,
    ModelKind,
    commutativity_condition,
    expectation_f,
    f_excess,
    f_of,
    g_of,
    gup_bound,
    log_derivative,
    minimal_length,
)
from mlqm.errors import DomainError, SingularityError
from mlqm.hilbert import MomentumDistribution


# -- oracles -----------------------------------------------------------------

def series_mul(a, b, order):
    out = [Fraction(0)] * (order + 1)
    for i, x in enumerate(a[: order + 1]):
        for j, y in enumerate(b[: order + 1 - i]):
            out[i + j] += x * y
    return out


def series_inv(a, order):
    """Reciprocal of a power series with a[0] != 0."""
    out = [Fraction(0)] * (order + 1)
    out[0] = 1 / a[0]
    for n in range(1, order + 1):
        acc = sum(a[k] * out[n - k] for k in range(1, min(n, len(a) - 1) + 1))
        out[n] = -acc / a[0]
    return out


def quadratic_g_series(beta: Fraction, order: int = 8):
    """Taylor coefficients of g for f = 1 + beta u, built from the Jacobi relation."""
    f = [Fraction(1), beta]
    fprime = [beta]
    # 2 u (log f)' = 2 u f'/f
    two_u_logf = [Fraction(0)] + [2 * c for c in series_mul(fprime, series_inv(f, order), order - 1)]
    margin = [Fraction(1) - two_u_logf[0]] + [-c for c in two_u_logf[1:]]
    ratio = series_mul(two_u_logf, series_inv(margin, order), order)
    return series_mul(ratio, f, order)


def mp_g(model: DeformationModel, u: float) -> mpmath.mpf:
    """g from its defining relation with a high-precision numerical derivative."""
    with mpmath.workdps(40):
        h = mpmath.mpf(model.half_power)

        def f(x):
            acc = sum(mpmath.mpf(c) * x**k for k, c in enumerate(model.series_c))
            return acc + h * mpmath.sqrt(x)

        x = mpmath.mpf(u)
        dlog = mpmath.diff(lambda y: mpmath.log(f(y)), x)
        t = 2 * dlog * x
        return t / (1 - t) * f(x)


def golden_section_min(fn, lo, hi, tol=1e-15):
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    while abs(b - a) > tol * (abs(a) + abs(b)):
        if fn(c) < fn(d):
            b = d
        else:
            a = c
        c, d = b - invphi * (b - a), a + invphi * (b - a)
    x = (a + b) / 2
    return x, fn(x)


# -- f -----------------------------------------------------------------------

def test_f_quadratic_values():
    q = DeformationModel.quadratic(1.0)
    assert f_of(q, 0.0) == 1.0
    assert f_of(q, 0.5) == 1.5


def test_f_linear_muon_excess():
    u = (0.04472 / 1.220890e19) ** 2
    model = DeformationModel.linear(1.0)
    assert f_excess(model, u) == pytest.approx(3.663e-21, rel=2e-4)
    # the collapsed float loses the correction entirely
    assert f_of(model, u) == 1.0


def test_f_domain_errors():
    q = DeformationModel.quadratic(2.0)
    with pytest.raises(DomainError):
        f_of(q, -1e-3)
    with pytest.raises(DomainError):
        f_of(q, 0.6)


def test_f_is_vectorized():
    q = DeformationModel.quadratic(1.0)
    np.testing.assert_array_equal(f_of(q, np.array([0.0, 0.25, 0.5])), [1.0, 1.25, 1.5])


# -- g and the commutativity margin --------------------------------------------

def test_g_vanishes_at_zero(rng):
    for _ in range(20):
        assert g_of(random_model(rng), 0.0) == 0.0


def test_g_quadratic_closed_form_value():
    assert g_of(DeformationModel.quadratic(1.0), 0.25) == pytest.approx(2 * 0.25 * 1.25 / 0.75, rel=1e-15)


@pytest.mark.parametrize("beta", [Fraction(1), Fraction(1, 3), Fraction(7, 2)])
def test_g_quadratic_series_term_by_term(beta):
    coeffs = quadratic_g_series(beta)
    assert coeffs[0] == 0
    assert coeffs[1] == 2 * beta
    # closed form 2bu(1+bu)/(1-bu) = 2bu + sum_{n>=2} 4 b^n u^n
    assert all(coeffs[n] == 4 * beta**n for n in range(2, 9))
    b = float(beta)
    for u in np.linspace(0.0, 0.05 / b, 11):
        series = float(sum(c * Fraction(u) ** n for n, c in enumerate(coeffs)))
        assert g_of(DeformationModel.quadratic(b), u) == pytest.approx(series, rel=1e-10, abs=0)


def test_g_singular_at_commutativity_limit():
    q = DeformationModel.quadratic(1.0)
    with pytest.raises(SingularityError):
        g_of(q, 1.0)


def test_margin_examples():
    q = DeformationModel.quadratic(1.0)
    assert commutativity_condition(q, 0.0) == 1.0
    assert commutativity_condition(q, 1.0) == 0.0
    root = optimize.brentq(lambda u: commutativity_condition(q, u), 0.5, 2.0, xtol=1e-15)
    assert root == pytest.approx(1.0, abs=1e-12)


def test_margin_linear_against_finite_difference():
    lin = DeformationModel.linear(1.0)
    u, h = 0.01, 1e-7
    dlog = (math.log(1 + math.sqrt(u + h)) - math.log(1 + math.sqrt(u - h))) / (2 * h)
    assert commutativity_condition(lin, u) == pytest.approx(1 - 2 * dlog * u, rel=1e-8)
    assert commutativity_condition(lin, u) == pytest.approx(1 / 1.1, rel=1e-14)


def test_log_derivative_analytic():
    q = DeformationModel.quadratic(2.0)
    assert log_derivative(q, 0.1) == pytest.approx(2.0 / 1.2, rel=1e-14)


def test_jacobi_closure_random_models(rng):
    for _ in range(25):
        model = random_model(rng)
        for u in rng.uniform(1e-6, 0.9 * min(model.u_max, 1.0), 4):
            assert g_of(model, u) == pytest.approx(float(mp_g(model, u)), rel=1e-10)


def test_margin_positive_below_u_max(rng):
    for beta in (0.5, 1.0, 4.0):
        q = DeformationModel.quadratic(beta)
        u = np.linspace(0.0, q.u_max, 200, endpoint=False)
        assert np.all(commutativity_condition(q, u) > 0)
        assert commutativity_condition(q, q.u_max) == pytest.approx(0.0, abs=1e-15)


# -- model construction ---------------------------------------------------------

def test_quadratic_u_max_is_inverse_beta():
    assert DeformationModel.quadratic(4.0).u_max == 0.25
    assert DeformationModel.quadratic(0.0).u_max == math.inf


def test_linear_positive_beta_never_violates_commutativity():
    assert DeformationModel.linear(3.0).u_max == math.inf
    assert DeformationModel.linear(-2.0).u_max == pytest.approx(0.25)


def test_custom_u_max_found_by_bisection():
    # same f as the quadratic model, routed through the numerical search
    custom = DeformationModel.custom([1.0, 2.0])
    assert custom.u_max == pytest.approx(0.5, rel=1e-12)
    # f - 2uf' = 1 - u - 3u^2 for f = 1 + u + u^2
    custom = DeformationModel.custom([1.0, 1.0, 1.0])
    assert custom.u_max == pytest.approx((-1 + math.sqrt(13)) / 6, rel=1e-12)


def test_model_invariants_enforced():
    with pytest.raises(DomainError):
        DeformationModel.custom([0.5, 1.0])
    with pytest.raises(DomainError):
        DeformationModel.custom([1.0] + [0.1] * 9)
    with pytest.raises(DomainError):
        DeformationModel.quadratic(1.0, u_max=2.0)
    with pytest.raises(DomainError):
        DeformationModel.custom([1.0, float("nan")])


def test_config_round_trip():
    for model in (DeformationModel.linear(0.3), DeformationModel.quadratic(2.0, u_max=0.1),
                  DeformationModel.custom([1.0, 0.2, 0.05], half_power=0.1)):
        assert DeformationModel.from_config(model.to_config()) == model
    assert DeformationModel.quadratic(1.0).kind is ModelKind.QUADRATIC


# -- GUP -------------------------------------------------------------------------

def test_gup_bound_values():
    assert gup_bound(1.0, M_P / math.sqrt(3)) == pytest.approx(math.sqrt(3) / M_P, rel=1e-15)
    assert gup_bound(1e-300, 1.0) == 0.5
    assert gup_bound(1.0, M_P) == pytest.approx(2.0 / M_P, rel=1e-15)
    with pytest.raises(DomainError):
        gup_bound(0.0, 1.0)
    with pytest.raises(DomainError):
        gup_bound(1.0, -1.0)


@pytest.mark.parametrize(
    "beta, dpi_star, dx_min",
    [
        (1.0, M_P / math.sqrt(3), math.sqrt(3) / M_P),
        (1.0 / 3.0, M_P, 1.0 / M_P),
        (4.0, M_P / (2 * math.sqrt(3)), 2 * math.sqrt(3) / M_P),
    ],
)
def test_minimal_length_examples(beta, dpi_star, dx_min):
    got = minimal_length(beta)
    # golden-section oracle on the scaled bound
    t, val = golden_section_min(lambda t: (1 + 3 * beta * t * t) / (2 * t), 1e-3, 1e3)
    assert got.delta_pi_star == pytest.approx(dpi_star, rel=1e-12)
    assert got.delta_x_min == pytest.approx(dx_min, rel=1e-12)
    assert got.delta_pi_star == pytest.approx(t * M_P, rel=1e-7)
    assert got.delta_x_min == pytest.approx(val / M_P, rel=1e-12)


def test_minimal_length_rejects_non_positive_beta():
    with pytest.raises(DomainError):
        minimal_length(0.0)
    with pytest.raises(DomainError):
        minimal_length(-1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e3), st.floats(min_value=-6.0, max_value=6.0))
def test_gup_bound_never_below_minimum(beta, log10_ratio):
    dpi = M_P * 10.0**log10_ratio
    assert gup_bound(beta, dpi) >= math.sqrt(3 * beta) / M_P * (1 - 1e-15)


# -- expectation of f --------------------------------------------------------------

def test_expectation_f_point_mass_at_zero(rng):
    dist = MomentumDistribution.point(0.0)
    for _ in range(5):
        c = expectation_f(random_model(rng), dist, 2)
        assert (c.base, c.epsilon) == (1.0, 0.0)


def test_expectation_f_muon_linear():
    dist = MomentumDistribution.monoenergetic(0.1, 0.01)
    eps2 = expectation_f(DeformationModel.linear(1.0), dist, 2).epsilon
    eps1 = expectation_f(DeformationModel.linear(1.0), dist, 1).epsilon
    s = math.sqrt(2 * 0.1 * 0.01) / M_P
    assert eps1 == pytest.approx(s, rel=1e-15)
    assert eps2 == pytest.approx(2 * s, rel=1e-15)
    assert eps2 == pytest.approx(7.33e-21, rel=1e-3)


def test_expectation_f_muon_quadratic():
    dist = MomentumDistribution.monoenergetic(0.1, 0.01)
    eps = expectation_f(DeformationModel.quadratic(1.0), dist, 2).epsilon
    assert eps == pytest.approx(2 * 2 * 0.1 * 0.01 / M_P**2, rel=1e-14)
    assert eps == pytest.approx(2.68e-41, rel=2e-3)


def test_expectation_f_outside_domain():
    dist = MomentumDistribution.point(M_P)
    with pytest.raises(DomainError):
        expectation_f(DeformationModel.quadratic(2.0), dist, 1)


def test_expectation_f_monotone_in_power(rng):
    for _ in range(30):
        model = random_model(rng)
        dist = random_distribution(rng, model, 16)
        e1 = expectation_f(model, dist, 1).epsilon
        e2 = expectation_f(model, dist, 2).epsilon
        assert e2 >= e1 >= 0.0


def test_expectation_f_gaussian_matches_quadrature_of_moments():
    sigma = 0.01 * M_P
    dist = MomentumDistribution.gaussian_radial(sigma, 32)
    # <pi^2> = 3 sigma^2 for an isotropic Gaussian
    eps = expectation_f(DeformationModel.quadratic(1.0), dist, 1).epsilon
    assert eps == pytest.approx(3 * 1e-4, rel=1e-12)
