import math

import pytest

from conftest import M_P
from mlqm.bounds import (
    BeamSpec,
    RelativisticBeamWarning,
    composite_scaling,
    delta_S,
    invert_bound,
    linear_model_rhs,
)
from mlqm.deformation import DeformationModel
from mlqm.errors import DomainError

MUON = BeamSpec(0.1, 0.01)
NEUTRON = BeamSpec(1.0, 0.01, N_constituents=3)


def test_muon_linear_order():
    eps = delta_S(DeformationModel.linear(1.0), MUON, 2)
    assert 1e-21 <= eps <= 1e-20
    assert eps == pytest.approx(2 * math.sqrt(0.002) / M_P, rel=1e-15)


def test_muon_quadratic_order():
    eps = delta_S(DeformationModel.quadratic(1.0), MUON, 2)
    assert 1e-42 <= eps <= 1e-40
    assert eps > 0.0


def test_zero_beta_gives_zero():
    assert delta_S(DeformationModel.linear(0.0), MUON, 2) == 0.0
    assert delta_S(DeformationModel.quadratic(0.0), MUON, 1) == 0.0


def test_alternative_linear_bookkeeping_is_half():
    honest = delta_S(DeformationModel.linear(1.0), MUON, 2)
    assert linear_model_rhs(1.0, MUON) == pytest.approx(honest / 2, rel=1e-15)


def test_neutron_bounds_examples():
    lin = invert_bound("linear", NEUTRON, 1, 1.0)
    quad = invert_bound("quadratic", NEUTRON, 1, 1.0)
    assert lin.beta_bound == pytest.approx(M_P / math.sqrt(0.02), rel=1e-15)
    assert lin.beta_bound == pytest.approx(8.6e19, rel=0.01)
    assert quad.beta_bound == pytest.approx(M_P**2 / 0.02, rel=1e-15)
    assert quad.beta_bound == pytest.approx(7.5e39, rel=0.01)
    assert lin.delta == 1.0 and lin.power == 1


def test_bound_linear_in_delta():
    full = invert_bound("linear", NEUTRON, 1, 1.0).beta_bound
    half = invert_bound("linear", NEUTRON, 1, 0.5).beta_bound
    assert half == full / 2


def test_exact_bound_power_two():
    rep = invert_bound("linear", NEUTRON, 2, 0.5)
    x = NEUTRON.momentum_GeV / M_P
    y = rep.beta_bound_exact * x
    assert (1 + y) ** 2 - 1 == pytest.approx(0.5, rel=1e-14)
    assert rep.beta_bound == pytest.approx(0.5 / (2 * x), rel=1e-15)


@pytest.mark.parametrize("kind", ["linear", "quadratic"])
@pytest.mark.parametrize("power", [1, 2])
def test_round_trip(kind, power):
    beta0 = 3.7
    model = DeformationModel.linear(beta0) if kind == "linear" else DeformationModel.quadratic(beta0)
    eps = delta_S(model, NEUTRON, power)
    assert invert_bound(kind, NEUTRON, power, eps).beta_bound == pytest.approx(beta0, rel=1e-9)


@pytest.mark.parametrize("kind", ["linear", "quadratic"])
def test_delta_S_monotone(kind):
    make = DeformationModel.linear if kind == "linear" else DeformationModel.quadratic
    base = delta_S(make(1.0), MUON, 2)
    assert delta_S(make(1.0), BeamSpec(0.1, 0.015), 2) > base
    assert delta_S(make(1.0), BeamSpec(0.12, 0.01), 2) > base
    assert delta_S(make(1.5), MUON, 2) > base


def test_bound_decreases_with_momentum():
    low = invert_bound("quadratic", BeamSpec(1.0, 0.01), 1, 1.0).beta_bound
    high = invert_bound("quadratic", BeamSpec(1.0, 0.02), 1, 1.0).beta_bound
    assert high < low


def test_orders_over_delta_range():
    for delta in (0.01, 0.1, 1.0):
        lin = invert_bound("linear", NEUTRON, 1, delta).beta_bound
        quad = invert_bound("quadratic", NEUTRON, 1, delta).beta_bound
        assert 1e17 <= lin <= 1e20
        assert 1e37 <= quad <= 1e40


def test_invert_bound_errors():
    with pytest.raises(DomainError):
        invert_bound("linear", NEUTRON, 1, 0.0)
    with pytest.raises(DomainError):
        invert_bound("custom", NEUTRON, 1, 1.0)
    with pytest.raises(DomainError):
        delta_S(DeformationModel.linear(1.0), NEUTRON, 3)


def test_composite_scaling():
    assert composite_scaling(1.0, 1, 2.0) == 1.0
    assert composite_scaling(1.0, 3, 2.0) == pytest.approx(1 / 9, rel=1e-15)
    assert composite_scaling(1e40, 10, 2.0) == pytest.approx(1e38, rel=1e-15)
    with pytest.raises(DomainError):
        composite_scaling(1.0, 0, 2.0)
    rep = invert_bound("linear", NEUTRON, 1, 1.0)
    assert rep.beta_effective == pytest.approx(rep.beta_bound / 9, rel=1e-15)


def test_relativistic_warning():
    with pytest.warns(RelativisticBeamWarning):
        BeamSpec(1.0, 0.5)


def test_beam_validation():
    with pytest.raises(DomainError):
        BeamSpec(0.0, 0.01)
    with pytest.raises(DomainError):
        BeamSpec(1.0, 0.01, N_constituents=0)
