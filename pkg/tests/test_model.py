import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sdf_dirac.errors import DomainError, InvalidKappa, NonPositiveParameter, ValidationError
from sdf_dirac.model import (STANDARD, TABULATED, PotentialParams, make_potential_params,
                             make_problem, orbital_l, pseudo_orbital_l, quantum_labels,
                             sum_potential, tensor_potential, validate_problem)


@pytest.mark.parametrize("r_e, expected", [(0.8, 0.08328706767495855), (0.4, 0.04081077419238821)])
def test_b_standard(r_e, expected):
    assert make_potential_params(15, r_e, 0.1).b == pytest.approx(expected, rel=1e-14)


def test_b_tabulated_convention():
    p = make_potential_params(15, 0.8, 0.1, TABULATED)
    assert p.b == pytest.approx(math.exp(0.16) + 1, rel=1e-15)


def test_b_small_re_goes_to_zero():
    assert 0 < make_potential_params(1, 1e-12, 1).b < 2e-12


@pytest.mark.parametrize("bad", [dict(D=0), dict(r_e=-1), dict(a=-0.1)])
def test_nonpositive_parameters(bad):
    kw = dict(D=15, r_e=0.8, a=0.1) | bad
    with pytest.raises(NonPositiveParameter):
        make_potential_params(**kw)


@pytest.mark.parametrize("conv", [STANDARD, TABULATED])
def test_well_minimum_is_minus_D(conv):
    p = make_potential_params(15, 0.8, 0.1, conv)
    assert sum_potential(p.r_min, p) == pytest.approx(-15, rel=1e-13)
    r = np.linspace(0.5 * p.r_min, 3 * p.r_min, 4001)
    assert np.all(sum_potential(r, p) >= -15 * (1 + 1e-13))


def test_standard_minimum_sits_at_re():
    p = make_potential_params(15, 0.8, 0.1)
    assert p.r_min == pytest.approx(0.8, rel=1e-14)


def test_sum_potential_value_and_limits():
    p = make_potential_params(15, 0.8, 0.1)
    u = math.expm1(0.2)
    b = math.expm1(0.08)
    assert sum_potential(2.0, p) == pytest.approx(15 * b * (b / u**2 - 2 / u), rel=1e-14)
    assert -1e-10 < sum_potential(1e3, p) < 0
    assert sum_potential(1e-6, p) > 1e3


def test_potentials_reject_nonpositive_r():
    p = make_potential_params(15, 0.8, 0.1)
    with pytest.raises(DomainError):
        sum_potential(0.0, p)
    with pytest.raises(DomainError):
        tensor_potential(np.array([1.0, -1.0]), 0.5, 0.1)


def test_tensor_potential():
    assert tensor_potential(1.0, 0.5, 0.1) == pytest.approx(-0.45241870901797976, rel=1e-14)
    assert tensor_potential(3.0, 0.0, 0.1) == 0.0
    r = np.geomspace(1e-3, 1e3, 200)
    assert np.all(tensor_potential(r, 0.5, 0.1) <= 0)
    assert abs(tensor_potential(500.0, 0.5, 0.1)) * 500 < 1e-20


@pytest.mark.parametrize("kappa, n, text", [(-2, 0, "0p_{3/2}"), (1, 0, "0p_{1/2}"), (2, 0, "0d_{3/2}"),
                                            (-1, 1, "1s_{1/2}"), (-5, 2, "2g_{9/2}")])
def test_labels(kappa, n, text):
    assert str(quantum_labels(kappa, n)) == text


def test_label_errors():
    with pytest.raises(InvalidKappa):
        quantum_labels(0, 0)
    with pytest.raises(ValidationError):
        quantum_labels(-1, -1)


def test_labels_injective():
    seen = {str(quantum_labels(k, n)) for k in range(-8, 9) if k for n in range(4)}
    assert len(seen) == 16 * 4


@pytest.mark.parametrize("kappa", [k for k in range(-10, 11) if k])
def test_kappa_invariants(kappa):
    assert kappa * (kappa + 1) == (-kappa - 1) * (-kappa)
    assert kappa * (kappa - 1) == (1 - kappa) * (-kappa)
    ell, lt = orbital_l(kappa), pseudo_orbital_l(kappa)
    assert kappa * (kappa + 1) == ell * (ell + 1)
    assert kappa * (kappa - 1) == lt * (lt + 1)


def test_validate_aggregates_every_problem():
    spec = make_problem("spin")
    bad = spec.with_state(kappa=0, n=-1, potential=PotentialParams(-1.0, 0.8, -0.1))
    with pytest.raises(ValidationError) as info:
        validate_problem(bad)
    assert len(info.value.problems) == 4
    assert type(info.value) is ValidationError


def test_validate_single_kind():
    spec = make_problem("spin")
    with pytest.raises(InvalidKappa):
        validate_problem(spec.with_state(kappa=0))
    with pytest.raises(NonPositiveParameter):
        make_problem("spin", a=-0.1)
    assert validate_problem(spec) is spec


@given(st.floats(0.01, 50), st.floats(0.01, 5), st.floats(0.01, 2))
def test_b_positive(D, r_e, a):
    assert make_potential_params(D, r_e, a).b > 0
