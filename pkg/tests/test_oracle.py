import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdf_dirac.errors import DomainError, NoSignChange, NoValidBranch, ValidationError
from sdf_dirac.oracle import (NUProblem, approx_curves, approximation_error_report, bracket_around,
                              nu_construct, nu_problem, nu_quantization_residual, ode_coefficients,
                              pi_square_residual, rodrigues_jacobi, shoot_eigenvalue, z_ode_residual)
from sdf_dirac.spectrum import coefficients, effective_kappa, physical_root, residual
from sdf_dirac.wavefunction import jacobi

from conftest import table_state


def closed_form(E, spec):
    """alpha, beta, gamma as the energy equation's z-space equation states them."""
    c = coefficients(E, spec)
    k = effective_kappa(spec)
    A, b = spec.A, spec.potential.b
    return (A * A - A + c.xi * (b + 2) + c.zeta, 2 * A * (k + 1) - 2 * c.xi - 2 * c.zeta, k * (k + 1) + c.zeta)


@pytest.mark.parametrize("sym, kw", [("spin", dict(kappa=-2)), ("spin", dict(kappa=3, A=0.5, C=5)),
                                     ("pseudospin", dict(kappa=-1, n=1, A=0.5)),
                                     ("pseudospin", dict(kappa=4, n=2, A=0.5, C=-5))])
def test_substitution_matches_closed_form(sym, kw):
    spec = table_state(sym, **kw)
    E = physical_root(spec).E
    assert ode_coefficients(E, spec) == pytest.approx(closed_form(E, spec), rel=1e-13, abs=1e-9)


def test_direct_pseudospin_tensor_differs_only_when_A_nonzero():
    with_tensor = table_state("pseudospin", kappa=-2, n=1, A=0.5)
    E = physical_root(with_tensor).E
    al_m, be_m, _ = ode_coefficients(E, with_tensor)
    al_d, be_d, _ = ode_coefficients(E, with_tensor, tensor="direct")
    A, k = 0.5, -2
    assert al_d - al_m == pytest.approx(2 * A)                          # A^2 + A against A^2 - A
    assert be_d - be_m == pytest.approx(2 * A * (k - 1) - 2 * A * k)     # 2A(k-1) against 2Ak
    bare = table_state("pseudospin", kappa=-2, n=1)
    E0 = physical_root(bare).E
    assert ode_coefficients(E0, bare, tensor="direct") == pytest.approx(ode_coefficients(E0, bare), rel=1e-14)
    with pytest.raises(ValidationError):
        ode_coefficients(E0, bare, tensor="other")


@pytest.mark.parametrize("sym, kw", [("spin", dict(kappa=-2)), ("spin", dict(kappa=1, A=0.5, n=1)),
                                     ("pseudospin", dict(kappa=-3, n=2, A=0.5, C=-5))])
def test_nu_instance(sym, kw):
    spec = table_state(sym, **kw)
    E = physical_root(spec).E
    al, be, ga = closed_form(E, spec)
    c8, c9 = ga, al + be + ga + 0.25
    sol = nu_construct(nu_problem(E, spec), spec.n)
    pi = np.zeros(2)
    pi[: len(sol.pi.coef)] = sol.pi.coef
    assert pi == pytest.approx([math.sqrt(c8), -0.5 - math.sqrt(c9) - math.sqrt(c8)], rel=1e-10)
    assert sol.tau.deriv().coef[0] == pytest.approx(-2 * (1 + math.sqrt(c9) + math.sqrt(c8)), rel=1e-12)
    c = coefficients(E, spec)
    k = effective_kappa(spec)
    assert sol.k == pytest.approx(2 * c.xi - 2 * (spec.A + k) * (k + 1) - 2 * math.sqrt(c8 * c9), rel=1e-10)
    # lambda = lambda_n rearranged is the energy equation: the two differ by sign only
    assert abs(sol.quantization_residual + residual(E, spec)) < 1e-8


def test_pi_satisfies_its_defining_equation():
    spec = table_state("spin", kappa=-3, A=0.5, n=1)
    E = physical_root(spec).E
    p = nu_problem(E, spec)
    sol = nu_construct(p, spec.n)
    z = np.random.default_rng(3).uniform(0, 1, 20)
    scale = np.max(np.abs(np.asarray(p.sigma_tilde)))
    assert np.max(np.abs(pi_square_residual(sol, p, z))) < 1e-10 * max(1.0, scale)


def test_degenerate_instance():
    p = NUProblem(sigma=(0.0, 1.0, -1.0), tau_tilde=(1.0, -1.0), sigma_tilde=(0.0,))
    sol = nu_construct(p, 0)
    assert len(sol.k_candidates) == 2
    z = np.linspace(0, 1, 11)
    assert np.max(np.abs(pi_square_residual(sol, p, z))) < 1e-14
    assert sol.tau.deriv().coef[0] < 0


def test_no_valid_branch():
    with pytest.raises(NoValidBranch):
        nu_construct(NUProblem(sigma=(0.0, 0.0, 1.0), tau_tilde=(0.0, 2.0), sigma_tilde=(-1.0,)))


def test_nu_problem_degree_checks():
    with pytest.raises(ValidationError):
        NUProblem(sigma=(0, 0, 0, 1.0), tau_tilde=(1.0,), sigma_tilde=(0.0,))
    with pytest.raises(ValidationError):
        NUProblem(sigma=(0, 1.0), tau_tilde=(1.0, 0, 1.0), sigma_tilde=(0.0,))
    with pytest.raises(ValidationError):
        nu_construct(NUProblem(sigma=(0, 1.0, -1.0), tau_tilde=(1.0, -1.0), sigma_tilde=(0.0,)), -1)


def test_nu_residual_at_and_off_roots():
    spec = table_state("spin", kappa=-2)
    E = physical_root(spec).E
    at = abs(nu_quantization_residual(E, spec))
    assert at < 1e-6
    assert abs(nu_quantization_residual(E + 1e-3, spec)) > 10 * at
    lo, hi = -0.999, 0.99
    grid = [x for x in np.linspace(lo, hi, 100) if abs(x - E) >= 1e-2]
    assert min(abs(nu_quantization_residual(x, spec)) for x in grid) > 1e-3


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.999, 0.999))
def test_nu_degeneracy_at_A0(E):
    a = table_state("spin", kappa=-2)
    b = table_state("spin", kappa=1)
    assert nu_quantization_residual(E, a) == nu_quantization_residual(E, b)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_rodrigues_matches_recurrence(n):
    rng = np.random.default_rng(n)
    for _ in range(5):
        al, be = rng.uniform(-0.9, 6, 2)
        rod = rodrigues_jacobi(n, al, be)
        z = 0.5 - 0.5 * np.cos(np.pi * (np.arange(n + 1) + 0.5) / (n + 1))
        rec = np.polynomial.polynomial.polyfit(z, jacobi(n, al, be, 1 - 2 * z), n)
        assert np.max(np.abs(rod - rec)) <= 1e-9 * np.max(np.abs(rec))


def test_rodrigues_rejects_bad_degree():
    with pytest.raises(ValidationError):
        rodrigues_jacobi(-1, 0, 0)


@pytest.mark.parametrize("sym, kw, E_table", [
    ("spin", dict(kappa=-2), -0.994680673675),
    ("pseudospin", dict(kappa=-1, n=1, A=0.5, C=-5), -3.98536953322),
])
def test_shooting_examples(sym, kw, E_table):
    spec = table_state(sym, **kw)
    E = physical_root(spec).E
    shot = shoot_eigenvalue(spec, bracket_around(E, spec))
    assert abs(shot.E - E_table) < 1e-8
    assert abs(shot.E - E) < 1e-10
    assert shot.nodes == spec.n
    assert abs(shot.mismatch) < 1e-8 and shot.integration_steps > 0


def test_shooting_no_sign_change():
    spec = table_state("spin", kappa=-2)
    E = physical_root(spec).E
    with pytest.raises(NoSignChange):
        shoot_eigenvalue(spec, (E + 1e-4, E + 2e-4))
    with pytest.raises(ValidationError):
        shoot_eigenvalue(spec, (E, E))


def test_bracket_shrinks_into_domain():
    spec = table_state("spin", C=5, A=0.5, kappa=1, n=1)
    E = physical_root(spec).E
    lo, hi = bracket_around(E, spec)
    assert lo == pytest.approx(E - 1e-3) and hi == pytest.approx(E + 5e-4)
    assert shoot_eigenvalue(spec, (lo, hi), count_nodes=False).E == pytest.approx(E, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 5), st.lists(st.floats(1e-4, 500), min_size=1, max_size=20))
def test_f2_dominates_f1(a, rs):
    for pt in approx_curves(a, rs):
        assert pt.f2 >= pt.f1 * (1 - 1e-14)


def test_curve_limits():
    small = approx_curves(0.5, [1e-7])[0]
    assert small.f2 / small.f1 == pytest.approx(1.0, rel=1e-6)
    large = approx_curves(0.5, [200.0])[0]
    assert large.f2 == pytest.approx(0.25, rel=1e-12) and large.f1 < 1e-4
    dev = {a: (lambda p: (p.f2 - p.f1) / p.f1)(approx_curves(a, [5.0])[0]) for a in (0.1, 1.0)}
    assert dev[0.1] < dev[1.0]


def test_curve_domain():
    with pytest.raises(DomainError):
        approx_curves(0.1, [1.0, 0.0])
    with pytest.raises(DomainError):
        approx_curves(0.0, [1.0])


def test_error_report_with_tensor():
    spec = table_state("spin", kappa=-2, A=0.5).with_state(
        potential=table_state("spin").potential.__class__(15.0, 0.8, 0.1, "standard"))
    rep = approximation_error_report(spec)
    first, second = rep.entries
    for e in rep.entries:
        assert abs(e.E_pekeris - e.E_analytic) < 1e-8
        assert math.isfinite(e.delta) and e.delta != 0
    assert abs(second.delta) > abs(first.delta)
    assert second.r_e * second.a == pytest.approx(first.r_e * first.a)


def test_ode_residual_domain():
    spec = table_state("spin")
    with pytest.raises(DomainError):
        z_ode_residual(lambda z: z, -0.99, spec, np.array([1e-6]))
