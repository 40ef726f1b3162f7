"""Independent checks of the analytic results.

* Nikiforov-Uvarov construction for a generic hypergeometric-type equation,
  applied to the z-space radial equation at a trial energy.
* Shooting on the same z-space equation, whose coefficients are rebuilt here
  by substituting the potentials term by term (not taken from ``spectrum``).
* r-space shooting with and without the exponential replacement of the
  centrifugal and 1/r tensor terms, to measure the error that replacement
  introduces.
* Rodrigues-form Jacobi polynomials by symbolic differentiation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import ode
from scipy.optimize import brentq

from .errors import DomainError, NoSignChange, NoValidBranch, StiffnessFailure, ValidationError
from .model import ProblemSpec, Symmetry
from .spectrum import EnergyRoot, effective_kappa, physical_root

Z = Polynomial([0.0, 1.0])
ONE = Polynomial([1.0])


# --- coefficients by direct substitution ------------------------------------

def _energy(root) -> float:
    return root.E if isinstance(root, EnergyRoot) else float(root)


def _potential_factors(E: float, spec: ProblemSpec) -> tuple[float, float]:
    """(xi, zeta): prefactors of the well shape and of the constant term, over a^2."""
    p, M, C = spec.potential, spec.M, spec.C
    if spec.symmetry is Symmetry.SPIN:
        coupling = M + E - C          # multiplies (M - E + Sigma)
        return coupling * p.D * p.b / p.a**2, coupling * (M - E) / p.a**2
    coupling = M - E + C              # multiplies (M + E - Delta)
    return -coupling * p.D * p.b / p.a**2, coupling * (M + E) / p.a**2


def substituted_numerator(E: float, spec: ProblemSpec, *, tensor: str = "mapped") -> Polynomial:
    """N(z) in  F'' + F'/z = N(z) F / (z^2 (1-z)^2),  z = exp(-a r).

    Built term by term after replacing 1/r^2 by a^2/(1-z)^2 and 1/r by
    a/(1-z).  ``tensor="mapped"`` treats the pseudospin equation as the spin
    one with kappa -> kappa - 1 (the form the energy equation quantizes);
    ``tensor="direct"`` substitutes the tensor term into the lower-component
    equation as written, which flips the sign of the A-linear pieces.
    """
    if tensor not in ("mapped", "direct"):
        raise ValidationError(f"tensor must be 'mapped' or 'direct' (got {tensor!r})")
    A, b = spec.A, spec.potential.b
    xi, zeta = _potential_factors(E, spec)
    if spec.symmetry is Symmetry.PSEUDOSPIN and tensor == "direct":
        k = spec.kappa
        centrifugal = k * (k - 1)
        t_inv_r2 = (2 * k - 1) * A     # coefficient of e^{-ar}/r^2
        t_inv_r = -A                   # coefficient of a e^{-ar}/r
    else:
        k = effective_kappa(spec)
        centrifugal = k * (k + 1)
        t_inv_r2 = (2 * k + 1) * A
        t_inv_r = A
    # each term already multiplied through by (1 - z)^2
    return (centrifugal * ONE
            + t_inv_r2 * Z
            + A * A * Z**2
            + t_inv_r * Z * (1 - Z)
            + zeta * (1 - Z) ** 2
            + xi * (b * Z**2 - 2 * Z * (1 - Z)))


def ode_coefficients(E: float, spec: ProblemSpec, *, tensor: str = "mapped") -> tuple[float, float, float]:
    """(alpha, beta, gamma) with N(z) = alpha z^2 + beta z + gamma."""
    c = np.zeros(3)
    coef = substituted_numerator(E, spec, tensor=tensor).coef
    c[: len(coef)] = coef
    return float(c[2]), float(c[1]), float(c[0])


# --- Nikiforov-Uvarov -------------------------------------------------------

def _poly(coefs, max_degree: int, name: str) -> Polynomial:
    p = Polynomial(np.asarray(coefs, dtype=float)).trim()
    if p.degree() > max_degree:
        raise ValidationError(f"{name} must have degree <= {max_degree}")
    return p


@dataclass(frozen=True)
class NUProblem:
    """psi'' + (tau_tilde/sigma) psi' + (sigma_tilde/sigma^2) psi = 0.

    Coefficients are in ascending powers of z.
    """
    sigma: tuple[float, ...]
    tau_tilde: tuple[float, ...]
    sigma_tilde: tuple[float, ...]

    def __post_init__(self):
        _poly(self.sigma, 2, "sigma")
        _poly(self.tau_tilde, 1, "tau_tilde")
        _poly(self.sigma_tilde, 2, "sigma_tilde")

    def polys(self) -> tuple[Polynomial, Polynomial, Polynomial]:
        return (Polynomial(self.sigma), Polynomial(self.tau_tilde), Polynomial(self.sigma_tilde))


@dataclass(frozen=True)
class NUSolution:
    pi: Polynomial
    k: float
    tau: Polynomial
    lambda_: float
    lambda_n: float
    n: int
    k_candidates: tuple[float, ...] = field(default=())

    @property
    def quantization_residual(self) -> float:
        return self.lambda_ - self.lambda_n


def _linear_sqrt(quad: Polynomial) -> Polynomial:
    """Square root of a quadratic known to be a perfect square (up to sign)."""
    c = np.zeros(3)
    c[: len(quad.coef)] = quad.coef
    c0, c1, c2 = c
    if c2 > 0:
        r = math.sqrt(c2)
        return Polynomial([c1 / (2 * r), r])
    if c0 > 0:
        r = math.sqrt(c0)
        return Polynomial([r, c1 / (2 * r)])
    if c2 < 0 or c0 < 0:
        raise NoValidBranch("radicand is negative; no real linear square root")
    return Polynomial([0.0])


def _sigma_roots(sigma: Polynomial) -> list[float]:
    if sigma.degree() < 1:
        return []
    return [float(r.real) for r in sigma.roots() if abs(r.imag) < 1e-12]


def _decays(pi: Polynomial, sigma: Polynomial) -> bool:
    """Positive local exponent pi(z0)/sigma'(z0) at every real root of sigma."""
    ds = sigma.deriv()
    for z0 in _sigma_roots(sigma):
        slope = ds(z0)
        if slope == 0 or not pi(z0) / slope > 0:
            return False
    return True


def nu_construct(p: NUProblem, n: int = 0) -> NUSolution:
    """Pick k so the radicand of pi is a perfect square, then pi, tau, lambda, lambda_n.

    pi = (sigma' - tau_tilde)/2 +- sqrt(((sigma' - tau_tilde)/2)^2 - sigma_tilde + k sigma)

    Among the candidates with tau' < 0, those whose pi gives a positive
    exponent at each root of sigma are preferred; the most negative tau'
    breaks any remaining tie.
    """
    if n < 0 or int(n) != n:
        raise ValidationError(f"n must be a nonnegative integer (got {n})")
    sigma, tau_t, sigma_t = p.polys()
    q = (sigma.deriv() - tau_t) / 2
    base = q**2 - sigma_t

    def coef3(poly):
        out = np.zeros(3)
        out[: len(poly.coef)] = poly.coef
        return out

    b0, b1, b2 = coef3(base)
    s0, s1, s2 = coef3(sigma)
    # discriminant of (b + k s) as a quadratic in z, itself quadratic in k
    disc_k = Polynomial([b1 * b1 - 4 * b0 * b2,
                         2 * b1 * s1 - 4 * (b0 * s2 + s0 * b2),
                         s1 * s1 - 4 * s0 * s2]).trim()
    if disc_k.degree() == 0:
        if abs(disc_k.coef[0]) > 1e-12 * max(1.0, abs(b1) ** 2):
            raise NoValidBranch("no k makes the radicand a perfect square")
        ks = [0.0]
    else:
        roots = disc_k.roots()
        ks = sorted(float(r.real) for r in roots if abs(r.imag) <= 1e-9 * max(1.0, abs(r.real)))
    if not ks:
        raise NoValidBranch("k candidates are complex")

    candidates = []
    for k in ks:
        try:
            root = _linear_sqrt(base + k * sigma)
        except NoValidBranch:
            continue
        for sign in (1.0, -1.0):
            pi = q + sign * root
            tau = tau_t + 2 * pi
            slope = float(tau.deriv().coef[0]) if tau.degree() >= 1 else 0.0
            if slope < 0:
                candidates.append((k, pi, tau, slope))
    if not candidates:
        raise NoValidBranch("no k branch gives tau' < 0")
    preferred = [c for c in candidates if _decays(c[1], sigma)] or candidates
    k, pi, tau, slope = min(preferred, key=lambda c: c[3])
    sigma2 = float(sigma.deriv(2).coef[0]) if sigma.degree() >= 2 else 0.0
    pi1 = float(pi.deriv().coef[0]) if pi.degree() >= 1 else 0.0
    lam = k + pi1
    lam_n = -n * slope - n * (n - 1) / 2 * sigma2
    return NUSolution(pi, k, tau, lam, lam_n, int(n), tuple(ks))


def pi_square_residual(sol: NUSolution, p: NUProblem, z) -> np.ndarray:
    """(pi - q)^2 - (q^2 - sigma_tilde + k sigma) at z, with q = (sigma' - tau_tilde)/2."""
    sigma, tau_t, sigma_t = p.polys()
    q = (sigma.deriv() - tau_t) / 2
    z = np.asarray(z, dtype=float)
    return (sol.pi(z) - q(z)) ** 2 - (q(z) ** 2 - sigma_t(z) + sol.k * sigma(z))


def nu_problem(E: float, spec: ProblemSpec) -> NUProblem:
    num = substituted_numerator(E, spec)
    return NUProblem(sigma=(0.0, 1.0, -1.0), tau_tilde=(1.0, -1.0),
                     sigma_tilde=tuple(float(c) for c in -num.coef))


def nu_quantization_residual(E: float, spec: ProblemSpec) -> float:
    """lambda - lambda_n at energy E; zero at an eigenvalue."""
    return nu_construct(nu_problem(_energy(E), spec), spec.n).quantization_residual


# --- Rodrigues form ---------------------------------------------------------

@lru_cache(maxsize=None)
def _rodrigues_symbolic(n: int):
    import sympy as sp
    z, a, b = sp.symbols("z a b", positive=True)
    expr = sp.diff(z ** (n + a) * (1 - z) ** (n + b), z, n) / (z**a * (1 - z) ** b)
    poly = sp.Poly(sp.simplify(expr) / sp.factorial(n), z)
    coeffs = poly.all_coeffs()[::-1]
    return [sp.lambdify((a, b), c, "math") for c in coeffs]


def rodrigues_jacobi(n: int, alpha: float, beta: float) -> np.ndarray:
    """Ascending z-coefficients of P_n^(alpha,beta)(1 - 2z) from

        (1/n!) z^-alpha (1-z)^-beta d^n/dz^n [z^(n+alpha) (1-z)^(n+beta)]

    differentiated symbolically.  Intended for small n.
    """
    if n < 0 or int(n) != n:
        raise ValidationError(f"n must be a nonnegative integer (got {n})")
    fns = _rodrigues_symbolic(int(n))
    out = np.zeros(n + 1)
    for i, f in enumerate(fns):
        out[i] = float(f(alpha, beta))
    return out


# --- residual of the analytic component in its own equation -----------------

def z_ode_residual(component, E: float, spec: ProblemSpec, z, h: float = 1e-5) -> np.ndarray:
    """|F'' + F'/z - N F/(z^2(1-z)^2)| over the sum of the three magnitudes.

    Derivatives use five-point central differences with step ``h``.
    """
    z = np.asarray(z, dtype=float)
    if np.any((z - 2 * h <= 0) | (z + 2 * h >= 1)):
        raise DomainError("need 2h < z < 1 - 2h")
    fm2, fm1, f0, fp1, fp2 = (np.asarray(component(z + j * h), dtype=float) for j in (-2, -1, 0, 1, 2))
    d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)
    d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h)
    num = substituted_numerator(E, spec)
    q = num(z) / (z**2 * (1 - z) ** 2) * f0
    scale = np.abs(d2) + np.abs(d1 / z) + np.abs(q)
    return np.abs(d2 + d1 / z - q) / scale


# --- z-space shooting ---------------------------------------------------------

@dataclass(frozen=True)
class ShootingResult:
    E: float
    mismatch: float
    integration_steps: int
    nodes: int | None = None
    bracket: tuple[float, float] = (math.nan, math.nan)


_Z_EDGE = 1e-8
_RTOL, _ATOL = 1e-12, 1e-14


class _Counter:
    def __init__(self, f):
        self.f, self.calls = f, 0

    def __call__(self, x, y):
        self.calls += 1
        return self.f(x, y)


def _integrate(rhs, x0, y0, xs, method="lsoda"):
    """Integrate from x0 through the monotone points xs; returns states and call count.

    LSODA suits the z-space legs, whose unwanted local solution decays fast
    enough to make an explicit method step-size limited.  It may step past
    the last output point, so legs whose coefficients are undefined beyond
    it use DOP853 instead.
    """
    fn = _Counter(rhs)
    solver = ode(fn).set_integrator(method, rtol=_RTOL, atol=_ATOL, nsteps=200000)
    solver.set_initial_value(y0, x0)
    out = []
    for x in xs:
        y = solver.integrate(x)
        if not solver.successful():
            raise StiffnessFailure(f"integrator stopped at x = {solver.t:.6g} (code {solver.get_return_code()})")
        out.append(np.array(y, dtype=float))
    return out, fn.calls


def _z_legs(E: float, spec: ProblemSpec, samples: int = 0):
    al, be, ga = ode_coefficients(E, spec)
    end_right = al + be + ga
    if ga <= 0 or end_right + 0.25 < 0:
        raise DomainError(f"E = {E!r} has no decaying local solution at a boundary")
    d = math.sqrt(ga)
    s = 0.5 + math.sqrt(end_right + 0.25)
    half = math.log(0.5)
    t0 = math.log(_Z_EDGE)

    def left(t, y):
        z = math.exp(t)
        w = 1.0 - z
        return [y[1], -2.0 * d * y[1] + (((al * z + be) * z + ga) / (w * w) - d * d) * y[0]]

    def right(u, y):
        w = math.exp(u)
        z = 1.0 - w
        qz = (al * z + be) * z + ga
        return [y[1], -2.0 * s * y[1] - s * s * y[0] + (s * y[0] + y[1]) / z + qz / (z * z) * y[0]]

    grid = list(np.linspace(t0, half, samples + 1)[1:]) if samples else [half]
    L, nl = _integrate(left, t0, [1.0, 0.0], grid)
    R, nr = _integrate(right, t0, [1.0, 0.0], grid)
    return d, s, L, R, nl + nr


def _z_mismatch(E: float, spec: ProblemSpec) -> tuple[float, int]:
    d, s, L, R, calls = _z_legs(E, spec)
    gL, gLt = L[-1]
    gR, gRu = R[-1]
    FL, dL = gL, (d * gL + gLt) / 0.5
    FR, dR = gR, -(s * gR + gRu) / 0.5
    return (dL * FR - FL * dR) / (math.hypot(FL, dL) * math.hypot(FR, dR)), calls


def shot_node_count(E: float, spec: ProblemSpec, samples: int = 400) -> int:
    """Interior sign changes of the shot solution, both legs joined at z = 1/2."""
    _, _, L, R, _ = _z_legs(E, spec, samples)
    gl = np.array([y[0] for y in L])
    gr = np.array([y[0] for y in R])
    gr *= np.sign(gl[-1]) * np.sign(gr[-1])   # same sign at the join
    vals = np.concatenate([gl, gr[::-1][1:]])
    sign = np.sign(vals[np.abs(vals) > 1e-12 * np.max(np.abs(vals))])
    return int(np.count_nonzero(sign[1:] != sign[:-1]))


def _in_domain(E: float, spec: ProblemSpec) -> bool:
    al, be, ga = ode_coefficients(E, spec)
    return ga > 0 and al + be + ga + 0.25 >= 0


def bracket_around(E: float, spec: ProblemSpec, half_width: float = 1e-3) -> tuple[float, float]:
    """[E - h, E + h] with each side halved until it lies where both legs exist."""
    sides = []
    for sgn in (-1.0, 1.0):
        h = half_width
        while not _in_domain(E + sgn * h, spec):
            h /= 2
            if h < 1e-14:
                raise DomainError(f"no admissible neighbourhood around E = {E!r}")
        sides.append(E + sgn * h)
    return sides[0], sides[1]


def shoot_eigenvalue(spec: ProblemSpec, bracket: tuple[float, float], *, xtol: float = 1e-13,
                     count_nodes: bool = True) -> ShootingResult:
    """Eigenvalue of the z-space equation inside ``bracket`` by two-sided shooting.

    The mismatch is the normalized Wronskian of the two legs at z = 1/2.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ValidationError("bracket must satisfy lo < hi")
    steps = 0

    def f(E):
        nonlocal steps
        m, c = _z_mismatch(E, spec)
        steps += c
        return m

    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return ShootingResult(lo, 0.0, steps, shot_node_count(lo, spec) if count_nodes else None, (lo, hi))
    if fhi == 0:
        return ShootingResult(hi, 0.0, steps, shot_node_count(hi, spec) if count_nodes else None, (lo, hi))
    if np.sign(flo) == np.sign(fhi):
        raise NoSignChange(f"mismatch keeps one sign on [{lo!r}, {hi!r}]")
    E = brentq(f, lo, hi, xtol=xtol, rtol=1e-15, maxiter=200)
    m = f(E)
    nodes = shot_node_count(E, spec) if count_nodes else None
    return ShootingResult(E, m, steps, nodes, (lo, hi))


# --- replacement curves -----------------------------------------------------

@dataclass(frozen=True)
class ApproxCurvePoint:
    r: float
    f1: float
    f2: float


def approx_curves(a: float, r_grid) -> list[ApproxCurvePoint]:
    """f1 = 1/r^2 and its replacement f2 = a^2/(1 - e^{-ar})^2 on ``r_grid``."""
    if not a > 0:
        raise DomainError("a must be positive")
    r = np.asarray(r_grid, dtype=float)
    if np.any(~(r > 0)):
        raise DomainError("r must be positive")
    f2 = (a / -np.expm1(-a * r)) ** 2
    return [ApproxCurvePoint(float(x), float(1.0 / x**2), float(y)) for x, y in zip(r, f2)]


# --- r-space shooting: replaced vs exact terms ----------------------------------

def _r_equation(spec: ProblemSpec, exact: bool):
    """Return (W(r, E), s_origin, k_inf(E)) for F'' = W F."""
    p, A, M, C = spec.potential, spec.A, spec.M, spec.C
    a, b = p.a, p.b
    kk = effective_kappa(spec)
    spin = spec.symmetry is Symmetry.SPIN
    s = 0.5 + abs(kk + A + 0.5)

    def W(r, E):
        e = math.exp(-a * r)
        if exact:
            c, l = 1.0 / (r * r), 1.0 / r
        else:
            c = (a / -math.expm1(-a * r)) ** 2
            l = a / -math.expm1(-a * r)
        u = math.expm1(a * r)
        well = p.D * b * (b / (u * u) - 2.0 / u)
        if spin:
            pot = (M + E - C) * (M - E + well)
        else:
            pot = (M - E + C) * (M + E - well)
        return (kk * (kk + 1) + (2 * kk + 1) * A * e + A * A * e * e) * c + A * a * e * l + pot

    def k_inf(E):
        const = (M + E - C) * (M - E) if spin else (M - E + C) * (M + E)
        far = const if exact else const + a * a * kk * (kk + 1)
        if far <= 0:
            raise DomainError(f"E = {E!r} is not below the continuum")
        return math.sqrt(far)

    return W, s, k_inf


def _r_mismatch(E, W, s, k_inf, r0, r_match, r_far):
    k = k_inf(E)

    def left(t, y):
        r = math.exp(t)
        return [y[1], -(2 * s - 1) * y[1] - s * (s - 1) * y[0] + r * r * W(r, E) * y[0]]

    def right(r, y):
        return [y[1], 2 * k * y[1] + (W(r, E) - k * k) * y[0]]

    (L,), nl = _integrate(left, math.log(r0), [1.0, 0.0], [math.log(r_match)], "dop853")
    (R,), nr = _integrate(right, r_far, [1.0, 0.0], [r_match], "dop853")
    FL, dL = L[0], (s * L[0] + L[1]) / r_match
    FR, dR = R[0], R[1] - k * R[0]
    return (dL * FR - FL * dR) / (math.hypot(FL, dL) * math.hypot(FR, dR)), nl + nr


def shoot_r_space(spec: ProblemSpec, E_guess: float, *, exact: bool, r0: float = 1e-6,
                  r_far: float | None = None, step: float = 1e-4, max_expand: int = 40) -> ShootingResult:
    """Nearest eigenvalue to ``E_guess`` of the r-space equation.

    ``exact=False`` uses a^2/(1-e^{-ar})^2 and a/(1-e^{-ar}) in place of
    1/r^2 and 1/r.  The bracket grows geometrically from ``step`` until the
    mismatch changes sign.
    """
    W, s, k_inf = _r_equation(spec, exact)
    a = spec.potential.a
    r_far = 200.0 / a if r_far is None else r_far
    r_match = spec.potential.r_min
    steps = 0

    def f(E):
        nonlocal steps
        m, c = _r_mismatch(E, W, s, k_inf, r0, r_match, r_far)
        steps += c
        return m

    f0 = f(E_guess)
    h = step
    for _ in range(max_expand):
        lo, hi = E_guess - h, E_guess + h
        flo = fhi = None
        try:
            flo = f(lo)
        except DomainError:
            pass
        try:
            fhi = f(hi)
        except DomainError:
            pass
        # take the side nearer in sign change; prefer the smaller sub-bracket
        if flo is not None and np.sign(flo) != np.sign(f0):
            E = brentq(f, lo, E_guess, xtol=1e-13, rtol=1e-15, maxiter=200)
            return ShootingResult(E, f(E), steps, None, (lo, E_guess))
        if fhi is not None and np.sign(fhi) != np.sign(f0):
            E = brentq(f, E_guess, hi, xtol=1e-13, rtol=1e-15, maxiter=200)
            return ShootingResult(E, f(E), steps, None, (E_guess, hi))
        h *= 2
    raise NoSignChange(f"no r-space eigenvalue found near {E_guess!r}")


@dataclass(frozen=True)
class ApproxErrorEntry:
    a: float
    r_e: float
    E_analytic: float
    E_pekeris: float
    E_exact: float

    @property
    def delta(self) -> float:
        return self.E_exact - self.E_pekeris


@dataclass(frozen=True)
class ApproxErrorReport:
    symmetry: Symmetry
    n: int
    kappa: int
    A: float
    entries: tuple[ApproxErrorEntry, ...]


def approximation_error_report(spec: ProblemSpec, a_values=(0.1, 0.5)) -> ApproxErrorReport:
    """E_exact - E_pekeris for the state of ``spec`` at each range parameter.

    The well is rescaled with a so that a*r_e (hence b) stays fixed; the
    energies are found by r-space shooting, started from the analytic root.
    """
    entries = []
    ar = spec.potential.a * spec.potential.r_e
    for a in a_values:
        if not a > 0:
            raise DomainError("a must be positive")
        pot = type(spec.potential)(spec.potential.D, ar / a, float(a), spec.potential.convention)
        s = spec.with_state(potential=pot)
        E0 = physical_root(s).E
        pek = shoot_r_space(s, E0, exact=False)
        ex = shoot_r_space(s, pek.E, exact=True)
        entries.append(ApproxErrorEntry(float(a), pot.r_e, E0, pek.E, ex.E))
    return ApproxErrorReport(spec.symmetry, spec.n, spec.kappa, spec.A, tuple(entries))
