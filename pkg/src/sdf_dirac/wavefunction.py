"""Jacobi polynomials, analytic spinor components, partner components and normalization."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import (EnergyDegenerateDenominator, NonConvergentTail, NonNormalizable,
                     ParameterOutOfRange, ValidationError, ZeroNorm)
from .model import ProblemSpec, Symmetry, tensor_potential
from .spectrum import EnergyRoot, radicands


@dataclass(frozen=True)
class ShapeExponents:
    delta: float
    eta: float


@dataclass(frozen=True)
class Normalization:
    constant: float     # multiply the raw function by this
    r_max: float
    raw_integral: float


def jacobi(n: int, alpha: float, beta: float, x):
    """P_n^(alpha, beta)(x) by the three-term recurrence in the degree."""
    if n < 0 or int(n) != n:
        raise ParameterOutOfRange(f"degree must be a nonnegative integer (got {n})")
    if alpha <= -1 or beta <= -1:
        raise ParameterOutOfRange(f"need alpha, beta > -1 (got {alpha}, {beta})")
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev if x.ndim else float(p_prev)
    ab = alpha + beta
    p = 0.5 * (alpha - beta + (ab + 2.0) * x)
    for k in range(2, n + 1):
        c = 2.0 * k + ab
        a1 = 2.0 * k * (k + ab) * (c - 2.0)
        a2 = (c - 1.0) * (alpha * alpha - beta * beta)
        a3 = (c - 2.0) * (c - 1.0) * c
        a4 = 2.0 * (k + alpha - 1.0) * (k + beta - 1.0) * c
        p, p_prev = ((a2 + a3 * x) * p - a4 * p_prev) / a1, p
    return p if x.ndim else float(p)


def _energy(root) -> float:
    return root.E if isinstance(root, EnergyRoot) else float(root)


def shape_exponents(root, spec: ProblemSpec) -> ShapeExponents:
    """delta governs decay at large r (z -> 0), eta the behaviour at r -> 0 (z -> 1)."""
    r1, r2 = radicands(_energy(root), spec)
    if r2 <= 0:
        raise NonNormalizable(f"delta^2 = {r2:.3g} <= 0: state does not decay")
    if r1 < 0:
        raise NonNormalizable(f"eta^2/4 = {r1:.3g} < 0: exponent is complex")
    return ShapeExponents(math.sqrt(r2), 2.0 * math.sqrt(r1))


def component_z(z, root, spec: ProblemSpec):
    """Unnormalized analytic component as a function of z = exp(-a r)."""
    s = shape_exponents(root, spec)
    z = np.asarray(z, dtype=float)
    return z**s.delta * (1.0 - z) ** (0.5 * s.eta + 0.5) * jacobi(spec.n, 2.0 * s.delta, s.eta, 1.0 - 2.0 * z)


def _component_r(r, root, spec):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValidationError("radial points must be positive")
    return component_z(np.exp(-spec.potential.a * r), root, spec)


def upper_component_spin(r, root, spec: ProblemSpec):
    """Upper radial component F(r) in the spin limit (normalization constant 1)."""
    if spec.symmetry is not Symmetry.SPIN:
        raise ValidationError("upper_component_spin needs a spin-symmetry problem")
    return _component_r(r, root, spec)


def lower_component_pseudospin(r, root, spec: ProblemSpec):
    """Lower radial component G(r) in the pseudospin limit (normalization constant 1)."""
    if spec.symmetry is not Symmetry.PSEUDOSPIN:
        raise ValidationError("lower_component_pseudospin needs a pseudospin-symmetry problem")
    return _component_r(r, root, spec)


def primary_component(r, root, spec: ProblemSpec):
    if spec.symmetry is Symmetry.SPIN:
        return upper_component_spin(r, root, spec)
    return lower_component_pseudospin(r, root, spec)


def primary_derivative(r, root, spec: ProblemSpec):
    """Exact d/dr of ``primary_component`` (normalization constant 1)."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValidationError("radial points must be positive")
    a, n = spec.potential.a, spec.n
    sh = shape_exponents(root, spec)
    al, be, p = 2.0 * sh.delta, sh.eta, 0.5 * sh.eta + 0.5
    z = np.exp(-a * r)
    x = 1.0 - 2.0 * z
    env = z**sh.delta * (1.0 - z) ** p
    P = jacobi(n, al, be, x)
    # d/dx P_n^(al,be) = (n+al+be+1)/2 P_{n-1}^(al+1,be+1)
    dP = 0.5 * (n + al + be + 1) * jacobi(n - 1, al + 1, be + 1, x) if n else 0.0
    dF_dz = env * (P * (sh.delta / z - p / (1.0 - z)) - 2.0 * dP)
    return -a * z * dF_dz


def partner_component(r, primary_values, root, spec: ProblemSpec, *, derivative=None):
    """The other spinor component from the first-order coupled equations.

    Spin:       G = (F' + kappa F / r - U F) / (M + E - C_s)
    Pseudospin: F = (G' - kappa G / r + U G) / (M - E + C_ps)

    ``derivative`` supplies the primary derivative on ``r``; without it a
    second-order finite difference on the (possibly nonuniform) grid is used.
    """
    r = np.asarray(r, dtype=float)
    vals = np.asarray(primary_values, dtype=float)
    if r.shape != vals.shape or r.size < 3:
        raise ValidationError("need matching r and value arrays with at least 3 points")
    E = _energy(root)
    M, C, kappa = spec.M, spec.C, spec.kappa
    U = tensor_potential(r, spec.A, spec.potential.a)
    if derivative is None:
        deriv = np.gradient(vals, r, edge_order=2)
    else:
        deriv = np.asarray(derivative, dtype=float)
        if deriv.shape != r.shape:
            raise ValidationError("derivative must match r")
    if spec.symmetry is Symmetry.SPIN:
        denom = M + E - C
        num = deriv + kappa / r * vals - U * vals
    else:
        denom = M - E + C
        num = deriv - kappa / r * vals + U * vals
    if abs(denom) < 1e-12:
        raise EnergyDegenerateDenominator(f"coupling denominator {denom:.3g} vanishes")
    return num / denom


def default_grid(a: float, points: int = 2000, r_min: float | None = None, r_max: float | None = None):
    """Logarithmic grid on [1e-4/a, 200/a] unless overridden."""
    if points < 3:
        raise ValidationError("need at least 3 grid points")
    r_min = 1e-4 / a if r_min is None else r_min
    r_max = 200.0 / a if r_max is None else r_max
    if not 0 < r_min < r_max:
        raise ValidationError("need 0 < r_min < r_max")
    return np.geomspace(r_min, r_max, points)


def count_nodes(values, rel_floor: float = 1e-12) -> int:
    """Sign changes in a sampled function, ignoring samples below rel_floor * max|f|."""
    v = np.asarray(values, dtype=float)
    keep = np.abs(v) > rel_floor * np.max(np.abs(v))
    s = np.sign(v[keep])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _gauss_legendre_composite(f, edges, order=20):
    x, w = leggauss(order)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    pts = (0.5 * (hi + lo))[:, None] + half[:, None] * x[None, :]
    return float(np.sum(half[:, None] * w[None, :] * f(pts)))


def normalize(func, a: float, *, tail: float = 1e-14, panels: int = 120, order: int = 20) -> Normalization:
    """Scale factor making the integral of |func(r)|^2 over (0, inf) equal to 1.

    ``r_max`` is the first radius beyond the peak where the integrand drops
    below ``tail`` times its peak, searched up to 200/a.
    """
    limit = 200.0 / a
    probe = np.geomspace(1e-6 / a, limit, 8000)
    dens = np.abs(np.asarray(func(probe), dtype=float)) ** 2
    peak = float(np.max(dens))
    if not peak > 0 or not math.isfinite(peak):
        raise ZeroNorm("function vanishes (or is not finite) on the probe grid")
    above = np.nonzero(dens > tail * peak)[0]
    last = int(above[-1])
    if last == len(probe) - 1:
        raise NonConvergentTail(f"integrand still above {tail:g} of its peak at r = 200/a")
    r_max = float(probe[last + 1])
    edges = np.concatenate([[0.0], np.geomspace(r_max * 1e-6, r_max, panels)])
    integral = _gauss_legendre_composite(lambda r: np.abs(func(np.maximum(r, 1e-300))) ** 2, edges, order)
    if not integral > 0:
        raise ZeroNorm("zero norm")
    return Normalization(1.0 / math.sqrt(integral), r_max, integral)


def normalized_primary(root, spec: ProblemSpec) -> tuple[callable, Normalization]:
    """The analytic component scaled to unit norm, with its normalization record."""
    raw = lambda r: primary_component(r, root, spec)
    norm = normalize(raw, spec.potential.a)
    return (lambda r: norm.constant * raw(r)), norm
