"""Energy equations for both symmetry limits, root search, and table generation.

Both limits share one quantization condition once the pseudospin case is
written with the shifted spin-orbit number ``kappa - 1``:

    [n + 1/2 + sqrt((A + k + 1/2)^2 + xi*b) + sqrt(k(k+1) + zeta)]^2
        - A^2 + A - xi*(b + 2) - zeta = 0

with ``k = kappa`` (spin) or ``k = kappa - 1`` (pseudospin) and the
limit-specific ``xi``/``zeta`` below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousRoot, EmptyWindow, InvalidKappa, NoRootFound, ValidationError
from .model import ProblemSpec, PotentialParams, StateLabel, Symmetry, SymmetryLimit


@dataclass(frozen=True)
class CoefficientSet:
    xi: float
    zeta: float
    kind: Symmetry


@dataclass(frozen=True)
class EnergyRoot:
    E: float
    residual_at_root: float
    bracket: tuple[float, float]
    admissible: bool
    iterations: int


@dataclass(frozen=True)
class SearchConfig:
    E_min: float | None = None
    E_max: float | None = None
    grid_points: int = 2000
    xtol: float = 1e-12
    ftol: float = 1e-9
    max_iter: int = 200

    def __post_init__(self):
        if self.grid_points < 2:
            raise ValidationError("grid_points must be at least 2")
        if not self.xtol > 0:
            raise ValidationError("xtol must be positive")


@dataclass(frozen=True)
class SpectrumRow:
    symmetry: Symmetry
    C: float
    r_e: float
    A: float
    ell: int
    n_negative_kappa: int
    kappa_negative: int
    label_negative_kappa: StateLabel
    E_negative_kappa: float
    n_positive_kappa: int
    kappa_positive: int
    label_positive_kappa: StateLabel
    E_positive_kappa: float
    splitting: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "splitting", self.E_positive_kappa - self.E_negative_kappa)


def effective_kappa(spec: ProblemSpec) -> int:
    return spec.kappa if spec.symmetry is Symmetry.SPIN else spec.kappa - 1


def spin_coefficients(E: float, M: float, C_s: float, p: PotentialParams) -> CoefficientSet:
    eps = M + E - C_s
    return CoefficientSet(eps * p.D * p.b / p.a**2, eps * (M - E) / p.a**2, Symmetry.SPIN)


def pseudospin_coefficients(E: float, M: float, C_ps: float, p: PotentialParams) -> CoefficientSet:
    return CoefficientSet((E - M - C_ps) * p.D * p.b / p.a**2,
                          (M - E + C_ps) * (M + E) / p.a**2, Symmetry.PSEUDOSPIN)


def coefficients(E: float, spec: ProblemSpec) -> CoefficientSet:
    if spec.symmetry is Symmetry.SPIN:
        return spin_coefficients(E, spec.M, spec.C, spec.potential)
    return pseudospin_coefficients(E, spec.M, spec.C, spec.potential)


def radicands(E: float, spec: ProblemSpec) -> tuple[float, float]:
    """The two square-root arguments of the energy equation at ``E``."""
    c = coefficients(E, spec)
    k = effective_kappa(spec)
    return (spec.A + k + 0.5) ** 2 + c.xi * spec.potential.b, k * (k + 1) + c.zeta


def _residual(E: float, spec: ProblemSpec) -> float:
    if math.isnan(E):
        raise ValueError("energy is NaN")
    c = coefficients(E, spec)
    k = effective_kappa(spec)
    A, b = spec.A, spec.potential.b
    r1 = (A + k + 0.5) ** 2 + c.xi * b
    r2 = k * (k + 1) + c.zeta
    if r1 < 0 or r2 < 0:
        return math.nan
    return (spec.n + 0.5 + math.sqrt(r1) + math.sqrt(r2)) ** 2 - A * A + A - c.xi * (b + 2) - c.zeta


def spin_residual(E: float, spec: ProblemSpec) -> float:
    """Spin-limit energy equation at ``E``; NaN where a radicand is negative."""
    if spec.symmetry is not Symmetry.SPIN:
        raise ValidationError("spin_residual needs a spin-symmetry problem")
    return _residual(E, spec)


def pseudospin_residual(E: float, spec: ProblemSpec) -> float:
    """Pseudospin-limit energy equation at ``E``; NaN where a radicand is negative."""
    if spec.symmetry is not Symmetry.PSEUDOSPIN:
        raise ValidationError("pseudospin_residual needs a pseudospin-symmetry problem")
    return _residual(E, spec)


def residual(E: float, spec: ProblemSpec) -> float:
    return _residual(E, spec)


def residual_array(E, spec: ProblemSpec) -> np.ndarray:
    """Vectorised residual over an array of energies (NaN where undefined)."""
    E = np.asarray(E, dtype=float)
    k = effective_kappa(spec)
    A, b, M, C, p = spec.A, spec.potential.b, spec.M, spec.C, spec.potential
    if spec.symmetry is Symmetry.SPIN:
        xi = (M + E - C) * p.D * b / p.a**2
        zeta = (M + E - C) * (M - E) / p.a**2
    else:
        xi = (E - M - C) * p.D * b / p.a**2
        zeta = (M - E + C) * (M + E) / p.a**2
    r1 = (A + k + 0.5) ** 2 + xi * b
    r2 = k * (k + 1) + zeta
    ok = (r1 >= 0) & (r2 >= 0)
    with np.errstate(invalid="ignore"):
        out = (spec.n + 0.5 + np.sqrt(r1) + np.sqrt(r2)) ** 2 - A * A + A - xi * (b + 2) - zeta
    return np.where(ok, out, np.nan)


def default_energy_range(spec: ProblemSpec) -> tuple[float, float]:
    half = spec.M + abs(spec.C) + 2 * spec.potential.D
    return -half, half


def admissible_windows(spec: ProblemSpec, E_min: float, E_max: float) -> list[tuple[float, float]]:
    """Sub-intervals of ``[E_min, E_max]`` where both radicands are nonnegative.

    The first radicand is linear in E and the second a downward parabola, so
    the admissible set is a single interval found in closed form.
    """
    if E_min > E_max:
        raise ValidationError("E_min must not exceed E_max")
    M, C, p = spec.M, spec.C, spec.potential
    k = effective_kappa(spec)
    # lower bound from the linear radicand: (A+k+1/2)^2 + lin*D*b^2/a^2 >= 0
    lin_floor = -((spec.A + k + 0.5) ** 2) * p.a**2 / (p.D * p.b**2)
    if spec.symmetry is Symmetry.SPIN:
        E_lin = C - M + lin_floor          # lin = M + E - C
        e1, e2 = C - M, M                  # zeta = -(E - e1)(E - e2)/a^2
    else:
        E_lin = M + C + lin_floor          # lin = E - M - C
        e1, e2 = M + C, -M
    mid = 0.5 * (e1 + e2)
    half = math.sqrt((0.5 * (e2 - e1)) ** 2 + p.a**2 * k * (k + 1))
    lo = max(E_min, E_lin, mid - half)
    hi = min(E_max, mid + half)
    if lo > hi:
        raise EmptyWindow(f"no admissible energy in [{E_min}, {E_max}]")
    return [_nudge_inside(lo, hi, spec)]


def _nudge_inside(lo: float, hi: float, spec: ProblemSpec) -> tuple[float, float]:
    """Move closed-form window edges inward until the residual is defined there."""
    for i in range(60):
        if not math.isnan(_residual(lo, spec)) or lo >= hi:
            break
        lo = lo + max(abs(lo), 1.0) * 4e-16 * 2**i
    for i in range(60):
        if not math.isnan(_residual(hi, spec)) or hi <= lo:
            break
        hi = hi - max(abs(hi), 1.0) * 4e-16 * 2**i
    return lo, hi


def _bisect(f, lo: float, hi: float, flo: float, xtol: float, ftol: float, max_iter: int):
    it = 0
    best = None
    while it < max_iter:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        it += 1
        if best is None or abs(fm) < abs(best[1]):
            best = (mid, fm)
        if fm == 0.0:
            break
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= xtol and abs(fm) <= ftol:
            break
    if best is None:
        mid = 0.5 * (lo + hi)
        best = (mid, f(mid))
    # report the evaluated point closest to zero, not an unchecked midpoint
    return best[0], best[1], it


def solve_energy(spec: ProblemSpec, search: SearchConfig | None = None) -> list[EnergyRoot]:
    """All roots of the energy equation inside the admissible windows, sorted by E."""
    search = search or SearchConfig()
    lo_def, hi_def = default_energy_range(spec)
    E_min = lo_def if search.E_min is None else search.E_min
    E_max = hi_def if search.E_max is None else search.E_max
    windows = admissible_windows(spec, E_min, E_max)
    f = lambda E: _residual(E, spec)
    roots: list[EnergyRoot] = []
    for w_lo, w_hi in windows:
        if w_hi <= w_lo:
            continue
        grid = np.linspace(w_lo, w_hi, search.grid_points)
        vals = residual_array(grid, spec)
        for i in range(len(grid) - 1):
            v0, v1 = vals[i], vals[i + 1]
            if np.isnan(v0) or np.isnan(v1):
                continue
            if v0 == 0.0:
                lo_b = grid[i - 1] if i > 0 else grid[i]
                roots.append(_make_root(grid[i], 0.0, (lo_b, grid[i + 1]), 0, spec))
                continue
            if (v0 < 0) != (v1 < 0) and v1 != 0.0:
                E, fE, it = _bisect(f, grid[i], grid[i + 1], v0, search.xtol, search.ftol, search.max_iter)
                roots.append(_make_root(E, fE, (grid[i], grid[i + 1]), it, spec))
    if not roots:
        raise NoRootFound(
            f"no sign change of the energy equation for n={spec.n}, kappa={spec.kappa} "
            f"in windows {windows}", windows)
    return sorted(roots, key=lambda r: r.E)


def _make_root(E, fE, bracket, iterations, spec) -> EnergyRoot:
    r1, r2 = radicands(E, spec)
    admissible = r1 >= 0 and r2 > 0
    return EnergyRoot(float(E), float(fE), (float(bracket[0]), float(bracket[1])), bool(admissible), iterations)


def physical_root(spec: ProblemSpec, search: SearchConfig | None = None) -> EnergyRoot:
    """The unique admissible root; raises if there is none or more than one."""
    good = [r for r in solve_energy(spec, search) if r.admissible]
    if not good:
        raise NoRootFound(f"no admissible root for n={spec.n}, kappa={spec.kappa}")
    if len(good) > 1:
        raise AmbiguousRoot(
            f"{len(good)} admissible roots for n={spec.n}, kappa={spec.kappa}: "
            + ", ".join(f"{r.E:.12g}" for r in good))
    return good[0]


def doublet_partner(kappa: int, limit) -> int | None:
    """Partner of ``kappa`` in a spin (``-kappa-1``) or pseudospin (``1-kappa``) doublet.

    Returns None when the partner would be kappa = 0 (e.g. s_{1/2} in the spin limit).
    """
    if kappa == 0:
        raise InvalidKappa("kappa must be nonzero")
    kind = limit.kind if isinstance(limit, SymmetryLimit) else Symmetry(limit)
    partner = -kappa - 1 if kind is Symmetry.SPIN else 1 - kappa
    return partner or None


def spectrum_table(preset, *, nu_offset: int | None = None, search: SearchConfig | None = None,
                   workers: int | None = None) -> list[SpectrumRow]:
    """Regenerate every doublet row of a table preset (blocks x states x tensor values)."""
    from .presets import table_jobs, evaluate_row
    jobs = table_jobs(preset, nu_offset=nu_offset)
    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(evaluate_row, jobs, [search] * len(jobs)))
    return [evaluate_row(job, search) for job in jobs]


__all__ = [
    "CoefficientSet", "EnergyRoot", "SearchConfig", "SpectrumRow",
    "spin_coefficients", "pseudospin_coefficients", "coefficients", "radicands",
    "spin_residual", "pseudospin_residual", "residual", "residual_array",
    "admissible_windows", "solve_energy", "physical_root", "doublet_partner",
    "spectrum_table", "effective_kappa", "default_energy_range",
]

