"""Physical parameters, potentials and quantum-number bookkeeping.

Units are natural (hbar = c = 1): energies and inverse lengths in fm^-1,
lengths in fm.  Nothing here converts units; raw numbers are stored as given.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, InvalidKappa, NonPositiveParameter, ValidationError

#: ``b = exp(a r_e) - 1``, the shape constant of the shifted Deng-Fan well.
STANDARD = "standard"
#: ``b = exp(2 a r_e) + 1``.  The reference spectrum tables were generated with
#: this value of the shape constant (recovered by fitting all 256 tabulated
#: energies); it is kept only so those tables can be regenerated.
TABULATED = "tabulated"
B_CONVENTIONS = (STANDARD, TABULATED)

_ORBITAL_LETTERS = "spdfghiklmnoqrtuv"


class Symmetry(str, enum.Enum):
    SPIN = "spin"
    PSEUDOSPIN = "pseudospin"


@dataclass(frozen=True)
class PotentialParams:
    """Shifted Deng-Fan parameters.  ``b`` is derived, never stored."""

    D: float
    r_e: float
    a: float
    convention: str = STANDARD

    @property
    def b(self) -> float:
        if self.convention == TABULATED:
            return math.exp(2.0 * self.a * self.r_e) + 1.0
        return math.expm1(self.a * self.r_e)

    @property
    def r_min(self) -> float:
        """Location of the well minimum, ``ln(1 + b) / a``."""
        return math.log1p(self.b) / self.a


@dataclass(frozen=True)
class SymmetryLimit:
    kind: Symmetry
    C: float = 0.0


@dataclass(frozen=True)
class QuantumNumbers:
    n: int
    kappa: int


@dataclass(frozen=True)
class StateLabel:
    n_display: int
    letter: str
    j_numerator: int

    @property
    def j(self) -> float:
        return self.j_numerator / 2

    def __str__(self) -> str:
        return f"{self.n_display}{self.letter}_{{{self.j_numerator}/2}}"


@dataclass(frozen=True)
class ProblemSpec:
    """One bound-state problem: mass, potential, symmetry limit, tensor, state."""

    M: float
    potential: PotentialParams
    limit: SymmetryLimit
    A: float
    n: int
    kappa: int

    @property
    def symmetry(self) -> Symmetry:
        return self.limit.kind

    @property
    def C(self) -> float:
        return self.limit.C

    def with_state(self, n: int | None = None, kappa: int | None = None, **kw) -> "ProblemSpec":
        if n is not None:
            kw["n"] = n
        if kappa is not None:
            kw["kappa"] = kappa
        return replace(self, **kw)


def make_potential_params(D: float, r_e: float, a: float, convention: str = STANDARD) -> PotentialParams:
    bad = [f"{name} must be positive (got {val!r})"
           for name, val in (("D", D), ("r_e", r_e), ("a", a))
           if not (val > 0 and math.isfinite(val))]
    if bad:
        raise NonPositiveParameter(bad)
    if convention not in B_CONVENTIONS:
        raise ValidationError(f"unknown b convention {convention!r}")
    return PotentialParams(float(D), float(r_e), float(a), convention)


def _check_r(r):
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise DomainError("potentials are defined for r > 0 only")
    return r


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def sum_potential(r, p: PotentialParams):
    """Shifted Deng-Fan well ``D b [b/(e^{ar}-1)^2 - 2/(e^{ar}-1)]``.

    Equals ``-D`` at ``p.r_min`` and vanishes from below as r grows.
    """
    r = _check_r(r)
    u = np.expm1(p.a * r)
    b = p.b
    return _scalar_or_array(p.D * b * (b / u**2 - 2.0 / u))


def tensor_potential(r, A: float, a: float):
    """Yukawa-like tensor term ``-(A/r) exp(-a r)``; the cutoff radius is taken as 0."""
    r = _check_r(r)
    return _scalar_or_array(-A / r * np.exp(-a * r))


def orbital_l(kappa: int) -> int:
    """Orbital angular momentum of the upper component."""
    if kappa == 0:
        raise InvalidKappa("kappa must be nonzero")
    return -kappa - 1 if kappa < 0 else kappa


def pseudo_orbital_l(kappa: int) -> int:
    """Pseudo-orbital angular momentum (lower component)."""
    if kappa == 0:
        raise InvalidKappa("kappa must be nonzero")
    return -kappa if kappa < 0 else kappa - 1


def quantum_labels(kappa: int, n: int) -> StateLabel:
    """Spectroscopic label such as ``0p_{3/2}`` for (kappa=-2, n=0)."""
    if kappa == 0:
        raise InvalidKappa("kappa must be nonzero")
    if n < 0:
        raise ValidationError(f"n must be nonnegative (got {n})")
    ell = orbital_l(kappa)
    # j = |kappa| - 1/2 in both branches
    j_num = 2 * abs(kappa) - 1
    letter = _ORBITAL_LETTERS[ell] if ell < len(_ORBITAL_LETTERS) else f"[l={ell}]"
    return StateLabel(n, letter, j_num)


def validate_problem(spec: ProblemSpec) -> ProblemSpec:
    """Check every constraint at once and raise a single aggregated error.

    If all violations are of one kind the matching subclass is raised
    (``InvalidKappa``, ``NonPositiveParameter``); otherwise ``ValidationError``.
    """
    found: list[tuple[type, str]] = []
    if spec.kappa == 0 or int(spec.kappa) != spec.kappa:
        found.append((InvalidKappa, "kappa must be nonzero"))
    if int(spec.n) != spec.n or spec.n < 0:
        found.append((ValidationError, f"n must be a nonnegative integer (got {spec.n})"))
    p = spec.potential
    for name, val in (("D", p.D), ("r_e", p.r_e), ("a", p.a)):
        if not (val > 0 and math.isfinite(val)):
            found.append((NonPositiveParameter, f"{name} must be positive (got {val!r})"))
    if p.convention not in B_CONVENTIONS:
        found.append((ValidationError, f"unknown b convention {p.convention!r}"))
    for name, val in (("M", spec.M), ("C", spec.C), ("A", spec.A)):
        if not math.isfinite(val):
            found.append((ValidationError, f"{name} must be finite (got {val!r})"))
    if spec.A < 0:
        found.append((ValidationError, f"tensor strength A must be >= 0 (got {spec.A})"))
    if not isinstance(spec.limit.kind, Symmetry):
        found.append((ValidationError, f"unknown symmetry {spec.limit.kind!r}"))
    if not found:
        return spec
    kinds = {cls for cls, _ in found}
    cls = kinds.pop() if len(kinds) == 1 else ValidationError
    raise cls([msg for _, msg in found])


def make_problem(symmetry, *, M=1.0, D=15.0, a=0.1, r_e=0.8, C=0.0, A=0.0, n=0, kappa=-1,
                 convention: str = STANDARD) -> ProblemSpec:
    """Convenience constructor; validates the result."""
    spec = ProblemSpec(
        M=float(M),
        potential=PotentialParams(float(D), float(r_e), float(a), convention),
        limit=SymmetryLimit(Symmetry(symmetry), float(C)),
        A=float(A),
        n=n,
        kappa=kappa,
    )
    return validate_problem(spec)
