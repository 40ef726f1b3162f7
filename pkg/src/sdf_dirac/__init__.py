"""Dirac bound states in the shifted Deng-Fan potential with a Yukawa-like tensor term,
under spin and pseudospin symmetry, with independent numerical cross-checks."""
from .errors import *  # noqa: F401,F403
from .model import (
    STANDARD, TABULATED, PotentialParams, ProblemSpec, QuantumNumbers, StateLabel, Symmetry,
    SymmetryLimit, make_potential_params, make_problem, quantum_labels, sum_potential,
    tensor_potential, validate_problem,
)
from .spectrum import (
    CoefficientSet, EnergyRoot, SearchConfig, SpectrumRow, admissible_windows, doublet_partner,
    physical_root, pseudospin_coefficients, pseudospin_residual, solve_energy, spectrum_table,
    spin_coefficients, spin_residual,
)

__version__ = "0.1.0"
