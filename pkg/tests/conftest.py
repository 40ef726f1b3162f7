import pytest

from sdf_dirac.model import TABULATED, make_problem

# Lines recorded by the acceptance module; printed once at the end of the run.
ACCEPTANCE_LINES: list[str] = []


def table_state(symmetry, *, C=0.0, r_e=0.8, A=0.0, n=0, kappa=-2, a=0.1):
    """A state from the tabulated parameter family (M=1, D=15)."""
    return make_problem(symmetry, M=1, D=15, a=a, r_e=r_e, C=C, A=A, n=n, kappa=kappa,
                        convention=TABULATED)


@pytest.fixture
def ground_spin():
    return table_state("spin", kappa=-2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
