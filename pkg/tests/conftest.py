import pytest

from cutoffwave import (fisher, fit_edge_constants, make_cutoff,
                        solve_reference, solve_speed)


@pytest.fixture(scope="session")
def fisher_spec():
    return fisher()


@pytest.fixture(scope="session")
def fisher_half(fisher_spec):
    """Converged Fisher wave at u_c = 0.5, reused across tests."""
    return solve_speed(make_cutoff(fisher_spec, 0.5))


@pytest.fixture(scope="session")
def fisher_reference(fisher_spec):
    return solve_reference(fisher_spec)


@pytest.fixture(scope="session")
def fisher_constants(fisher_reference):
    return fit_edge_constants(fisher_reference)
