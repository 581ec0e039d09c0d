import pytest

from bcsgap.gap_solver import build_discretization, solve_surface
from bcsgap.lipschitz_bounds import compute_constants
from bcsgap.model import ModelParams, SeparablePotential, SolverConfig


@pytest.fixture(scope="session")
def params():
    return ModelParams(1.0, 0.3, 0.3003, SeparablePotential())


@pytest.fixture(scope="session")
def cfg():
    return SolverConfig()


@pytest.fixture(scope="session")
def bundle(params, cfg):
    return compute_constants(params, cfg)


@pytest.fixture(scope="session")
def curves(bundle):
    return bundle.curve1, bundle.curve2


@pytest.fixture(scope="session")
def surface(params, cfg, bundle):
    return solve_surface(params, cfg=cfg, bundle=bundle)


@pytest.fixture(scope="session")
def ctx(params, cfg):
    return build_discretization(params, cfg.n_nodes)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
