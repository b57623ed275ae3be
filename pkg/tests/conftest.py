import itertools

import pytest

from su11pt.algebra import Sector, build_rep
from su11pt.invariant import Branch, solve_eta
from su11pt.model import ModelParams

GRID_OMEGA = (0.2, 1.0, 5.0)
GRID_G = (0.3, 1.0)
BRANCHES = (Branch.MINUS, Branch.PLUS)
LEVELS = (0, 2, 4)
DIM = 48
INTERIOR = 24


def grid():
    """The default acceptance grid as ``(params, eta_solution)`` pairs."""
    out = []
    for omega, G, branch in itertools.product(GRID_OMEGA, GRID_G, BRANCHES):
        p = ModelParams(1.0, G, omega)
        out.append((p, solve_eta(p, branch)))
    return out


def grid_id(point):
    p, sol = point
    return f"w{p.omega:g}-G{p.G:g}-{sol.branch.name.lower()}"


@pytest.fixture(scope="session")
def rep48():
    return build_rep(Sector.boson_even(), DIM)


@pytest.fixture(scope="session")
def rep16():
    return build_rep(Sector.boson_even(), 16)


@pytest.fixture
def unit_params():
    return ModelParams(1.0, 1.0, 1.0)


@pytest.fixture
def minus_sol(unit_params):
    return solve_eta(unit_params, Branch.MINUS)


@pytest.fixture
def plus_sol(unit_params):
    return solve_eta(unit_params, Branch.PLUS)
