import math
import warnings

import numpy as np
import pytest

from su11pt.algebra import Sector, build_rep
from su11pt.errors import ConvergenceWarning, DomainError, NoPeriodError
from su11pt.invariant import Branch, solve_eta
from su11pt.model import ModelParams
from su11pt.phases import (average_energy, average_energy_closed, berry_phase_adiabatic,
                           berry_phase_closed, berry_phase_from_eta, berry_phase_numeric, gamma0_value,
                           gamma_value, k_level, lr_phase, lr_phase_numeric, phase_report,
                           quasi_energy, quasi_energy_simplified, transformed_hamiltonian,
                           transformed_hamiltonian_residual)

SQRT2 = math.sqrt(2.0)


def test_k_level():
    assert [k_level(n) for n in (0, 1, 2, 4)] == [0.25, 0.75, 1.25, 2.25]


def test_gamma_examples(minus_sol, plus_sol, unit_params):
    assert gamma_value(unit_params, minus_sol) == pytest.approx(1 - SQRT2, abs=1e-14)
    assert gamma_value(unit_params, plus_sol) == pytest.approx(1 + SQRT2, abs=1e-14)
    sol0 = solve_eta(ModelParams(1.0, 0.0, 1.0))
    assert gamma_value(sol0.params, sol0) == 0.0


@pytest.mark.parametrize("branch", list(Branch))
def test_gamma_identity(branch):
    for p in (ModelParams(1.0, 0.3, 0.2), ModelParams(1.0, 1.0, 5.0), ModelParams(2.0, 0.7, 0.4)):
        sol = solve_eta(p, branch)
        D = math.hypot(p.omega + p.Omega, 2 * p.G)
        expect = 0.5 * (p.omega + p.Omega) + 0.5 * branch.sign * D
        assert gamma_value(p, sol) == pytest.approx(expect, abs=1e-12)


def test_quasi_energy_examples(unit_params):
    assert quasi_energy(unit_params, Branch.MINUS) == pytest.approx(-1 + 2 * SQRT2, abs=1e-12)
    assert quasi_energy(unit_params, Branch.PLUS) == pytest.approx(-1 - 2 * SQRT2, abs=1e-12)
    assert quasi_energy(ModelParams(1.3, 0.0, 0.7)) == pytest.approx(1.3, abs=1e-15)
    for branch in Branch:
        assert abs(quasi_energy(unit_params, branch) - quasi_energy_simplified(unit_params, branch)) <= 1e-12


def test_lr_phase_examples(minus_sol, unit_params):
    assert lr_phase(unit_params, minus_sol, 0, 0.0) == 0.0
    assert lr_phase(unit_params, minus_sol, 0, 1.0) == pytest.approx(-0.4571068, abs=1e-7)


def test_lr_phase_numeric_example(minus_sol, unit_params, rep48):
    num = lr_phase_numeric(unit_params, minus_sol, 0, 1.0, rep48, steps=2048)
    assert num.real == pytest.approx(-0.4571068, abs=1e-7)
    assert abs(num.imag) <= 1e-10
    mat = lr_phase_numeric(unit_params, minus_sol, 0, 1.0, rep48, steps=2048, method="matrix")
    assert abs(mat.value - num.value) <= 1e-8


def test_lr_phase_numeric_uncoupled(rep48):
    sol = solve_eta(ModelParams(1.0, 0.0, 1.0))
    num = lr_phase_numeric(sol.params, sol, 2, 1.7, rep48)
    assert num.real == pytest.approx(-k_level(2) * 1.0 * 1.7, abs=1e-13)


def test_lr_phase_numeric_plus_branch(plus_sol, unit_params, rep48):
    num = lr_phase_numeric(unit_params, plus_sol, 2, 1.9, rep48)
    assert abs(num.value - lr_phase(unit_params, plus_sol, 2, 1.9)) <= 1e-8


def test_lr_phase_numeric_warns_on_few_steps(minus_sol, unit_params, rep48):
    with pytest.warns(ConvergenceWarning):
        num = lr_phase_numeric(unit_params, minus_sol, 0, 1.0, rep48, steps=8)
    assert num.warnings
    with pytest.raises(DomainError):
        lr_phase_numeric(unit_params, minus_sol, 0, 1.0, rep48, steps=33)


def test_berry_closed_formula(unit_params):
    # formula evaluation: (pi/2)(1 - 2/(2 sqrt 2))
    assert berry_phase_closed(unit_params, 0, Branch.MINUS) == pytest.approx(
        0.5 * math.pi * (1 - 1 / SQRT2), abs=1e-15)
    assert berry_phase_closed(ModelParams(1.0, 0.0, 1.0), 4, Branch.MINUS) == 0.0
    assert berry_phase_closed(ModelParams(1.0, 0.8, -1.0), 2, Branch.MINUS) == pytest.approx(2.5 * math.pi)


def test_berry_branch_sum():
    for p in (ModelParams(1.0, 0.3, 0.2), ModelParams(1.0, 1.0, 5.0)):
        for n in (0, 2, 4):
            total = berry_phase_closed(p, n, Branch.MINUS) + berry_phase_closed(p, n, Branch.PLUS)
            assert abs(total - 2 * math.pi * (n + 0.5)) <= 1e-12


def test_berry_from_eta_matches_closed(minus_sol, plus_sol, unit_params):
    for sol in (minus_sol, plus_sol):
        assert berry_phase_from_eta(sol, 2) == pytest.approx(berry_phase_closed(unit_params, 2, sol.branch))


def test_berry_numeric_example(minus_sol, unit_params, rep48):
    num = berry_phase_numeric(unit_params, minus_sol, 0, rep48, steps=4096)
    assert abs(num.value - berry_phase_closed(unit_params, 0, Branch.MINUS)) <= 1e-6
    assert abs(num.imag) <= 1e-10
    grp = berry_phase_numeric(unit_params, minus_sol, 0, rep48, steps=4096, method="group")
    assert abs(grp.value - num.value) <= 1e-8


def test_berry_numeric_uncoupled(rep48):
    sol = solve_eta(ModelParams(1.0, 0.0, 1.0))
    assert abs(berry_phase_numeric(sol.params, sol, 0, rep48).value) <= 1e-10


def test_berry_numeric_level_ratio(minus_sol, unit_params, rep48):
    g0 = berry_phase_numeric(unit_params, minus_sol, 0, rep48).real
    g2 = berry_phase_numeric(unit_params, minus_sol, 2, rep48).real
    assert g2 / g0 == pytest.approx(5.0, rel=1e-8)


def test_berry_numeric_step_doubling(minus_sol, unit_params, rep48):
    closed = berry_phase_closed(unit_params, 2, Branch.MINUS)
    errs = [abs(berry_phase_numeric(unit_params, minus_sol, 2, rep48, steps=s).value - closed)
            for s in (64, 128)]
    # second order: the ratio approaches 4 from below by O(h^2)
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=1e-3)


def test_berry_numeric_errors(minus_sol, rep48):
    p = ModelParams(1.0, 1.0, 0.0)
    with pytest.raises(NoPeriodError):
        berry_phase_numeric(p, solve_eta(p), 0, rep48)
    with pytest.warns(ConvergenceWarning):
        berry_phase_numeric(minus_sol.params, minus_sol, 0, rep48, steps=32)


def test_berry_adiabatic(unit_params):
    # formula evaluation (pi/2)(1 - 1/sqrt 5)
    assert berry_phase_adiabatic(unit_params, 0) == pytest.approx(0.5 * math.pi * (1 - 1 / math.sqrt(5)), abs=1e-15)
    assert berry_phase_adiabatic(unit_params, 0) == pytest.approx(0.8683149, abs=1e-7)
    slow = ModelParams(1.0, 1.0, 1e-4)
    assert abs(berry_phase_closed(slow, 0) - berry_phase_adiabatic(slow, 0)) <= 1e-3
    assert berry_phase_adiabatic(ModelParams(1.0, 1e9, 1.0), 2) == pytest.approx(2.5 * math.pi, rel=1e-8)
    static = ModelParams(1.0, 1.0, 0.0)
    assert berry_phase_adiabatic(static, 2) == berry_phase_closed(static, 2)


def test_average_energy_static_limit(rep48):
    p = ModelParams(1.0, 1.0, 0.0)
    sol = solve_eta(p)
    expected = (p.Omega - 2 * gamma0_value(p, sol)) * k_level(0)
    assert expected == pytest.approx(0.5590170, abs=1e-7)
    for method in ("group", "matrix"):
        e = average_energy(p, sol, 0, 0.0, rep48, method=method)
        assert abs(e - expected) <= 1e-10


def test_average_energy_uncoupled(rep48):
    sol = solve_eta(ModelParams(1.3, 0.0, 1.0))
    assert average_energy(sol.params, sol, 4, 0.2, rep48) == pytest.approx(1.3 * k_level(4), abs=1e-14)


def test_average_energy_real_and_constant(minus_sol, unit_params, rep48):
    vals = [average_energy(unit_params, minus_sol, 0, t, rep48, method="matrix") for t in (0.0, 0.5, 2.0)]
    assert max(abs(v.imag) for v in vals) <= 1e-10
    assert max(abs(v - vals[0]) for v in vals) <= 1e-10
    assert abs(vals[0] - average_energy_closed(unit_params, minus_sol, 0)) <= 1e-10


def test_transformed_hamiltonian(minus_sol, unit_params, rep48):
    assert transformed_hamiltonian_residual(unit_params, minus_sol, 0.3, rep48, interior=24) <= 1e-10
    Hp = transformed_hamiltonian(unit_params, minus_sol, 0.3, rep48, interior=24)
    expect = quasi_energy(unit_params, Branch.MINUS) * rep48.sz_diag[:24]
    assert np.abs(np.diag(Hp) - expect).max() <= 1e-9


def test_transformed_hamiltonian_fd_second_order(minus_sol, unit_params, rep48):
    r1 = transformed_hamiltonian_residual(unit_params, minus_sol, 0.3, rep48, dt=2e-4, interior=24)
    r2 = transformed_hamiltonian_residual(unit_params, minus_sol, 0.3, rep48, dt=1e-4, interior=24)
    assert r1 / r2 == pytest.approx(4.0, rel=1e-3)


@pytest.mark.xfail(strict=True, reason="the O(dt^2) constant on the 24-state block gives 2.3e-6 at "
                   "dt=1e-4, above the quoted 1e-6; see the decisions ledger")
def test_transformed_hamiltonian_fd_example(minus_sol, unit_params, rep48):
    assert transformed_hamiltonian_residual(unit_params, minus_sol, 0.3, rep48, dt=1e-4, interior=24) <= 1e-6


def test_transformed_hamiltonian_uncoupled(rep48):
    sol = solve_eta(ModelParams(1.0, 0.0, 1.0))
    assert transformed_hamiltonian_residual(sol.params, sol, 0.3, rep48, interior=24) == 0.0


def test_phase_report(minus_sol, unit_params, rep48):
    rep = phase_report(unit_params, minus_sol, 2, 0.7, rep48)
    assert rep.k_n == 1.25
    assert rep.alpha == pytest.approx(lr_phase(unit_params, minus_sol, 2, 0.7))
    assert abs(rep.berry_numeric - rep.berry_closed) <= 1e-6
    assert rep.quasi_energy == pytest.approx(-1 + 2 * SQRT2)
