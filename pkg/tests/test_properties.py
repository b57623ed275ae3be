import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from su11pt.algebra import Sector, build_rep, pt_apply
from su11pt.invariant import Branch, aux_condition_residual, defining_r, detuning_scale, solve_eta
from su11pt.model import ModelParams, hamiltonian, pt_covariance_residual
from su11pt.phases import (berry_phase_closed, berry_phase_from_eta, gamma_value, quasi_energy,
                           quasi_energy_simplified)
from su11pt.propagator import defining_rep_evolution, epsilon_value

reals = st.floats(-3.0, 3.0, allow_nan=False)
spacing = st.floats(0.1, 3.0)
sectors = st.sampled_from([Sector.boson_even(), Sector.boson_odd(), Sector.bargmann(0.6)])
branches = st.sampled_from(list(Branch))


@st.composite
def model_params(draw):
    p = ModelParams(draw(spacing), draw(reals), draw(reals))
    assume(detuning_scale(p) > 1e-3)
    return p


@given(sectors, st.integers(2, 40))
def test_sp_is_adjoint_of_sm(sector, dim):
    rep = build_rep(sector, dim)
    assert np.array_equal(rep.Sp, rep.Sm.conj().T)


@given(st.integers(2, 12), st.data())
def test_pt_apply_is_an_involution(dim, data):
    entries = data.draw(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
                                 min_size=dim * dim, max_size=dim * dim))
    M = np.array(entries).reshape(dim, dim)
    sector = data.draw(sectors)
    assert np.array_equal(pt_apply(pt_apply(M, sector), sector), M)


@settings(max_examples=50, deadline=None)
@given(model_params(), st.floats(0.0, 10.0))
def test_hamiltonian_is_pt_covariant(p, t):
    rep = build_rep(Sector.boson_even(), 10)
    assert pt_covariance_residual(p, t, rep) <= 1e-13 * max(1.0, np.abs(hamiltonian(p, t, rep)).max())


@given(model_params(), st.integers(0, 8))
def test_berry_branch_sum(p, n):
    total = berry_phase_closed(p, n, Branch.MINUS) + berry_phase_closed(p, n, Branch.PLUS)
    assert abs(total - 2 * math.pi * (n + 0.5)) <= 1e-12 * (n + 1)


@given(model_params(), branches)
def test_eta_solves_aux_condition(p, branch):
    sol = solve_eta(p, branch)
    scale = max(1.0, abs(p.G), abs(p.omega + p.Omega))
    assert aux_condition_residual(p, sol.eta) <= 1e-14 * scale
    assert -math.pi < sol.eta <= math.pi
    s = math.sin(0.5 * sol.eta) ** 2
    assert abs(s + math.cos(0.5 * sol.eta) ** 2 - 1.0) <= 1e-15
    assert abs(sol.sin_half_sq - s) <= 1e-14


@given(model_params(), branches)
def test_gamma_identity(p, branch):
    sol = solve_eta(p, branch)
    expect = 0.5 * (p.omega + p.Omega) + 0.5 * branch.sign * detuning_scale(p)
    assert abs(gamma_value(p, sol) - expect) <= 1e-12 * max(1.0, detuning_scale(p))


@given(model_params(), branches)
def test_quasi_energy_identity(p, branch):
    a, b = quasi_energy(p, branch), quasi_energy_simplified(p, branch)
    assert abs(a - b) <= 1e-12 * max(1.0, detuning_scale(p))


@given(model_params(), branches, st.integers(0, 6))
def test_berry_from_eta_matches_closed(p, branch, n):
    sol = solve_eta(p, branch)
    assert abs(berry_phase_from_eta(sol, n) - berry_phase_closed(p, n, branch)) <= 1e-11 * (n + 1)


@given(st.floats(-3.0, 3.0), st.floats(-10.0, 10.0))
def test_defining_r_inverse(eta, phi):
    R, Rinv = defining_r(eta, phi)
    assert np.abs(R @ Rinv - np.eye(2)).max() <= 1e-13 * max(1.0, np.abs(R).max() ** 2)


@settings(max_examples=50, deadline=None)
@given(model_params(), branches, st.floats(0.0, 5.0))
def test_defining_evolution_has_unit_determinant(p, branch, t):
    sol = solve_eta(p, branch)
    g, _ = defining_rep_evolution(p, sol, t)
    assert abs(np.linalg.det(g) - 1.0) <= 1e-12 * max(1.0, np.abs(g).max() ** 2)
    assert math.isfinite(epsilon_value(p, sol, t))
