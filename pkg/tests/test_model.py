import math

import numpy as np
import pytest

from su11pt.algebra import Sector, build_rep
from su11pt.errors import DomainError
from su11pt.model import (ModelParams, hamiltonian, hamiltonian_adjoint, pt_covariance_residual,
                          quadrature_consistency_residual, quadrature_form)


def test_hamiltonian_uncoupled_is_diagonal():
    rep = build_rep(Sector.boson_even(), 4)
    H = hamiltonian(ModelParams(1.0, 0.0, 1.0), 0.37, rep)
    assert np.array_equal(H, np.diag([0.25, 1.25, 2.25, 3.25]).astype(complex))


def test_hamiltonian_entries_at_t0():
    rep = build_rep(Sector.boson_even(), 4)
    H = hamiltonian(ModelParams(1.0, 1.0, 1.0), 0.0, rep)
    assert H[1, 0] == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    assert H[0, 1] == pytest.approx(-math.sqrt(2) / 2, abs=1e-15)
    assert H[0, 0] == pytest.approx(0.25, abs=0)


def test_hamiltonian_is_not_hermitian():
    rep = build_rep(Sector.boson_even(), 4)
    H = hamiltonian(ModelParams(1.0, 1.0, 1.0), 0.0, rep)
    D = H - H.conj().T
    # the <1|.|0> entry carries 2 G sqrt(2)/2; deeper entries are larger
    assert abs(D[1, 0]) == pytest.approx(2 * math.sqrt(2) / 2, rel=1e-15)
    assert np.abs(D).max() > 0


def test_hamiltonian_adjoint_matches_display():
    rep = build_rep(Sector.boson_odd(), 7)
    p = ModelParams(1.3, 0.4, 0.9)
    e = np.exp(1j * 0.9 * 0.8)
    expect = 1.3 * rep.Sz - 0.4 * (rep.Sp * e - rep.Sm * np.conj(e))
    assert np.abs(hamiltonian_adjoint(p, 0.8, rep) - expect).max() <= 1e-15
    assert np.array_equal(hamiltonian_adjoint(p, 0.8, rep), hamiltonian(p, 0.8, rep).conj().T)


def test_hamiltonian_periodic():
    rep = build_rep(Sector.boson_even(), 6)
    p = ModelParams(1.0, 0.7, 2.0)
    assert np.abs(hamiltonian(p, 0.3 + p.period, rep) - hamiltonian(p, 0.3, rep)).max() <= 1e-14


def test_quadrature_form_examples():
    q = quadrature_form(ModelParams(1.0, 1.0, 1.0), 0.0)
    assert (q.c_xx, q.c_pp, q.c_xp) == pytest.approx((0.25, 0.25, -0.5j))
    q = quadrature_form(ModelParams(1.0, 1.0, 1.0), math.pi / 2)
    assert (q.c_xx, q.c_pp, q.c_xp) == pytest.approx((0.25 + 0.5j, 0.25 - 0.5j, 0), abs=1e-15)
    q = quadrature_form(ModelParams(2.0, 0.0, 3.0), 1.1)
    assert (q.c_xx, q.c_pp, q.c_xp) == (0.5, 0.5, 0)


def test_quadrature_form_invariants():
    p = ModelParams(1.7, 0.6, 0.8)
    for t in (0.0, 0.4, 2.3):
        q = quadrature_form(p, t)
        assert q.c_xx + q.c_pp == pytest.approx(1.7 / 2)
        assert q.c_xx - q.c_pp == pytest.approx(1j * 0.6 * math.sin(0.8 * t))
        assert q.c_xp == pytest.approx(-0.5j * 0.6 * math.cos(0.8 * t))


@pytest.mark.parametrize("dim", [4, 8, 16, 32])
@pytest.mark.parametrize("sector", [Sector.boson_even(), Sector.boson_odd()])
def test_quadrature_consistency_interior(dim, sector):
    rep = build_rep(sector, dim)
    assert quadrature_consistency_residual(ModelParams(1.0, 1.0, 1.0), 0.0, rep) <= 1e-12
    assert quadrature_consistency_residual(ModelParams(1.0, 0.0, 1.0), 0.4, rep) <= 1e-13


def test_quadrature_boundary_leaks():
    # the odd sector's top state couples through x^2 and p^2 to Fock 2*dim,
    # which the doubled Fock space does not hold
    rep = build_rep(Sector.boson_odd(), 8)
    assert quadrature_consistency_residual(ModelParams(1.0, 1.0, 1.0), 0.0, rep, block=rep.dim) > 0


def test_quadrature_needs_boson_sector():
    with pytest.raises(DomainError):
        quadrature_consistency_residual(ModelParams(1, 1, 1), 0.0, build_rep(Sector.bargmann(0.6), 4))


def test_pt_covariance():
    rep = build_rep(Sector.boson_even(), 12)
    p = ModelParams(1.0, 1.0, 1.0)
    assert pt_covariance_residual(p, 0.7, rep) == 0.0
    assert pt_covariance_residual(p, 0.0, rep) == 0.0
    broken = ModelParams(1.0 + 0.2j, 1.0, 1.0)
    assert pt_covariance_residual(broken, 0.7, rep) > 0


def test_params_must_be_finite():
    with pytest.raises(DomainError):
        ModelParams(float("nan"), 1.0, 1.0)
    with pytest.raises(DomainError):
        ModelParams(1.0, float("inf"), 1.0)
