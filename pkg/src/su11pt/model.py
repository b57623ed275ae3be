"""The periodically driven non-Hermitian Hamiltonian and its oscillator form."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import TruncatedRep, fock_ladder, pt_apply
from .errors import DomainError


@dataclass(frozen=True)
class ModelParams:
    """Level spacing ``Omega``, coupling ``G`` and driving frequency ``omega``.

    The driving phase is ``phi(t) = omega * t``.  ``Omega`` may be complex only
    as a test hook for breaking PT symmetry; everything downstream of the
    Hamiltonian assumes real parameters.
    """

    Omega: float
    G: float
    omega: float

    def __post_init__(self):
        for name in ("Omega", "G", "omega"):
            if not np.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    @property
    def is_real(self) -> bool:
        return all(np.isreal(v) for v in (self.Omega, self.G, self.omega))

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.omega

    def phase(self, t: float) -> float:
        return self.omega * t


@dataclass(frozen=True)
class QuadratureForm:
    """Coefficients of ``x^2``, ``p^2`` and ``xp + px``."""

    c_xx: complex
    c_pp: complex
    c_xp: complex


def _drive(params: ModelParams, t: float) -> complex:
    return np.exp(1j * params.omega * t)


def hamiltonian(params: ModelParams, t: float, rep: TruncatedRep) -> np.ndarray:
    """``Omega*Sz + G*(Sp e^{i w t} - Sm e^{-i w t})``."""
    e = _drive(params, t)
    return params.Omega * rep.Sz + params.G * (rep.Sp * e - rep.Sm * np.conj(e))


def hamiltonian_adjoint(params: ModelParams, t: float, rep: TruncatedRep) -> np.ndarray:
    """Closed form of ``H(t)^dagger`` for real parameters: the coupling flips sign."""
    e = _drive(params, t)
    return params.Omega * rep.Sz - params.G * (rep.Sp * e - rep.Sm * np.conj(e))


def quadrature_form(params: ModelParams, t: float) -> QuadratureForm:
    phi = params.phase(t)
    half_g = 0.5 * params.G
    return QuadratureForm(
        c_xx=0.25 * params.Omega + 1j * half_g * np.sin(phi),
        c_pp=0.25 * params.Omega - 1j * half_g * np.sin(phi),
        c_xp=-1j * half_g * np.cos(phi),
    )


def quadrature_operator(params: ModelParams, t: float, nmax: int) -> np.ndarray:
    """``c_xx x^2 + c_pp p^2 + c_xp (xp + px)`` on Fock states ``0..nmax-1``.

    Uses ``x = (a + a')/sqrt 2`` and ``p = i(a' - a)/sqrt 2``; products are
    formed from the truncated ``x`` and ``p`` so the top rows leak.
    """
    a = fock_ladder(nmax)
    ad = a.conj().T
    x = (a + ad) / np.sqrt(2.0)
    p = 1j * (ad - a) / np.sqrt(2.0)
    q = quadrature_form(params, t)
    return q.c_xx * (x @ x) + q.c_pp * (p @ p) + q.c_xp * (x @ p + p @ x)


def quadrature_consistency_residual(params: ModelParams, t: float, rep: TruncatedRep,
                                    block: int | None = None) -> float:
    """Distance between the oscillator form projected to the sector and ``H(t)``.

    The Fock space holds ``2*dim`` states so both sectors are present; the
    comparison runs on the leading ``block`` sector states (default: interior).
    """
    if not rep.sector.is_boson:
        raise DomainError("the x-p form needs a boson sector")
    n = rep.interior_dim if block is None else int(block)
    full = quadrature_operator(params, t, 2 * rep.dim)
    idx = 2 * np.arange(rep.dim) + rep.sector.fock_offset
    projected = full[np.ix_(idx, idx)]
    diff = projected - hamiltonian(params, t, rep)
    return float(np.abs(diff[:n, :n]).max())


def pt_covariance_residual(params: ModelParams, t: float, rep: TruncatedRep) -> float:
    """``max|PT[H(-t)] - H(t)|``; zero exactly when the parameters are real."""
    lhs = pt_apply(hamiltonian(params, -t, rep), rep.sector)
    return float(np.abs(lhs - hamiltonian(params, t, rep)).max())
