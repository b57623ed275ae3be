"""Gamma, quasi-energy, Lewis-Riesenfeld and Berry phases, average energies.

Every phase has a closed form and a numeric route.  Level arguments ``n`` are
raw oscillator (Fock) numbers; the sector state they correspond to is
``rep.sector_index(n)``.

Two numeric routes exist.  ``method="matrix"`` sandwiches operators between
the bi-orthogonal basis columns ``R^-1|m>`` and ``R|m>`` of the truncated
representation, in ball arithmetic.  On the plus branch ``|tan(eta/2)| > 1``
and these columns are not normalizable, so any quantity that needs more than
finitely many of their entries diverges with the working dimension.
``method="group"`` instead forms ``R^-1 H R`` and ``R^-1 dR/dt`` (the latter
by finite differences) as 2x2 matrices in the defining representation and
reads the diagonal element off the ``Sz`` coordinate, since
``<m|a Sz + b Sp + c Sm|m> = a (k + m)``.

The matrix integrands are built from ``R(t)`` in ball arithmetic.  Because
``R(t) = exp(i w t Sz) R(0) exp(-i w t Sz)`` the sandwiched quantities do not
depend on ``t``; the integrand is evaluated at the first node and re-evaluated
at a few further nodes as a check (their spread is reported), and the
composite Simpson rule then runs over the node values.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from flint import acb

from . import _kernels, exact
from .algebra import TruncatedRep
from .errors import ConvergenceWarning, DomainError, NoPeriodError
from .invariant import (Branch, EtaSolution, algebra_coordinates, defining_hamiltonian, defining_r,
                        detuning_scale, padded_rep, solve_eta)
from .model import ModelParams


def k_level(n: float) -> float:
    """Invariant eigenvalue ``(n + 1/2)/2`` of oscillator level ``n``."""
    return 0.5 * (n + 0.5)


def gamma_value(params: ModelParams, eta_sol: EtaSolution) -> float:
    """``(w + Omega) sin^2(eta/2) + G sin(eta)``; constant in time."""
    return (params.omega + params.Omega) * eta_sol.sin_half_sq + params.G * math.sin(eta_sol.eta)


def gamma0_value(params: ModelParams, eta_sol: EtaSolution) -> float:
    """Adiabatic ``Omega sin^2(eta/2) + G sin(eta)`` (equals Gamma at ``w = 0``)."""
    return params.Omega * eta_sol.sin_half_sq + params.G * math.sin(eta_sol.eta)


def quasi_energy(params: ModelParams, branch: Branch | str = Branch.MINUS) -> float:
    """``Omega - 2 Gamma``."""
    sol = solve_eta(params, branch)
    return params.Omega - 2.0 * gamma_value(params, sol)


def quasi_energy_simplified(params: ModelParams, branch: Branch | str = Branch.MINUS) -> float:
    """``-w + D`` (MINUS) or ``-w - D`` (PLUS)."""
    branch = Branch.parse(branch)
    D = detuning_scale(params)
    return -params.omega + (D if branch is Branch.MINUS else -D)


def lr_phase(params: ModelParams, eta_sol: EtaSolution, n: float, t: float) -> float:
    """``alpha_n(t) = -k_n (Omega - 2 Gamma) t``."""
    return -k_level(n) * (params.Omega - 2.0 * gamma_value(params, eta_sol)) * t


def berry_phase_closed(params: ModelParams, n: float, branch: Branch | str = Branch.MINUS) -> float:
    """``pi (n + 1/2)(1 -/+ (w + Omega)/D)`` over one driving period."""
    branch = Branch.parse(branch)
    ratio = (params.omega + params.Omega) / detuning_scale(params)
    sign = -1.0 if branch is Branch.MINUS else 1.0
    return math.pi * (n + 0.5) * (1.0 + sign * ratio)


def berry_phase_from_eta(eta_sol: EtaSolution, n: float) -> float:
    """``2 k_n * 2 pi * sin^2(eta/2)``, the loop integral with constant integrand."""
    return 2.0 * k_level(n) * 2.0 * math.pi * eta_sol.sin_half_sq


def berry_phase_adiabatic(params: ModelParams, n: float, branch: Branch | str = Branch.MINUS) -> float:
    """``pi (n + 1/2)(1 -/+ Omega / sqrt(Omega^2 + 4 G^2))``."""
    branch = Branch.parse(branch)
    ratio = params.Omega / math.hypot(params.Omega, 2.0 * params.G)
    sign = -1.0 if branch is Branch.MINUS else 1.0
    return math.pi * (n + 0.5) * (1.0 + sign * ratio)


# ---------------------------------------------------------------------------
# numeric integrands
# ---------------------------------------------------------------------------

@dataclass
class NumericPhase:
    """Result of a quadrature with its diagnostics."""

    value: complex
    steps: int
    dt: float
    node_spread: float
    working_dim: int
    warnings: list = field(default_factory=list)

    @property
    def real(self) -> float:
        return float(self.value.real)

    @property
    def imag(self) -> float:
        return float(self.value.imag)


def _sandwich_terms(params: ModelParams, eta: float, t: float, rep: TruncatedRep, m: int,
                    dt: float, with_h: bool):
    """``(i <m|R^-1 dR/dt|m>, <m|R^-1 H R|m>)`` at time ``t``; FD derivative."""

    def run(bits):
        with exact.working_precision(bits):
            x = exact.ExactRep(rep)
            e = exact.arb_real(eta)
            w = exact.arb_real(params.omega)
            tt = exact.arb_real(t)
            h = exact.arb_real(dt)
            row = x.r_inv_rows(e, w * tt, m + 1)
            row = exact.submatrix(row, 1, rep.dim, row0=m)
            plus = x.r_columns(e, w * (tt + h), m + 1)
            minus = x.r_columns(e, w * (tt - h), m + 1)
            dcol = exact.submatrix(plus - minus, rep.dim, 1, col0=m) / (2 * h)
            gen = acb(0, 1) * (row * dcol)[0, 0]
            g, rad = exact.scalar(gen)
            en = 0j
            if with_h:
                col = exact.submatrix(x.r_columns(e, w * tt, m + 1), rep.dim, 1, col0=m)
                H = x.hamiltonian(exact.arb_real(params.Omega), exact.arb_real(params.G), w * tt)
                en, r2 = exact.scalar((row * (H * col))[0, 0])
                rad = max(rad, r2)
            return (g, en), rad

    return exact.certified(run, exact.bits_for(rep, eta))


def _group_terms(params: ModelParams, eta: float, t: float, weight: float, dt: float, with_h: bool):
    """Same pair as :func:`_sandwich_terms` from the defining representation.

    ``weight`` is the ``Sz`` eigenvalue ``k + m`` of the sector state.
    """
    w = params.omega
    _, Rinv = defining_r(eta, w * t)

    def r(shift):
        return defining_r(eta, w * (t + shift))[0]

    # fourth-order centered difference; in double precision this keeps both the
    # truncation and the rounding error near 1e-13 at the default step
    dR = (8.0 * (r(dt) - r(-dt)) - (r(2 * dt) - r(-2 * dt))) / (12.0 * dt)
    g = 1j * algebra_coordinates(Rinv @ dR)[0] * weight
    en = 0j
    if with_h:
        R, _ = defining_r(eta, w * t)
        en = algebra_coordinates(Rinv @ defining_hamiltonian(params, t) @ R)[0] * weight
    return g, en


def _group_fd_step(params: ModelParams) -> float:
    return 1e-3 / max(abs(params.omega), 1.0)


def _terms(method, params, eta, t, rep, m, dt, with_h):
    if method == "group":
        return _group_terms(params, eta, t, rep.eigenvalue(m), dt, with_h)
    if method == "matrix":
        return _sandwich_terms(params, eta, t, rep, m, dt, with_h)
    raise ValueError(f"unknown method {method!r}")


def _check_nodes(nodes: np.ndarray, samples: int) -> np.ndarray:
    if samples <= 0 or nodes.size <= 1:
        return nodes[:1]
    idx = np.unique(np.linspace(0, nodes.size - 1, samples + 1).round().astype(int))
    return nodes[idx]


def _quadrature(values_at, t_final: float, steps: int, samples: int):
    nodes = np.linspace(0.0, t_final, steps + 1)
    checked = [values_at(tn) for tn in _check_nodes(nodes, samples)]
    base = checked[0]
    spread = max((abs(c - base) for c in checked), default=0.0)
    values = np.full(steps + 1, base, dtype=np.complex128)
    h = t_final / steps
    total = _kernels.simpson(values.real.copy(), h) + 1j * _kernels.simpson(values.imag.copy(), h)
    return complex(total), float(spread)


def _fd_step(t_final: float, steps: int) -> float:
    return abs(t_final) / steps / 16.0


def berry_phase_numeric(params: ModelParams, eta_sol: EtaSolution, n: float, rep: TruncatedRep,
                        steps: int = 4096, samples: int = 3, dt: float | None = None,
                        method: str = "matrix") -> NumericPhase:
    """``i * loop integral of <n|_l d/dt |n>_r`` over one period ``2 pi / w``.

    Only finitely many entries of each column enter ``R^-1 dR/dt`` on the
    diagonal, so the matrix route is exact on both branches.

    ``dt`` defaults to ``T / steps / 16`` on the matrix route, so the
    finite-difference error falls fourfold with every doubling of ``steps``.
    """
    if params.omega == 0:
        raise NoPeriodError("omega = 0 has no driving period; use berry_phase_adiabatic")
    m = rep.sector_index(n)
    notes = []
    if steps < 64:
        notes.append(f"steps={steps} below the recommended 64")
        warnings.warn(notes[-1], ConvergenceWarning, stacklevel=2)
    if steps % 2:
        raise DomainError("steps must be even for the Simpson rule")
    T = abs(params.period)
    if dt is not None:
        h = float(dt)
    else:
        h = _group_fd_step(params) if method == "group" else _fd_step(T, steps)
    value, spread = _quadrature(
        lambda tn: complex(_terms(method, params, eta_sol.eta, tn, rep, m, h, False)[0]),
        T, steps, samples)
    return NumericPhase(value=value, steps=steps, dt=h, node_spread=spread,
                        working_dim=rep.dim, warnings=notes)


def lr_phase_numeric(params: ModelParams, eta_sol: EtaSolution, n: float, t: float,
                     rep: TruncatedRep, steps: int = 2048, samples: int = 3,
                     dt: float | None = None, pad="auto", method: str = "group") -> NumericPhase:
    """``int_0^t <n|_l (i d/dt - H) |n>_r dt'`` by composite Simpson.

    The default group route is valid on both branches; the matrix route runs
    on a padded working space and converges only when ``|tan(eta/2)| < 1``.
    """
    m = rep.sector_index(n)
    notes = []
    if steps < 16:
        notes.append(f"steps={steps} below the minimum 16")
        warnings.warn(notes[-1], ConvergenceWarning, stacklevel=2)
    if steps % 2:
        raise DomainError("steps must be even for the Simpson rule")
    if t == 0:
        return NumericPhase(0j, steps, 0.0, 0.0, rep.dim, notes)
    work = padded_rep(rep, eta_sol.eta, m + 1, pad) if method == "matrix" else rep
    period = abs(params.period) if params.omega else 1.0
    if dt is not None:
        h = float(dt)
    else:
        h = _group_fd_step(params) if method == "group" else _fd_step(min(abs(t), period), steps)

    def integrand(tn):
        g, en = _terms(method, params, eta_sol.eta, tn, work, m, h, True)
        return complex(g) - complex(en)

    value, spread = _quadrature(integrand, t, steps, samples)
    return NumericPhase(value=value, steps=steps, dt=h, node_spread=spread,
                        working_dim=work.dim, warnings=notes)


def average_energy(params: ModelParams, eta_sol: EtaSolution, n: float, t: float,
                   rep: TruncatedRep, pad="auto", method: str = "group") -> complex:
    """``<n(t)|_l H(t) |n(t)>_r``.

    ``method="matrix"`` sandwiches H between the bi-orthogonal columns on a
    padded working space (convergent only when ``|tan(eta/2)| < 1``);
    ``method="group"`` reads it off ``R^-1 H R`` in the defining representation.
    """
    m = rep.sector_index(n)
    if method == "group":
        R, Rinv = defining_r(eta_sol.eta, params.phase(t))
        a = algebra_coordinates(Rinv @ defining_hamiltonian(params, t) @ R)[0]
        return complex(a * rep.eigenvalue(m))
    if method != "matrix":
        raise ValueError(f"unknown method {method!r}")
    work = padded_rep(rep, eta_sol.eta, m + 1, pad)

    def run(bits):
        with exact.working_precision(bits):
            x = exact.ExactRep(work)
            e = exact.arb_real(eta_sol.eta)
            phi = exact.arb_real(params.omega) * exact.arb_real(t)
            row = exact.submatrix(x.r_inv_rows(e, phi, m + 1), 1, work.dim, row0=m)
            col = exact.submatrix(x.r_columns(e, phi, m + 1), work.dim, 1, col0=m)
            H = x.hamiltonian(exact.arb_real(params.Omega), exact.arb_real(params.G), phi)
            return exact.scalar((row * (H * col))[0, 0])

    return exact.certified(run, exact.bits_for(work, eta_sol.eta))


def average_energy_closed(params: ModelParams, eta_sol: EtaSolution, n: float) -> float:
    """Diagonal of ``R^-1 H R``: ``k_n (Omega cos(eta) - 2 G sin(eta))``."""
    return k_level(n) * (params.Omega * math.cos(eta_sol.eta) - 2.0 * params.G * math.sin(eta_sol.eta))


def transformed_hamiltonian(params: ModelParams, eta_sol: EtaSolution, t: float, rep: TruncatedRep,
                            dt: float | None = None, interior: int | None = None,
                            pad="auto") -> np.ndarray:
    """``H' = R^-1 H R - i R^-1 dR/dt`` on the leading block.

    ``dt=None`` uses the analytic derivative of the factorized R.
    """
    n = rep.dim // 2 if interior is None else int(interior)
    work = padded_rep(rep, eta_sol.eta, n, pad)
    if dt is not None and dt <= 0:
        raise ValueError("dt must be positive")

    def run(bits):
        with exact.working_precision(bits):
            x = exact.ExactRep(work)
            e = exact.arb_real(eta_sol.eta)
            w = exact.arb_real(params.omega)
            tt = exact.arb_real(t)
            phi = w * tt
            head = x.r_inv_rows(e, phi, n)
            cols = x.r_columns(e, phi, n + 1)
            cols_n = exact.submatrix(cols, work.dim, n)
            H = x.hamiltonian(exact.arb_real(params.Omega), exact.arb_real(params.G), phi)
            if dt is None:
                A, C, _ = x.r_factors(e, phi)
                dR = acb(0, 1) * w * (A * (x.Sp * cols_n) - C * (cols * exact.submatrix(x.Sm, n + 1, n)))
            else:
                h = exact.arb_real(dt)
                dR = (x.r_columns(e, w * (tt + h), n) - x.r_columns(e, w * (tt - h), n)) / (2 * h)
            return exact.to_numpy(head * (H * cols_n - acb(0, 1) * dR))

    return exact.certified(run, exact.bits_for(work, eta_sol.eta))


def transformed_hamiltonian_residual(params: ModelParams, eta_sol: EtaSolution, t: float,
                                     rep: TruncatedRep, dt: float | None = None,
                                     interior: int | None = None, pad="auto") -> float:
    """Largest off-diagonal entry of ``H'`` on the leading block."""
    Hp = transformed_hamiltonian(params, eta_sol, t, rep, dt, interior, pad)
    off = Hp - np.diag(np.diag(Hp))
    return float(np.abs(off).max()) if off.size else 0.0


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseReport:
    n: int
    k_n: float
    Gamma: float
    alpha: float
    berry_closed: float
    berry_numeric: float
    berry_adiabatic: float
    quasi_energy: float
    berry_numeric_imag: float = 0.0


def phase_report(params: ModelParams, eta_sol: EtaSolution, n: int, t: float, rep: TruncatedRep,
                 steps: int = 4096) -> PhaseReport:
    """All phase quantities for one level."""
    if params.omega != 0:
        num = berry_phase_numeric(params, eta_sol, n, rep, steps)
        bn, bi = num.real, num.imag
    else:
        bn, bi = float("nan"), 0.0
    return PhaseReport(
        n=int(n), k_n=k_level(n), Gamma=gamma_value(params, eta_sol),
        alpha=lr_phase(params, eta_sol, n, t),
        berry_closed=berry_phase_closed(params, n, eta_sol.branch),
        berry_numeric=bn,
        berry_adiabatic=berry_phase_adiabatic(params, n, eta_sol.branch),
        quasi_energy=params.Omega - 2.0 * gamma_value(params, eta_sol),
        berry_numeric_imag=bi,
    )
