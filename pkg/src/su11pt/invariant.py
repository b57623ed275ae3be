"""Auxiliary condition, the transformation R(t) and the invariant I(t).

``R(t) = exp((eta/2)(Sp e^{i w t} + Sm e^{-i w t}))`` is built from its
normal-ordered factors (see :mod:`su11pt.exact`).  Exponentiating the truncated
generator instead diverges with ``dim``: the generator is unbounded in both
directions, and the truncated exponential picks up ``exp(|eta| dim)`` growth
that has nothing to do with the infinite operator.  That route is kept as
``method="expm"`` for comparison only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
from flint import acb

from . import _kernels, exact
from .algebra import TruncatedRep, build_rep, commutator
from .errors import DegenerateParametersError, NumericError
from .model import ModelParams, hamiltonian


class Branch(enum.Enum):
    """Sign choice in ``sin^2(eta/2) = 1/2 -/+ (w + Omega)/(2D)``."""

    MINUS = "minus"
    PLUS = "plus"

    @property
    def sign(self) -> int:
        return -1 if self is Branch.MINUS else 1

    @classmethod
    def parse(cls, text) -> "Branch":
        if isinstance(text, Branch):
            return text
        return cls(str(text).strip().lower())


@dataclass(frozen=True)
class EtaSolution:
    eta: float
    branch: Branch
    aux_residual: float
    params: ModelParams

    @property
    def sin_half_sq(self) -> float:
        return math.sin(0.5 * self.eta) ** 2

    def perturbed(self, delta: float) -> "EtaSolution":
        """Same solution with ``eta`` shifted; the auxiliary condition then fails."""
        eta = self.eta + delta
        return replace(self, eta=eta, aux_residual=aux_condition_residual(self.params, eta))


def detuning_scale(params: ModelParams) -> float:
    """``D = sqrt((w + Omega)^2 + 4 G^2)``."""
    return math.hypot(params.omega + params.Omega, 2.0 * params.G)


def aux_condition_residual(params: ModelParams, eta: float) -> float:
    return abs(params.G * math.cos(eta) + 0.5 * (params.omega + params.Omega) * math.sin(eta))


def solve_eta(params: ModelParams, branch: Branch = Branch.MINUS) -> EtaSolution:
    """Angle ``eta`` in (-pi, pi] satisfying the auxiliary condition.

    MINUS: ``cos eta = (w+Omega)/D``, ``sin eta = -2G/D``.
    PLUS:  ``cos eta = -(w+Omega)/D``, ``sin eta = 2G/D``.
    """
    branch = Branch.parse(branch)
    s = params.omega + params.Omega
    if s == 0 and params.G == 0:
        raise DegenerateParametersError("Omega + omega = 0 and G = 0: eta is undefined")
    if branch is Branch.MINUS:
        eta = math.atan2(-2.0 * params.G, s)
    else:
        eta = math.atan2(2.0 * params.G, -s)
    if eta <= -math.pi:
        eta += 2.0 * math.pi
    eta = eta + 0.0  # drop a negative zero
    return EtaSolution(eta=eta, branch=branch, aux_residual=aux_condition_residual(params, eta),
                       params=params)


# ---------------------------------------------------------------------------
# R(t) in double precision
# ---------------------------------------------------------------------------

def _factors(eta: float, phi: float):
    th = 0.5 * eta
    c = math.cos(th)
    if c <= 1e-12:
        raise NumericError("R is unbounded on every Fock state when cos(eta/2) <= 0",
                           eta=eta)
    t = math.tan(th)
    return np.exp(1j * phi) * t, np.exp(-1j * phi) * t, c


def _checked(M: np.ndarray, what: str, eta: float, dim: int) -> np.ndarray:
    if not np.all(np.isfinite(M)):
        raise NumericError(f"{what} overflowed double precision", eta=eta, dim=dim,
                           hint="reduce dim; entries grow like tan(eta/2)**dim")
    return M


def _generator(eta: float, phi: float, rep: TruncatedRep) -> np.ndarray:
    e = np.exp(1j * phi)
    return 0.5 * eta * (rep.Sp * e + rep.Sm * np.conj(e))


def r_matrix(eta: float, phi: float, rep: TruncatedRep, method: str = "factorized") -> np.ndarray:
    """R for a given angle and driving phase."""
    if method == "expm":
        return _checked(scipy.linalg.expm(_generator(eta, phi, rep)), "expm(R exponent)", eta, rep.dim)
    if method != "factorized":
        raise ValueError(f"unknown method {method!r}")
    A, C, c = _factors(eta, phi)
    amp = np.ascontiguousarray(rep.amp, dtype=np.float64)
    Ep = _kernels.ladder_exp(amp, complex(A))
    Em = _kernels.ladder_exp(amp, complex(np.conj(C))).conj().T
    d = c ** (-2.0 * rep.sz_diag)
    with np.errstate(over="ignore", invalid="ignore"):
        return _checked(Ep @ (d[:, None] * Em), "R", eta, rep.dim)


def r_inverse_matrix(eta: float, phi: float, rep: TruncatedRep, method: str = "factorized") -> np.ndarray:
    if method == "expm":
        return _checked(scipy.linalg.expm(-_generator(eta, phi, rep)), "expm(-R exponent)", eta, rep.dim)
    if method != "factorized":
        raise ValueError(f"unknown method {method!r}")
    A, C, c = _factors(eta, phi)
    amp = np.ascontiguousarray(rep.amp, dtype=np.float64)
    Ep_inv = _kernels.ladder_exp(amp, complex(-A))
    Em_inv = _kernels.ladder_exp(amp, complex(-np.conj(C))).conj().T
    d = c ** (2.0 * rep.sz_diag)
    with np.errstate(over="ignore", invalid="ignore"):
        return _checked(Em_inv @ (d[:, None] * Ep_inv), "R^-1", eta, rep.dim)


def r_operator(eta_sol: EtaSolution, params: ModelParams, t: float, rep: TruncatedRep,
               method: str = "factorized") -> np.ndarray:
    return r_matrix(eta_sol.eta, params.phase(t), rep, method)


def r_inverse(eta_sol: EtaSolution, params: ModelParams, t: float, rep: TruncatedRep,
              method: str = "factorized") -> np.ndarray:
    """Exact inverse of the truncated :func:`r_operator`.

    Note that this is not the truncation of the infinite ``R^-1`` (that is
    ``r_operator`` with ``-eta``); the two agree on the leading block whenever
    ``|tan(eta/2)| < 1``.
    """
    return r_inverse_matrix(eta_sol.eta, params.phase(t), rep, method)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def invariant_closed(eta_sol: EtaSolution, t: float, rep: TruncatedRep) -> np.ndarray:
    """``cos(eta) Sz - sin(eta)/2 (Sp e^{i w t} - Sm e^{-i w t})``."""
    e = np.exp(1j * eta_sol.params.phase(t))
    eta = eta_sol.eta
    return math.cos(eta) * rep.Sz - 0.5 * math.sin(eta) * (rep.Sp * e - rep.Sm * np.conj(e))


def invariant_time_derivative(eta_sol: EtaSolution, t: float, rep: TruncatedRep) -> np.ndarray:
    w = eta_sol.params.omega
    e = np.exp(1j * w * t)
    return -0.5j * w * math.sin(eta_sol.eta) * (rep.Sp * e + rep.Sm * np.conj(e))


def similarity_closed(eta_sol: EtaSolution, t: float, rep: TruncatedRep):
    """Right-hand sides for ``R^-1 Sp R``, ``R^-1 Sm R`` and ``R^-1 Sz R``."""
    eta = eta_sol.eta
    e = np.exp(1j * eta_sol.params.phase(t))
    c2 = math.cos(0.5 * eta) ** 2
    s2 = math.sin(0.5 * eta) ** 2
    s = math.sin(eta)
    Sz, Sp, Sm = rep.Sz, rep.Sp, rep.Sm
    plus = Sp * c2 - Sz * np.conj(e) * s + Sm * np.conj(e) ** 2 * s2
    minus = Sm * c2 + Sz * e * s + Sp * e ** 2 * s2
    z = Sz * math.cos(eta) + 0.5 * s * (Sp * e - Sm * np.conj(e))
    return plus, minus, z


def generator_closed(eta_sol: EtaSolution, t: float, rep: TruncatedRep) -> np.ndarray:
    """``i R^-1 dR/dt = 2w sin^2(eta/2) Sz - (w/2) sin(eta)(Sp e^{iwt} - Sm e^{-iwt})``."""
    w = eta_sol.params.omega
    e = np.exp(1j * w * t)
    return (2.0 * w * eta_sol.sin_half_sq * rep.Sz
            - 0.5 * w * math.sin(eta_sol.eta) * (rep.Sp * e - rep.Sm * np.conj(e)))


def _interior(rep: TruncatedRep, interior: int | None) -> int:
    return rep.dim // 2 if interior is None else int(interior)


def invariant_condition_residual(eta_sol: EtaSolution, params: ModelParams, t: float,
                                 rep: TruncatedRep, interior: int | None = None) -> float:
    """``max|i dI/dt + [I, H]|`` on the leading block (all closed forms, no R)."""
    n = _interior(rep, interior)
    I = invariant_closed(eta_sol, t, rep)
    res = 1j * invariant_time_derivative(eta_sol, t, rep) + commutator(I, hamiltonian(params, t, rep))
    return float(np.abs(res[:n, :n]).max())


# ---------------------------------------------------------------------------
# R-based checks, evaluated in ball arithmetic
# ---------------------------------------------------------------------------

def _exact_phi(params: ModelParams, t: float):
    return exact.arb_real(params.omega) * exact.arb_real(t)


def exact_r_pair(rep: TruncatedRep, eta: float, params: ModelParams, t: float):
    """R(t) and R^-1(t) as acb matrices (call inside ``working_precision``)."""
    x = exact.ExactRep(rep)
    e = exact.arb_real(eta)
    phi = _exact_phi(params, t)
    return x, x.r(e, phi), x.r_inv(e, phi)


def padded_rep(rep: TruncatedRep, eta: float, block: int, pad="auto",
               leak=exact.boundary_leak_log) -> TruncatedRep:
    """Representation to evaluate on so that the boundary cannot reach ``block``.

    ``pad="auto"`` grows the dimension until the estimated leakage is below
    1e-13; an integer adds that many states; ``0`` keeps ``rep``.  When
    ``|tan(eta/2)| >= 1`` no dimension suffices and ``rep`` is returned as is.
    """
    if pad == "auto":
        d, _ = exact.working_dim(rep, eta, block, leak=leak)
    else:
        d = rep.dim + int(pad)
    return rep if d == rep.dim else build_rep(rep.sector, d)


def _residual_vs(exact_mat, closed: np.ndarray, n: int) -> tuple[float, float]:
    vals, rad = exact.to_numpy(exact.block(exact_mat, n))
    return float(np.abs(vals - closed[:n, :n]).max()), rad


def invariant_similarity(eta_sol: EtaSolution, params: ModelParams, t: float,
                         rep: TruncatedRep) -> np.ndarray:
    """``R(t) Sz R^-1(t)``, rounded to double from a certified evaluation."""

    def run(bits):
        with exact.working_precision(bits):
            x, R, Rinv = exact_r_pair(rep, eta_sol.eta, params, t)
            return exact.to_numpy(R * x.Sz * Rinv)

    return exact.certified(run, exact.bits_for(rep, eta_sol.eta))


# ---------------------------------------------------------------------------
# two-dimensional defining representation
# ---------------------------------------------------------------------------
# Sz = diag(1/2, -1/2), Sp = [[0, 1], [0, 0]], Sm = [[0, 0], [-1, 0]] satisfy the
# same commutators as the oscillator generators.  Conjugating an algebra
# element by R is a Lie-algebra operation, so it can be carried out on 2x2
# matrices and read back as coordinates on (Sz, Sp, Sm).  Unlike matrix
# elements between truncated oscillator states, this stays finite when
# |tan(eta/2)| > 1.

SZ2 = np.diag([0.5, -0.5]).astype(np.complex128)
SP2 = np.array([[0, 1], [0, 0]], dtype=np.complex128)
SM2 = np.array([[0, 0], [-1, 0]], dtype=np.complex128)


def defining_r(eta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """``R`` and ``R^-1`` as 2x2 matrices."""
    c, s = math.cos(0.5 * eta), math.sin(0.5 * eta)
    e = np.exp(1j * phi)
    R = np.array([[c, e * s], [-np.conj(e) * s, c]])
    Rinv = np.array([[c, -e * s], [np.conj(e) * s, c]])
    return R, Rinv


def defining_hamiltonian(params: ModelParams, t: float) -> np.ndarray:
    e = np.exp(1j * params.phase(t))
    return params.Omega * SZ2 + params.G * (SP2 * e - SM2 * np.conj(e))


def algebra_coordinates(X: np.ndarray) -> tuple[complex, complex, complex]:
    """``(a, b, c)`` with ``X = a Sz + b Sp + c Sm`` for a traceless 2x2 ``X``."""
    return complex(X[0, 0] - X[1, 1]), complex(X[0, 1]), complex(-X[1, 0])


def algebra_element(coords, rep: TruncatedRep) -> np.ndarray:
    a, b, c = coords
    return a * rep.Sz + b * rep.Sp + c * rep.Sm


def similarity_relations_residual(eta_sol: EtaSolution, params: ModelParams, t: float,
                                  rep: TruncatedRep, interior: int | None = None,
                                  pad="auto", method: str = "matrix") -> float:
    """Largest deviation of ``R^-1 S R`` from the closed forms, over Sp, Sm, Sz.

    ``method="matrix"`` multiplies truncated oscillator matrices.  The Sm
    relation picks up a term from the first state above the truncation; by
    default the evaluation runs on a larger working space (see
    :func:`padded_rep`) and only the leading ``interior`` block is reported.
    When ``|tan(eta/2)| > 1`` the sums behind these entries diverge with the
    working dimension and this route cannot converge.

    ``method="group"`` conjugates in the defining representation and maps the
    resulting coordinates onto the oscillator generators.
    """
    n = _interior(rep, interior)
    if method == "group":
        closed = similarity_closed(eta_sol, t, rep)
        R, Rinv = defining_r(eta_sol.eta, params.phase(t))
        worst = 0.0
        for S, rhs in zip((SP2, SM2, SZ2), closed):
            lhs = algebra_element(algebra_coordinates(Rinv @ S @ R), rep)
            worst = max(worst, float(np.abs(lhs[:n, :n] - rhs[:n, :n]).max()))
        return worst
    if method != "matrix":
        raise ValueError(f"unknown method {method!r}")
    rep = padded_rep(rep, eta_sol.eta, n, pad)
    closed = similarity_closed(eta_sol, t, rep)

    def run(bits):
        with exact.working_precision(bits):
            x = exact.ExactRep(rep)
            eta, phi = exact.arb_real(eta_sol.eta), _exact_phi(params, t)
            cols = x.r_columns(eta, phi, n + 1)
            head = x.r_inv_rows(eta, phi, n)
            worst, rad = 0.0, 0.0
            for S, rhs in zip((x.Sp, x.Sm, x.Sz), closed):
                r, rr = _residual_vs(head * (S * cols), rhs, n)
                worst, rad = max(worst, r), max(rad, rr)
            return worst, rad

    return exact.certified(run, exact.bits_for(rep, eta_sol.eta))


def generator_derivative_residual(eta_sol: EtaSolution, params: ModelParams, t: float,
                                  rep: TruncatedRep, dt: float | None = None,
                                  interior: int | None = None) -> float:
    """Compare ``i R^-1 dR/dt`` with its closed form on the leading block.

    ``dt=None`` differentiates the factorized R analytically,
    ``dR/dt = i w (A Sp R - C R Sm)``; a positive ``dt`` uses the centered
    difference ``(R(t+dt) - R(t-dt)) / (2 dt)`` instead.
    """
    n = _interior(rep, interior)
    closed = generator_closed(eta_sol, t, rep)
    if dt is not None and dt <= 0:
        raise ValueError("dt must be positive")

    def run(bits):
        with exact.working_precision(bits):
            x = exact.ExactRep(rep)
            eta, phi = exact.arb_real(eta_sol.eta), _exact_phi(params, t)
            head = x.r_inv_rows(eta, phi, n)
            w = exact.arb_real(params.omega)
            if dt is None:
                A, C, _ = x.r_factors(eta, phi)
                cols = x.r_columns(eta, phi, n + 1)
                sm = exact.submatrix(x.Sm, n + 1, n)
                dR = acb(0, 1) * w * (A * (x.Sp * exact.submatrix(cols, rep.dim, n)) - C * (cols * sm))
            else:
                h = exact.arb_real(dt)
                tt = exact.arb_real(t)
                dR = (x.r_columns(eta, w * (tt + h), n) - x.r_columns(eta, w * (tt - h), n)) / (2 * h)
            return _residual_vs(acb(0, 1) * (head * dR), closed, n)

    return exact.certified(run, exact.bits_for(rep, eta_sol.eta))


def pt_symmetry_of_r_residual(eta_sol: EtaSolution, params: ModelParams, t: float,
                              rep: TruncatedRep) -> float:
    """``max|conj(R(-t)) - R(t)|`` relative to ``max|R|``."""
    from .algebra import pt_apply

    R = r_operator(eta_sol, params, t, rep)
    lhs = pt_apply(r_operator(eta_sol, params, -t, rep), rep.sector)
    return float(np.abs(lhs - R).max() / np.abs(R).max())
