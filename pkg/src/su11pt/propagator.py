"""The non-unitary evolution operator ``U(t,0) = R(t) exp(-i eps(t) Sz) R^-1(0)``.

Two evaluations of the closed form are offered:

``method="group"`` multiplies the three factors in the two-dimensional
defining representation (where every factor is an explicit 2x2 matrix) and
lifts the product to the oscillator representation through its Gauss
decomposition ``exp(A Sp) delta^(-2 Sz) exp(C Sm)``.  Because ``exp(A Sp)``
only raises and ``exp(C Sm)`` only lowers, every entry of the lifted matrix is
a finite sum, so the result is the exact restriction of the infinite operator
to the first ``dim`` states.

``method="product"`` multiplies truncated R matrices in ball arithmetic on a
padded working space; it converges to the same block when
``|tan(eta/2)| < 1`` and is kept as an independent cross-check of the lift.

The numeric oracle integrates ``i dU/dt = H(t) U`` with classical RK4.  The
default integrates in the defining representation and lifts the same way.
Integrating the truncated ``dim x dim`` matrix equation is available as
``method="truncated"``; the truncated H has complex eigenvalues near the
boundary whose growth swamps the leading block for most parameters.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, exact
from .algebra import TruncatedRep
from .errors import DomainError, NumericError, ShapeError, StabilityError
from .invariant import EtaSolution, padded_rep
from .model import ModelParams
from .phases import gamma_value

# RK4 is stable for |lambda dt| up to about 2.8; stay well inside.
STABILITY_LIMIT = 0.5


def epsilon_value(params: ModelParams, eta_sol: EtaSolution, t: float) -> float:
    """``eps(t) = (Omega - 2 Gamma) t``."""
    return (params.Omega - 2.0 * gamma_value(params, eta_sol)) * t


# ---------------------------------------------------------------------------
# defining representation and lift
# ---------------------------------------------------------------------------

def defining_rep_evolution(params: ModelParams, eta_sol: EtaSolution, t: float) -> tuple[np.ndarray, float]:
    """Closed-form ``U(t,0)`` as a 2x2 matrix and the continuous argument of ``U[1,1]``."""
    th = 0.5 * eta_sol.eta
    c, s = math.cos(th), math.sin(th)
    phi = params.phase(t)
    eps = epsilon_value(params, eta_sol, t)
    e = np.exp(1j * phi)
    R_t = np.array([[c, e * s], [-np.conj(e) * s, c]])
    R0_inv = np.array([[c, -s], [s, c]], dtype=np.complex128)
    E = np.diag([np.exp(-0.5j * eps), np.exp(0.5j * eps)])
    g = R_t @ E @ R0_inv
    # g[1,1] = exp(i eps/2) (c^2 + s^2 exp(-i psi)) with psi = phi + eps; factor out
    # the dominant term so the remaining argument stays in (-pi/2, pi/2).
    psi = phi + eps
    c2, s2 = c * c, s * s
    if c2 >= s2:
        arg = 0.5 * eps + float(np.angle(c2 + s2 * np.exp(-1j * psi)))
    else:
        arg = 0.5 * eps - psi + float(np.angle(s2 + c2 * np.exp(1j * psi)))
    return g, arg


def lift(g: np.ndarray, arg: float, rep: TruncatedRep) -> np.ndarray:
    """Oscillator-representation matrix of the group element ``g``.

    ``arg`` is the argument of ``g[1,1]`` continued along the path from the
    identity; it fixes the branch of ``g[1,1] ** (-2 Sz)``.
    """
    g = np.asarray(g, dtype=np.complex128)
    if g.shape != (2, 2):
        raise ShapeError("group element must be 2x2")
    delta = g[1, 1]
    if abs(delta) < 1e-300:
        raise NumericError("Gauss decomposition undefined: g[1,1] = 0", g=g.tolist())
    A = g[0, 1] / delta
    C = -g[1, 0] / delta
    amp = np.ascontiguousarray(rep.amp, dtype=np.float64)
    low = _kernels.ladder_exp(amp, complex(A))
    up = _kernels.ladder_exp(amp, complex(C)).T
    sz = rep.sz_diag
    diag = np.exp(-2.0 * sz * math.log(abs(delta)) - 2j * sz * arg)
    with np.errstate(over="ignore", invalid="ignore"):
        out = low @ (diag[:, None] * up)
    if not np.all(np.isfinite(out)):
        raise NumericError("lifted evolution overflowed double precision", dim=rep.dim,
                           A=abs(A), C=abs(C))
    return out


def evolve_analytic(params: ModelParams, eta_sol: EtaSolution, t: float, rep: TruncatedRep,
                    method: str = "group", pad="auto") -> np.ndarray:
    """``U(t,0)`` from the closed form."""
    if method == "group":
        g, arg = defining_rep_evolution(params, eta_sol, t)
        return lift(g, arg, rep)
    if method != "product":
        raise ValueError(f"unknown method {method!r}")
    work = padded_rep(rep, eta_sol.eta, rep.dim, pad, leak=exact.product_leak_log)
    eps = epsilon_value(params, eta_sol, t)

    def run(bits):
        with exact.working_precision(bits):
            x = exact.ExactRep(work)
            U = _exact_u(x, params, eta_sol, t, eps)
            vals, rad = exact.to_numpy(exact.block(U, rep.dim))
            return vals, rad / max(np.abs(vals).max(), 1.0)

    return exact.certified(run, exact.bits_for(work, eta_sol.eta, 2))


def _exact_u(x: exact.ExactRep, params, eta_sol, t, eps, sign=-1):
    e = exact.arb_real(eta_sol.eta)
    w = exact.arb_real(params.omega)
    return x.r(e, w * exact.arb_real(t)) * x.phase_matrix(exact.arb_real(eps), sign) * x.r_inv(e, exact.arb_real(0.0))


# ---------------------------------------------------------------------------
# numeric oracle
# ---------------------------------------------------------------------------

def _check_steps(norm_bound: float, t: float, steps: int):
    if steps < 1:
        raise DomainError("step_count must be positive")
    dt = abs(t) / steps
    if norm_bound * dt > STABILITY_LIMIT:
        suggested = int(math.ceil(abs(t) * norm_bound / (0.5 * STABILITY_LIMIT)))
        raise StabilityError(f"step {dt:.3g} too coarse for |H| ~ {norm_bound:.3g}", suggested)


def evolve_numeric(params: ModelParams, t: float, rep: TruncatedRep, step_count: int,
                   method: str = "group") -> np.ndarray:
    """RK4 solution of ``i dU/dt = H(t) U``, ``U(0) = 1``, with ``step_count`` steps."""
    if t < 0:
        raise DomainError("t must be non-negative")
    if method == "group":
        _check_steps(math.hypot(0.5 * params.Omega, params.G), t, step_count)
        if t == 0:
            return np.eye(rep.dim, dtype=np.complex128)
        g, args = _kernels.rk4_group(float(params.Omega), float(params.G), float(params.omega),
                                     np.array([float(t)]), step_count / t)
        return lift(g[0], float(args[0]), rep)
    if method != "truncated":
        raise ValueError(f"unknown method {method!r}")
    bound = abs(params.Omega) * rep.sz_diag[-1] + 2.0 * abs(params.G) * (rep.amp.max() if rep.amp.size else 0.0)
    _check_steps(bound, t, step_count)
    U = _kernels.rk4_truncated(np.ascontiguousarray(rep.sz_diag), np.ascontiguousarray(rep.amp),
                               float(params.Omega), float(params.G), float(params.omega),
                               float(t), int(step_count))
    if not np.all(np.isfinite(U)):
        raise NumericError("truncated RK4 overflowed", dim=rep.dim, steps=step_count)
    return U


# ---------------------------------------------------------------------------
# inverse, adjoint, metric conservation
# ---------------------------------------------------------------------------

def inverse_and_adjoint(U: np.ndarray | None, params: ModelParams, eta_sol: EtaSolution, t: float,
                        rep: TruncatedRep) -> tuple[np.ndarray, np.ndarray]:
    """``R(0) e^{i eps Sz} R^-1(t)`` and ``R^-1(0) e^{i eps Sz} R(t)``.

    ``U`` is only used to validate the shape.
    """
    if U is not None and np.shape(U) != (rep.dim, rep.dim):
        raise ShapeError(f"U has shape {np.shape(U)}, expected {(rep.dim, rep.dim)}")
    eps = epsilon_value(params, eta_sol, t)

    def run(bits):
        with exact.working_precision(bits):
            x = exact.ExactRep(rep)
            e = exact.arb_real(eta_sol.eta)
            ph_t = exact.arb_real(params.omega) * exact.arb_real(t)
            zero = exact.arb_real(0.0)
            E = x.phase_matrix(exact.arb_real(eps), 1)
            inv, r1 = exact.to_numpy(x.r(e, zero) * E * x.r_inv(e, ph_t))
            adj, r2 = exact.to_numpy(x.r_inv(e, zero) * E * x.r(e, ph_t))
            s = max(np.abs(inv).max(), np.abs(adj).max(), 1.0)
            return (inv, adj), max(r1, r2) / s

    return exact.certified(run, exact.bits_for(rep, eta_sol.eta, 2))


def inverse_residual(params: ModelParams, eta_sol: EtaSolution, t: float, rep: TruncatedRep,
                     interior: int | None = None) -> float:
    """``max|U Uinv - 1|`` on the leading block, in ball arithmetic."""
    n = rep.dim // 2 if interior is None else int(interior)
    eps = epsilon_value(params, eta_sol, t)

    def run(bits):
        with exact.working_precision(bits):
            x = exact.ExactRep(rep)
            e = exact.arb_real(eta_sol.eta)
            ph_t = exact.arb_real(params.omega) * exact.arb_real(t)
            zero = exact.arb_real(0.0)
            U = _exact_u(x, params, eta_sol, t, eps)
            Uinv = x.r(e, zero) * x.phase_matrix(exact.arb_real(eps), 1) * x.r_inv(e, ph_t)
            vals, rad = exact.to_numpy(exact.block(U * Uinv, n))
            return float(np.abs(vals - np.eye(n)).max()), rad

    return exact.certified(run, exact.bits_for(rep, eta_sol.eta, 2))


def metric_conservation_residual(params: ModelParams, eta_sol: EtaSolution, t: float,
                                 rep: TruncatedRep, interior: int | None = None) -> float:
    """``max|U^dagger chi(t) U - chi(0)|`` on the leading block."""
    n = rep.dim // 2 if interior is None else int(interior)
    eps = epsilon_value(params, eta_sol, t)

    def run(bits):
        with exact.working_precision(bits):
            x = exact.ExactRep(rep)
            e = exact.arb_real(eta_sol.eta)
            ph_t = exact.arb_real(params.omega) * exact.arb_real(t)
            zero = exact.arb_real(0.0)
            U = _exact_u(x, params, eta_sol, t, eps)
            Rt_inv = x.r_inv(e, ph_t)
            R0_inv = x.r_inv(e, zero)
            lhs = exact.dagger(U) * (Rt_inv * Rt_inv) * U
            diff, rad = exact.to_numpy(exact.block(lhs - R0_inv * R0_inv, n))
            return float(np.abs(diff).max()), rad

    return exact.certified(run, exact.bits_for(rep, eta_sol.eta, 4))


def non_unitarity(U: np.ndarray, interior: int | None = None) -> float:
    """``max|U^dagger U - 1|`` on the leading block."""
    U = np.asarray(U)
    n = U.shape[0] // 2 if interior is None else int(interior)
    G = U.conj().T @ U
    return float(np.abs(G[:n, :n] - np.eye(n)).max())


def floquet_moduli(params: ModelParams, eta_sol: EtaSolution, rep: TruncatedRep) -> np.ndarray:
    """Moduli of the eigenvalues of the one-period ``R(0) e^{-i eps(T) Sz} R^-1(0)``.

    Computed with certified ball-arithmetic eigenvalues; returned sorted.
    """
    if params.omega == 0:
        raise DomainError("omega = 0 has no driving period")
    T = abs(params.period)
    eps = epsilon_value(params, eta_sol, T)

    def run(bits):
        with exact.working_precision(bits):
            x = exact.ExactRep(rep)
            U = _exact_u(x, params, eta_sol, T, eps)
            try:
                ev = U.eig()
            except (ValueError, ArithmeticError):
                return None, float("inf")
            mods = [abs(complex(z.mid())) for z in ev]
            rad = max(float(z.real.rad()) + float(z.imag.rad()) for z in ev)
            return np.sort(np.array(mods)), rad

    return exact.certified(run, exact.bits_for(rep, eta_sol.eta, 2))


# ---------------------------------------------------------------------------
# states and trajectories
# ---------------------------------------------------------------------------

class Normalization(enum.Enum):
    RAW = "raw"
    METRIC_NORMALIZED = "metric"


class Method(enum.Enum):
    ANALYTIC = "analytic"
    NUMERIC = "numeric"


@dataclass(frozen=True, eq=False)
class StateVector:
    entries: np.ndarray
    t: float = 0.0
    normalization: Normalization = Normalization.RAW

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=np.complex128).ravel()
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)


@dataclass(frozen=True)
class TrajectoryRecord:
    t: float
    metric_norm: float
    plain_norm: float
    energy: complex
    fidelity: float | None = None


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: list
    records: list = field(default_factory=list)


def _metric_stats(x, e, params, t, psi_acb):
    """Metric norm, plain norm and metric-weighted energy of one state."""
    phi = exact.arb_real(params.omega) * exact.arb_real(t)
    Ri = x.r_inv(e, phi)
    H = x.hamiltonian(exact.arb_real(params.Omega), exact.arb_real(params.G), phi)
    a = Ri * psi_acb
    b = Ri * (H * psi_acb)
    mnorm = (exact.dagger(a) * a)[0, 0]
    num = (exact.dagger(a) * b)[0, 0]
    pnorm = (exact.dagger(psi_acb) * psi_acb)[0, 0]
    return mnorm, pnorm, num / mnorm, a


def metric_normalize(psi: np.ndarray, params: ModelParams, eta_sol: EtaSolution, rep: TruncatedRep,
                     t: float = 0.0) -> StateVector:
    """Scale ``psi`` so that ``<psi|chi(t)|psi> = 1``."""
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    if psi.shape[0] != rep.dim:
        raise ShapeError(f"state length {psi.shape[0]} does not match dim={rep.dim}")

    def run(bits):
        with exact.working_precision(bits):
            x = exact.ExactRep(rep)
            e = exact.arb_real(eta_sol.eta)
            Ri = x.r_inv(e, exact.arb_real(params.omega) * exact.arb_real(t))
            a = Ri * exact.to_acb_mat(psi[:, None])
            return exact.scalar((exact.dagger(a) * a)[0, 0])

    norm = exact.certified(run, exact.bits_for(rep, eta_sol.eta))
    return StateVector(psi / math.sqrt(norm.real), t, Normalization.METRIC_NORMALIZED)


def evolve_state(psi0: StateVector, params: ModelParams, eta_sol: EtaSolution, times,
                 rep: TruncatedRep, method: Method | str = Method.ANALYTIC,
                 compare: bool = False, step_density: float = 20000 / (2 * math.pi)) -> Trajectory:
    """Evolve ``psi0`` to every time in ``times``.

    ``ANALYTIC`` applies the truncated ``R(t) e^{-i eps Sz} R^-1(0)`` in ball
    arithmetic, for which the metric norm is conserved identically.
    ``NUMERIC`` applies the lifted RK4 solution.  With ``compare=True`` both
    run and each record carries the fidelity ``|<psi_a|chi|psi_n>|``.
    """
    method = Method(method) if not isinstance(method, Method) else method
    times = np.asarray(times, dtype=float).ravel()
    if times.size == 0 or np.any(np.diff(times) <= 0) or times[0] < 0:
        raise DomainError("times must be non-negative and strictly increasing")
    psi = np.asarray(psi0.entries)
    if psi.shape[0] != rep.dim:
        raise ShapeError(f"state length {psi.shape[0]} does not match dim={rep.dim}")

    numeric_states = None
    if method is Method.NUMERIC or compare:
        g, args = _kernels.rk4_group(float(params.Omega), float(params.G), float(params.omega),
                                     times, float(step_density))
        numeric_states = [lift(g[i], float(args[i]), rep) @ psi for i in range(times.size)]

    states, records = [], []
    for i, t in enumerate(times):
        eps = epsilon_value(params, eta_sol, t)

        def run(bits, t=t, eps=eps, i=i):
            with exact.working_precision(bits):
                x = exact.ExactRep(rep)
                e = exact.arb_real(eta_sol.eta)
                p0 = exact.to_acb_mat(psi[:, None])
                if method is Method.ANALYTIC:
                    cur = _exact_u(x, params, eta_sol, t, eps) * p0
                else:
                    cur = exact.to_acb_mat(numeric_states[i][:, None])
                mnorm, pnorm, energy, a = _metric_stats(x, e, params, t, cur)
                fid = None
                if compare:
                    other = (exact.to_acb_mat(numeric_states[i][:, None]) if method is Method.ANALYTIC
                             else _exact_u(x, params, eta_sol, t, eps) * p0)
                    phi = exact.arb_real(params.omega) * exact.arb_real(t)
                    b = x.r_inv(e, phi) * other
                    fid = abs(exact.scalar((exact.dagger(a) * b)[0, 0])[0])
                vec, rad = exact.to_numpy(cur)
                m, r1 = exact.scalar(mnorm)
                pn, r2 = exact.scalar(pnorm)
                en, r3 = exact.scalar(energy)
                scale = max(abs(m), 1.0)
                rec = TrajectoryRecord(float(t), m.real, pn.real, en, fid)
                return (vec.ravel(), rec), max(r1 / scale, r2 / max(abs(pn), 1.0), r3 / max(abs(en), 1.0))

        vec, rec = exact.certified(run, exact.bits_for(rep, eta_sol.eta, 2))
        states.append(StateVector(vec, float(t), psi0.normalization))
        records.append(rec)
    return Trajectory(times=times, states=states, records=records)
