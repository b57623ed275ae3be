"""Bi-orthogonal eigenbases of I(t) and I(t)^dagger and the metric operator.

``kets`` holds the columns ``R(t)|n>`` and ``bras`` the columns ``R^-1(t)|n>``;
bras are stored unconjugated and every check conjugate-transposes explicitly.
The double-precision matrices are rounded from certified ball-arithmetic
values.  The residual checks themselves run in ball arithmetic, because the
entries of R and R^-1 at the top of the truncated basis exceed the interior
entries by many orders of magnitude and a double-precision product would be
dominated by rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from flint import acb

from . import exact
from .algebra import TruncatedRep
from .errors import ShapeError
from .invariant import EtaSolution, invariant_closed, padded_rep
from .model import ModelParams


@dataclass(frozen=True, eq=False)
class BiBasis:
    kets: np.ndarray
    bras: np.ndarray
    t: float


@dataclass(frozen=True, eq=False)
class Metric:
    chi: np.ndarray
    t: float


def _pair(eta_sol: EtaSolution, params: ModelParams, t: float, rep: TruncatedRep, pairs=1):
    def run(bits):
        with exact.working_precision(bits):
            x = exact.ExactRep(rep)
            e = exact.arb_real(eta_sol.eta)
            phi = exact.arb_real(params.omega) * exact.arb_real(t)
            R, Ri = exact.to_numpy(x.r(e, phi)), exact.to_numpy(x.r_inv(e, phi))
            rad = max(R[1] / max(np.abs(R[0]).max(), 1.0), Ri[1] / max(np.abs(Ri[0]).max(), 1.0))
            return (R[0], Ri[0]), rad

    return exact.certified(run, exact.bits_for(rep, eta_sol.eta, pairs))


def build_bibasis(eta_sol: EtaSolution, params: ModelParams, t: float, rep: TruncatedRep) -> BiBasis:
    R, Rinv = _pair(eta_sol, params, t, rep)
    return BiBasis(kets=R, bras=Rinv, t=t)


def build_metric(eta_sol: EtaSolution, params: ModelParams, t: float, rep: TruncatedRep) -> Metric:
    """``chi = (R^-1)^2`` rounded from a certified product."""

    def run(bits):
        with exact.working_precision(bits):
            x = exact.ExactRep(rep)
            e = exact.arb_real(eta_sol.eta)
            phi = exact.arb_real(params.omega) * exact.arb_real(t)
            Ri = x.r_inv(e, phi)
            chi, rad = exact.to_numpy(Ri * Ri)
            return chi, rad / max(np.abs(chi).max(), 1.0)

    chi = exact.certified(run, exact.bits_for(rep, eta_sol.eta, 2))
    return Metric(chi=chi, t=t)


def inner_product(phi: np.ndarray, psi: np.ndarray, metric: Metric | np.ndarray | None = None) -> complex:
    """``<phi| chi |psi>``, conjugate-linear in ``phi``."""
    phi = np.asarray(phi, dtype=np.complex128).ravel()
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    if phi.shape != psi.shape:
        raise ShapeError(f"state lengths differ: {phi.shape[0]} vs {psi.shape[0]}")
    if metric is None:
        return complex(np.vdot(phi, psi))
    chi = metric.chi if isinstance(metric, Metric) else np.asarray(metric)
    if chi.shape != (phi.shape[0], phi.shape[0]):
        raise ShapeError(f"metric shape {chi.shape} does not match state length {phi.shape[0]}")
    return complex(np.vdot(phi, chi @ psi))


# ---------------------------------------------------------------------------
# certified residuals
# ---------------------------------------------------------------------------

def _certify(rep, eta, body, pairs=1):
    def run(bits):
        with exact.working_precision(bits):
            x = exact.ExactRep(rep)
            return body(x, bits)

    return exact.certified(run, exact.bits_for(rep, eta, pairs))


def _frame(x, eta_sol, params, t):
    e = exact.arb_real(eta_sol.eta)
    phi = exact.arb_real(params.omega) * exact.arb_real(t)
    return x.r(e, phi), x.r_inv(e, phi)


def _dist_to_identity(m, n):
    vals, rad = exact.to_numpy(exact.block(m, n))
    return float(np.abs(vals - np.eye(n)).max()), rad


def biorthogonality_residual(eta_sol, params, t, rep, interior=None) -> float:
    """``max|bras^dagger kets - 1|`` on the leading block."""
    n = rep.dim // 2 if interior is None else int(interior)

    def body(x, bits):
        R, Ri = _frame(x, eta_sol, params, t)
        return _dist_to_identity(exact.dagger(Ri) * R, n)

    return _certify(rep, eta_sol.eta, body)


def completeness_residual(eta_sol, params, t, rep, interior=None) -> float:
    """``max|kets bras^dagger - 1|`` on the leading block."""
    n = rep.dim // 2 if interior is None else int(interior)

    def body(x, bits):
        R, Ri = _frame(x, eta_sol, params, t)
        return _dist_to_identity(R * exact.dagger(Ri), n)

    return _certify(rep, eta_sol.eta, body)


def metric_gram_residual(eta_sol, params, t, rep, interior=None) -> float:
    """``max|kets^dagger chi kets - 1|``: the metric inner product of basis kets."""
    n = rep.dim // 2 if interior is None else int(interior)

    def body(x, bits):
        R, Ri = _frame(x, eta_sol, params, t)
        return _dist_to_identity(exact.dagger(R) * (Ri * Ri) * R, n)

    return _certify(rep, eta_sol.eta, body, pairs=2)


def metric_bra_residual(eta_sol, params, t, rep, interior=None) -> float:
    """``max|chi kets - bras|`` on the leading columns, relative to ``max|bras|``."""
    n = rep.dim // 2 if interior is None else int(interior)

    def body(x, bits):
        R, Ri = _frame(x, eta_sol, params, t)
        diff, rad = exact.to_numpy(exact.submatrix(Ri * Ri * R - Ri, rep.dim, n))
        scale, _ = exact.to_numpy(exact.submatrix(Ri, rep.dim, n))
        s = max(np.abs(scale).max(), 1.0)
        return float(np.abs(diff).max()) / s, rad / s

    return _certify(rep, eta_sol.eta, body, pairs=2)


def metric_hermiticity_residual(eta_sol, params, t, rep) -> float:
    """``max|chi - chi^dagger|`` relative to ``max|chi|``, whole matrix."""

    def body(x, bits):
        R, Ri = _frame(x, eta_sol, params, t)
        chi = Ri * Ri
        diff, rad = exact.to_numpy(chi - exact.dagger(chi))
        vals, _ = exact.to_numpy(chi)
        s = max(np.abs(vals).max(), 1.0)
        return float(np.abs(diff).max()) / s, rad / s

    return _certify(rep, eta_sol.eta, body, pairs=2)


def metric_min_pivot(eta_sol, params, t, rep) -> float:
    """Smallest pivot of the Hermitian ``LDL^dagger`` factorization of ``chi``.

    Pivots are computed in ball arithmetic; a positive return value whose ball
    excludes zero certifies that ``chi`` is positive definite.  ``-inf`` means
    a pivot is certainly negative; an undecided sign raises the precision.
    """

    def body(x, bits):
        _, Ri = _frame(x, eta_sol, params, t)
        chi = Ri * Ri
        d = rep.dim
        a = [[chi[i, j] for j in range(d)] for i in range(d)]
        smallest = None
        for k in range(d):
            p = a[k][k].real
            if p < 0:
                return float("-inf"), 0.0
            if not p > 0:
                return 0.0, float("inf")  # undecided at this precision
            mid = float(p.mid())
            smallest = mid if smallest is None else min(smallest, mid)
            for i in range(k + 1, d):
                f = a[i][k] / p
                if f == 0:
                    continue
                row_k = a[k]
                row_i = a[i]
                for j in range(k + 1, d):
                    row_i[j] -= f * row_k[j]
        return smallest, 0.0

    return _certify(rep, eta_sol.eta, body, pairs=2)


def eigen_relation_residual(eta_sol, params, t, rep, interior=None, pad="auto") -> tuple[float, float]:
    """``(max|I ket_n - k_n ket_n|, max|I^dagger bra_n - k_n bra_n|)``.

    Rows and columns are restricted to the leading block.  ``I`` is the closed
    form.  The bra relation involves the truncated inverse and is evaluated on
    a padded working space.
    """
    n = rep.dim // 2 if interior is None else int(interior)
    work = padded_rep(rep, eta_sol.eta, n, pad)

    def body(x, bits):
        e = exact.arb_real(eta_sol.eta)
        phi = exact.arb_real(params.omega) * exact.arb_real(t)
        ph = exact.expi(phi)
        I = e.cos() * x.Sz - (e.sin() / 2) * (x.Sp * ph - x.Sm * ph.conjugate())
        Idag = exact.dagger(I)
        cols = x.r_columns(e, phi, n)
        kdiag = x.Sz  # k_n of sector state m is the Sz eigenvalue
        Rinv = x.r_inv(e, phi)
        bras = exact.submatrix(Rinv, work.dim, n)
        kz = exact.submatrix(kdiag, n, n)
        r1, rad1 = exact.to_numpy(exact.submatrix(I * cols - cols * kz, n, n))
        r2, rad2 = exact.to_numpy(exact.submatrix(Idag * bras - bras * kz, n, n))
        return (float(np.abs(r1).max()), float(np.abs(r2).max())), max(rad1, rad2)

    return _certify(work, eta_sol.eta, body)


def pseudo_hermiticity_residual(eta_sol, params, t, rep, interior=None) -> float:
    """``max|chi I chi^-1 - I_closed^dagger|`` on the leading block.

    ``I`` is taken as the truncated ``R Sz R^-1`` and ``chi^-1 = R^2``.
    """
    n = rep.dim // 2 if interior is None else int(interior)
    closed = invariant_closed(eta_sol, t, rep).conj().T

    def body(x, bits):
        R, Ri = _frame(x, eta_sol, params, t)
        I = R * x.Sz * Ri
        m = (Ri * Ri) * I * (R * R)
        vals, rad = exact.to_numpy(exact.block(m, n))
        return float(np.abs(vals - closed[:n, :n]).max()), rad

    return _certify(rep, eta_sol.eta, body, pairs=3)


def ket_norms(basis: BiBasis, count: int) -> np.ndarray:
    """Plain norms ``<ket_n|ket_n>`` of the first ``count`` kets."""
    k = basis.kets[:, :count]
    return np.einsum("ij,ij->j", k.conj(), k).real
