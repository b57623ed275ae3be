"""Ball-arithmetic evaluation of products involving R and its inverse.

R(t) is not a bounded operator: its matrix elements grow combinatorially with
the level index, and ``R^-1 M R`` is obtained from sums whose terms exceed the
result by tens to hundreds of decimal orders.  Double precision cannot resolve
those sums, so every oracle that multiplies R by R^-1 runs here, in Arb ball
arithmetic (python-flint) at a working precision chosen from the magnitudes of
the factors and then certified by the radii of the result.

Truncation convention.  With ``theta = eta/2`` the exponent factorizes as

    R = exp(A Sp) * cos(theta)^(-2 Sz) * exp(C Sm),
    A = e^{i phi} tan(theta),   C = e^{-i phi} tan(theta),

(the identity holds in the 2x2 defining representation, hence in every
representation).  ``exp(A Sp)`` only raises and ``exp(C Sm)`` only lowers, so
each factor restricted to the first ``dim`` states is exactly the restriction
of the infinite operator.  The truncated R^-1 is the exact inverse of the
product of truncated factors.  On this pair every algebraic identity of the
generators holds on the leading block; the only defect sits in the last row or
column, where ``[Sp, Sm] = -2 Sz`` is broken by truncation.
"""

from __future__ import annotations

import math
import threading
from contextlib import contextmanager

import flint
import numpy as np
from flint import acb, acb_mat, arb
from scipy.special import gammaln, logsumexp

from .algebra import TruncatedRep
from .errors import NumericError

_LOCK = threading.RLock()

MAX_BITS = 1 << 15
TARGET_RADIUS = 1e-24


@contextmanager
def working_precision(bits: int):
    """Serialize access to flint's global precision and restore it afterwards."""
    with _LOCK:
        old = flint.ctx.prec
        flint.ctx.prec = int(bits)
        try:
            yield
        finally:
            flint.ctx.prec = old


# ---------------------------------------------------------------------------
# conversions
# ---------------------------------------------------------------------------

def to_acb_mat(a: np.ndarray) -> acb_mat:
    """Exact conversion of a complex128 array (binary values are representable)."""
    a = np.asarray(a, dtype=np.complex128)
    rows, cols = a.shape
    return acb_mat(rows, cols, [acb(complex(v)) for v in a.ravel()])


def to_numpy(m: acb_mat) -> tuple[np.ndarray, float]:
    """Ball midpoints as complex128 and the largest radius."""
    rows, cols = m.nrows(), m.ncols()
    out = np.empty((rows, cols), dtype=np.complex128)
    rad = 0.0
    for i in range(rows):
        for j in range(cols):
            z = m[i, j]
            out[i, j] = complex(z.mid())
            r = float(z.real.rad()) + float(z.imag.rad())
            if r > rad:
                rad = r
    return out, rad


def scalar(z: acb) -> tuple[complex, float]:
    return complex(z.mid()), float(z.real.rad()) + float(z.imag.rad())


def block(m: acb_mat, n: int) -> acb_mat:
    out = acb_mat(n, n)
    for i in range(n):
        for j in range(n):
            out[i, j] = m[i, j]
    return out


def submatrix(m: acb_mat, rows: int, cols: int, row0: int = 0, col0: int = 0) -> acb_mat:
    out = acb_mat(rows, cols)
    for i in range(rows):
        for j in range(cols):
            out[i, j] = m[row0 + i, col0 + j]
    return out


def dagger(m: acb_mat) -> acb_mat:
    return m.conjugate().transpose()


def identity(n: int) -> acb_mat:
    return acb_mat(n, n, [acb(1) if i == j else acb(0) for i in range(n) for j in range(n)])


def diagonal(values) -> acb_mat:
    n = len(values)
    out = acb_mat(n, n)
    for i, v in enumerate(values):
        out[i, i] = v
    return out


def expi(x: arb) -> acb:
    return acb(x.cos(), x.sin())


# ---------------------------------------------------------------------------
# magnitude estimate used to pick the working precision
# ---------------------------------------------------------------------------

def log_magnitudes(rep: TruncatedRep, eta: float) -> tuple[float, float]:
    """Natural-log upper estimates of ``max|R_ij|`` and ``max|R^-1_ij|``."""
    dim = rep.dim
    th = 0.5 * eta
    lt = math.log(abs(math.tan(th))) if math.tan(th) != 0 else -np.inf
    lc = math.log(abs(math.cos(th)))
    cum = np.concatenate([[0.0], np.cumsum(np.log(rep.amp))])
    i = np.arange(dim)[:, None]
    b = np.arange(dim)[None, :]
    p = i - b
    with np.errstate(invalid="ignore", divide="ignore"):
        lower = np.where(p >= 0, np.where(p > 0, p * lt, 0.0) + cum[i] - cum[b] - gammaln(np.maximum(p, 0) + 1), -np.inf)
    logd = -2.0 * (rep.k + np.arange(dim)) * lc
    # R[i,j] = sum_b E[i,b] d_b E[j,b];  Rinv[i,j] = sum_b E[b,i] / d_b E[b,j]
    r = logsumexp(lower[:, None, :] + logd[None, None, :] + lower[None, :, :], axis=2)
    rinv = logsumexp(lower.T[:, None, :] - logd[None, None, :] + lower.T[None, :, :], axis=2)
    return float(np.max(r)), float(np.max(rinv))


def bits_for(rep: TruncatedRep, eta: float, pairs: int = 1) -> int:
    """Working precision for products containing ``pairs`` R/R^-1 pairs."""
    lr, lri = log_magnitudes(rep, eta)
    spread = max(0.0, lr) + max(0.0, lri)
    bits = int(pairs * spread / math.log(2)) + 96 + 4 * int(math.log2(rep.dim) + 1)
    return min(max(bits, 128), MAX_BITS)


def certified(fn, start_bits: int):
    """Run ``fn(bits)`` with doubling precision until its radius is small.

    ``fn`` must return ``(value, radius)``; the first result with
    ``radius <= TARGET_RADIUS`` is returned.
    """
    bits = start_bits
    while True:
        value, rad = fn(bits)
        if rad <= TARGET_RADIUS and np.all(np.isfinite(rad)):
            return value
        if bits >= MAX_BITS:
            raise NumericError("ball arithmetic did not reach the target radius",
                               bits=bits, radius=rad)
        bits = min(2 * bits, MAX_BITS)


# ---------------------------------------------------------------------------
# generators and R in ball arithmetic
# ---------------------------------------------------------------------------

class ExactRep:
    """Generators of a truncated representation as acb matrices.

    Must be created and used inside a single :func:`working_precision` block.
    """

    def __init__(self, rep: TruncatedRep):
        self.rep = rep
        self.dim = rep.dim
        self.k = arb(rep.k)
        self.amp = [((m + 1) * (m + 2 * self.k)).sqrt() for m in range(rep.dim - 1)]
        dim = rep.dim
        self.Sz = diagonal([self.k + m for m in range(dim)])
        self.Sp = acb_mat(dim, dim)
        for m, a in enumerate(self.amp):
            self.Sp[m + 1, m] = a
        self.Sm = self.Sp.transpose()

    def ladder_exp_up(self, z: acb) -> acb_mat:
        """``exp(z Sp)``; lower triangular and exact under truncation."""
        dim = self.dim
        out = acb_mat(dim, dim)
        for b in range(dim):
            v = acb(1)
            out[b, b] = v
            for p in range(1, dim - b):
                v = v * z * self.amp[b + p - 1] / p
                out[b + p, b] = v
        return out

    def ladder_exp_down(self, z: acb) -> acb_mat:
        """``exp(z Sm)``; the transpose of ``exp(z Sp)`` because Sm = Sp^T here."""
        return self.ladder_exp_up(z).transpose()

    def scaling(self, c: arb, power: int) -> acb_mat:
        """``c^(power*2*Sz)`` as a diagonal matrix (``c > 0``)."""
        logc = c.log()
        return diagonal([acb((power * 2 * (self.k + m) * logc).exp()) for m in range(self.dim)])

    def phase_matrix(self, phi: arb, sign: int = 1) -> acb_mat:
        """``exp(sign * i * phi * Sz)``."""
        return diagonal([expi(sign * phi * (self.k + m)) for m in range(self.dim)])

    def r_factors(self, eta: arb, phi: arb):
        th = eta / 2
        c = th.cos()
        if not c > 0:
            raise NumericError("cos(eta/2) must be positive for the factorized R", eta=float(eta.mid()))
        t = th.tan()
        A = expi(phi) * t
        C = expi(-phi) * t
        return A, C, c

    def r(self, eta: arb, phi: arb) -> acb_mat:
        A, C, c = self.r_factors(eta, phi)
        return self.ladder_exp_up(A) * self.scaling(c, -1) * self.ladder_exp_down(C)

    def r_inv(self, eta: arb, phi: arb) -> acb_mat:
        A, C, c = self.r_factors(eta, phi)
        return self.ladder_exp_down(-C) * self.scaling(c, 1) * self.ladder_exp_up(-A)

    def r_columns(self, eta: arb, phi: arb, ncols: int) -> acb_mat:
        """The first ``ncols`` columns of :meth:`r` at a cost of ``dim * ncols**2``."""
        A, C, c = self.r_factors(eta, phi)
        low = self.ladder_exp_up(A)
        up = self.ladder_exp_up(C)  # exp(C Sm) is its transpose
        scale = [(-2 * (self.k + m) * c.log()).exp() for m in range(ncols)]
        mid = acb_mat(ncols, ncols)
        for b in range(ncols):
            for j in range(b, ncols):
                mid[b, j] = scale[b] * up[j, b]
        return submatrix(low, self.dim, ncols) * mid

    def r_inv_rows(self, eta: arb, phi: arb, nrows: int) -> acb_mat:
        """The first ``nrows`` rows of :meth:`r_inv`."""
        A, C, c = self.r_factors(eta, phi)
        up = self.ladder_exp_up(-C)
        low = self.ladder_exp_up(-A)
        logc = c.log()
        scale = [(2 * (self.k + m) * logc).exp() for m in range(self.dim)]
        head = acb_mat(nrows, self.dim)
        for i in range(nrows):
            for b in range(i, self.dim):
                head[i, b] = up[b, i] * scale[b]
        return head * low

    def hamiltonian(self, Omega: arb, G: arb, phi: arb) -> acb_mat:
        e = expi(phi)
        return Omega * self.Sz + G * (self.Sp * e - self.Sm * e.conjugate())


def arb_real(x: float) -> arb:
    """Exact conversion of a double."""
    return arb(float(x))


# ---------------------------------------------------------------------------
# boundary leakage and working dimension
# ---------------------------------------------------------------------------
# Identities whose right-hand side contains Sm (e.g. R^-1 Sm R, R^-1 H R) pick
# up a term R^-1[i, d-1] * amp[d-1] * R[d, j] from the state just above the
# truncation.  Its size on the reported block decides how much room the
# working space needs beyond that block.

def _log_lower(k: float, eta: float, d: int) -> np.ndarray:
    """``log|exp(tan(eta/2) Sp)[i, b]|`` for ``0 <= b <= i < d``."""
    th = 0.5 * eta
    tn = abs(math.tan(th))
    lt = math.log(tn) if tn > 0 else -np.inf
    m = np.arange(d - 1, dtype=float)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * np.log((m + 1) * (m + 2 * k)))])
    i = np.arange(d)[:, None]
    b = np.arange(d)[None, :]
    p = i - b
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(p > 0, p * lt, 0.0) + cum[i] - cum[b] - gammaln(np.maximum(p, 0) + 1)
    return np.where(p >= 0, out, -np.inf)


def _log_row_of_r(k: float, eta: float, d: int, block: int):
    """``log|R[d, j]|`` of the infinite R for ``j < block``, plus helpers."""
    lc = math.log(abs(math.cos(0.5 * eta)))
    low = _log_lower(k, eta, d + 1)
    logd = -2.0 * (k + np.arange(d + 1)) * lc
    row = np.array([logsumexp(low[d, : j + 1] + logd[: j + 1] + low[j, : j + 1]) for j in range(block)])
    return row, low, logd


def boundary_leak_log(k: float, eta: float, d: int, block: int) -> float:
    """Natural-log bound on the leakage into the leading ``block`` at dimension ``d``.

    This is the size of the stray term in ``R^-1 Sm R``.
    """
    row, low, logd = _log_row_of_r(k, eta, d, block)
    # column d-1 of the truncated inverse: only b = d-1 contributes
    col = low[d - 1, :block] - logd[d - 1]
    amp = 0.5 * math.log(d * (d - 1 + 2 * k))
    return float(np.max(col) + amp + np.max(row))


def product_leak_log(k: float, eta: float, d: int, block: int) -> float:
    """Size of the first omitted term in ``R(t) D R^-1(0)`` on the leading ``block``.

    R is Hermitian and ``R^-1`` differs from R only in the sign of
    ``tan(eta/2)``, so both factors contribute ``max_j |R[d, j]|``.
    """
    row, _, _ = _log_row_of_r(k, eta, d, block)
    return float(2.0 * np.max(row))


def working_dim(rep: TruncatedRep, eta: float, block: int, tol: float = 1e-13,
                max_dim: int = 320, step: int = 16, leak=boundary_leak_log) -> tuple[int, bool]:
    """Smallest dimension ``>= rep.dim`` whose boundary leakage is below ``tol``.

    Returns ``(dim, converged)``.  When ``|tan(eta/2)| >= 1`` the leakage grows
    with the dimension, no truncation converges, and ``(rep.dim, False)`` is
    returned.
    """
    if abs(math.tan(0.5 * eta)) >= 1.0:
        return rep.dim, False
    target = math.log(tol)
    d = rep.dim
    while d <= max_dim:
        if leak(rep.k, eta, d, block) < target:
            return d, True
        d += step
    return rep.dim, False
