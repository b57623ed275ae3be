"""Double-precision hot loops, compiled with numba when available.

Every kernel exists twice: a plain numpy/python version and an ``@njit``
version with identical semantics.  ``SU11PT_DISABLE_NUMBA=1`` (or a missing
numba install) selects the numpy path at import time.  The public names at the
bottom of the module point at whichever implementation is active.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("SU11PT_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:  # pragma: no cover - exercised implicitly
    if _DISABLED:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


# ---------------------------------------------------------------------------
# exp(z * L) for a strictly lower-bidiagonal L with subdiagonal ``amp``
# ---------------------------------------------------------------------------

def ladder_exp_numpy(amp, z):
    """Exact exponential of ``z * L`` where ``L[i+1, i] = amp[i]``.

    ``L`` is nilpotent, so the series terminates and each entry is a single
    product: ``E[b+p, b] = z**p / p! * amp[b] * ... * amp[b+p-1]``.
    """
    dim = amp.shape[0] + 1
    out = np.zeros((dim, dim), dtype=np.complex128)
    for b in range(dim):
        p = np.arange(1, dim - b)
        steps = z * amp[b:dim - 1] / p
        out[b, b] = 1.0
        out[b + 1:, b] = np.cumprod(steps)
    return out


@njit(cache=True)
def _ladder_exp_jit(amp, z):
    dim = amp.shape[0] + 1
    out = np.zeros((dim, dim), dtype=np.complex128)
    for b in range(dim):
        v = 1.0 + 0.0j
        out[b, b] = v
        for p in range(1, dim - b):
            v = v * z * amp[b + p - 1] / p
            out[b + p, b] = v
    return out


# ---------------------------------------------------------------------------
# RK4 for i dU/dt = H(t) U in the truncated basis (tridiagonal H)
# ---------------------------------------------------------------------------

def _tridiag_apply_numpy(sz, amp, Omega, G, phase, M):
    # H = Omega*Sz + G*(Sp*phase - Sm*conj(phase)); Sp has subdiagonal amp
    out = Omega * sz[:, None] * M
    out[1:] += G * phase * amp[:, None] * M[:-1]
    out[:-1] -= G * np.conj(phase) * amp[:, None] * M[1:]
    return out


def rk4_truncated_numpy(sz, amp, Omega, G, omega, t_final, steps):
    dim = sz.shape[0]
    U = np.eye(dim, dtype=np.complex128)
    h = t_final / steps
    for s in range(steps):
        t = s * h
        p0 = np.exp(1j * omega * t)
        p1 = np.exp(1j * omega * (t + 0.5 * h))
        p2 = np.exp(1j * omega * (t + h))
        k1 = -1j * _tridiag_apply_numpy(sz, amp, Omega, G, p0, U)
        k2 = -1j * _tridiag_apply_numpy(sz, amp, Omega, G, p1, U + 0.5 * h * k1)
        k3 = -1j * _tridiag_apply_numpy(sz, amp, Omega, G, p1, U + 0.5 * h * k2)
        k4 = -1j * _tridiag_apply_numpy(sz, amp, Omega, G, p2, U + h * k3)
        U = U + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return U


@njit(cache=True)
def _tridiag_apply_jit(sz, amp, Omega, G, phase, M, out):
    dim = sz.shape[0]
    cp = np.conj(phase)
    for i in range(dim):
        for j in range(dim):
            acc = Omega * sz[i] * M[i, j]
            if i > 0:
                acc += G * phase * amp[i - 1] * M[i - 1, j]
            if i < dim - 1:
                acc -= G * cp * amp[i] * M[i + 1, j]
            out[i, j] = -1j * acc


@njit(cache=True)
def _rk4_truncated_jit(sz, amp, Omega, G, omega, t_final, steps):
    dim = sz.shape[0]
    U = np.eye(dim, dtype=np.complex128)
    k1 = np.empty_like(U)
    k2 = np.empty_like(U)
    k3 = np.empty_like(U)
    k4 = np.empty_like(U)
    h = t_final / steps
    for s in range(steps):
        t = s * h
        p0 = np.exp(1j * omega * t)
        p1 = np.exp(1j * omega * (t + 0.5 * h))
        p2 = np.exp(1j * omega * (t + h))
        _tridiag_apply_jit(sz, amp, Omega, G, p0, U, k1)
        _tridiag_apply_jit(sz, amp, Omega, G, p1, U + 0.5 * h * k1, k2)
        _tridiag_apply_jit(sz, amp, Omega, G, p1, U + 0.5 * h * k2, k3)
        _tridiag_apply_jit(sz, amp, Omega, G, p2, U + h * k3, k4)
        U = U + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return U


# ---------------------------------------------------------------------------
# RK4 for the same equation in the two-dimensional defining representation
# ---------------------------------------------------------------------------
# Sz = diag(1/2, -1/2), Sp = [[0, 1], [0, 0]], Sm = [[0, 0], [-1, 0]] obey the
# same commutators as the oscillator generators, so the 2x2 solution g(t)
# determines U(t) in every representation.

def _h2(Omega, G, omega, t):
    ph = np.exp(1j * omega * t)
    return np.array([[0.5 * Omega, G * ph], [G * np.conj(ph), -0.5 * Omega]], dtype=np.complex128)


def rk4_group_numpy(Omega, G, omega, times, steps_per_unit_time):
    """Integrate ``i dg/dt = h(t) g`` and return ``g`` at every entry of ``times``.

    ``times`` must be non-decreasing and start at or after 0.  Each interval is
    split into ``ceil(len * steps_per_unit_time)`` equal steps (at least one).
    Also returns the continuously unwrapped argument of ``g[1, 1]``, which the
    representation lift needs to pick the branch of ``g[1, 1] ** (-2k)``.
    """
    out = np.empty((times.shape[0], 2, 2), dtype=np.complex128)
    args = np.empty(times.shape[0])
    g = np.eye(2, dtype=np.complex128)
    t = 0.0
    arg = 0.0
    for idx in range(times.shape[0]):
        span = times[idx] - t
        n = max(1, int(np.ceil(span * steps_per_unit_time - 1e-9))) if span > 0 else 0
        if n:
            h = span / n
            for _ in range(n):
                k1 = -1j * _h2(Omega, G, omega, t) @ g
                k2 = -1j * _h2(Omega, G, omega, t + 0.5 * h) @ (g + 0.5 * h * k1)
                k3 = -1j * _h2(Omega, G, omega, t + 0.5 * h) @ (g + 0.5 * h * k2)
                k4 = -1j * _h2(Omega, G, omega, t + h) @ (g + h * k3)
                g = g + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                t += h
                new = np.angle(g[1, 1])
                arg += (new - arg + np.pi) % (2 * np.pi) - np.pi
        t = times[idx]
        out[idx] = g
        args[idx] = arg
    return out, args


@njit(cache=True)
def _rk4_group_jit(Omega, G, omega, times, steps_per_unit_time):
    out = np.empty((times.shape[0], 2, 2), dtype=np.complex128)
    args = np.empty(times.shape[0])
    g00, g01, g10, g11 = 1.0 + 0j, 0.0j, 0.0j, 1.0 + 0j
    t = 0.0
    arg = 0.0
    twopi = 2.0 * np.pi
    for idx in range(times.shape[0]):
        span = times[idx] - t
        n = 0
        if span > 0:
            n = max(1, int(np.ceil(span * steps_per_unit_time - 1e-9)))
        if n > 0:
            h = span / n
            for _ in range(n):
                # stage coefficients: k = -i * h2(tt) @ g
                a = 0.5 * Omega
                ph0 = np.exp(1j * omega * t)
                ph1 = np.exp(1j * omega * (t + 0.5 * h))
                ph2 = np.exp(1j * omega * (t + h))
                b0, c0 = G * ph0, G * np.conj(ph0)
                b1, c1 = G * ph1, G * np.conj(ph1)
                b2, c2 = G * ph2, G * np.conj(ph2)

                k1_00 = -1j * (a * g00 + b0 * g10)
                k1_01 = -1j * (a * g01 + b0 * g11)
                k1_10 = -1j * (c0 * g00 - a * g10)
                k1_11 = -1j * (c0 * g01 - a * g11)

                x00 = g00 + 0.5 * h * k1_00
                x01 = g01 + 0.5 * h * k1_01
                x10 = g10 + 0.5 * h * k1_10
                x11 = g11 + 0.5 * h * k1_11
                k2_00 = -1j * (a * x00 + b1 * x10)
                k2_01 = -1j * (a * x01 + b1 * x11)
                k2_10 = -1j * (c1 * x00 - a * x10)
                k2_11 = -1j * (c1 * x01 - a * x11)

                x00 = g00 + 0.5 * h * k2_00
                x01 = g01 + 0.5 * h * k2_01
                x10 = g10 + 0.5 * h * k2_10
                x11 = g11 + 0.5 * h * k2_11
                k3_00 = -1j * (a * x00 + b1 * x10)
                k3_01 = -1j * (a * x01 + b1 * x11)
                k3_10 = -1j * (c1 * x00 - a * x10)
                k3_11 = -1j * (c1 * x01 - a * x11)

                x00 = g00 + h * k3_00
                x01 = g01 + h * k3_01
                x10 = g10 + h * k3_10
                x11 = g11 + h * k3_11
                k4_00 = -1j * (a * x00 + b2 * x10)
                k4_01 = -1j * (a * x01 + b2 * x11)
                k4_10 = -1j * (c2 * x00 - a * x10)
                k4_11 = -1j * (c2 * x01 - a * x11)

                w = h / 6.0
                g00 = g00 + w * (k1_00 + 2.0 * k2_00 + 2.0 * k3_00 + k4_00)
                g01 = g01 + w * (k1_01 + 2.0 * k2_01 + 2.0 * k3_01 + k4_01)
                g10 = g10 + w * (k1_10 + 2.0 * k2_10 + 2.0 * k3_10 + k4_10)
                g11 = g11 + w * (k1_11 + 2.0 * k2_11 + 2.0 * k3_11 + k4_11)
                t += h
                new = np.angle(g11)
                arg += (new - arg + np.pi) % twopi - np.pi
        t = times[idx]
        out[idx, 0, 0] = g00
        out[idx, 0, 1] = g01
        out[idx, 1, 0] = g10
        out[idx, 1, 1] = g11
        args[idx] = arg
    return out, args


# ---------------------------------------------------------------------------
# composite Simpson
# ---------------------------------------------------------------------------

def simpson_numpy(values, h):
    n = values.shape[0] - 1
    if n < 2 or n % 2:
        raise ValueError("composite Simpson needs an even number of intervals")
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return h / 3.0 * np.dot(w, values)


@njit(cache=True)
def _simpson_jit(values, h):
    n = values.shape[0] - 1
    acc = values[0] + values[n]
    for i in range(1, n):
        acc += (4.0 if i % 2 else 2.0) * values[i]
    return h / 3.0 * acc


def _simpson_checked_jit(values, h):
    n = values.shape[0] - 1
    if n < 2 or n % 2:
        raise ValueError("composite Simpson needs an even number of intervals")
    return _simpson_jit(values, h)


if HAVE_NUMBA:
    ladder_exp = _ladder_exp_jit
    rk4_truncated = _rk4_truncated_jit
    rk4_group = _rk4_group_jit
    simpson = _simpson_checked_jit
else:
    ladder_exp = ladder_exp_numpy
    rk4_truncated = rk4_truncated_numpy
    rk4_group = rk4_group_numpy
    simpson = simpson_numpy

BACKEND = "numba" if HAVE_NUMBA else "numpy"
