import math
import os
import subprocess
import sys

import numpy as np
import pytest
import scipy.linalg

from su11pt import _kernels as K
from su11pt.algebra import Sector, build_rep


def _rel(a, b):
    return np.abs(a - b).max() / max(np.abs(a).max(), 1.0)


def test_ladder_exp_matches_expm():
    rep = build_rep(Sector.boson_even(), 12)
    z = 0.3 - 0.2j
    L = np.diag(rep.amp, -1).astype(complex)
    assert _rel(scipy.linalg.expm(z * L), K.ladder_exp_numpy(rep.amp, z)) <= 1e-14


def test_ladder_exp_backends_agree():
    rep = build_rep(Sector.boson_odd(), 40)
    for z in (0.0, 0.7j, -1.3 + 0.4j):
        assert _rel(K.ladder_exp_numpy(rep.amp, z), K._ladder_exp_jit(rep.amp, z)) <= 1e-14


def test_rk4_group_backends_agree():
    times = np.array([0.0, 0.5, 2.0, 6.0])
    a = K.rk4_group_numpy(1.0, 0.3, 5.0, times, 500.0)
    b = K._rk4_group_jit(1.0, 0.3, 5.0, times, 500.0)
    assert _rel(a[0], b[0]) <= 1e-14
    assert np.abs(a[1] - b[1]).max() <= 1e-12


def test_rk4_group_static_matches_expm():
    # omega = 0: h is constant and g(t) = exp(-i h t)
    h = np.array([[0.5, 0.3], [0.3, -0.5]], dtype=complex)
    g, _ = K.rk4_group(1.0, 0.3, 0.0, np.array([1.7]), 2000.0)
    assert np.abs(g[0] - scipy.linalg.expm(-1j * 1.7 * h)).max() <= 1e-12


def test_rk4_group_determinant_is_one():
    g, _ = K.rk4_group(1.0, 1.0, 0.2, np.array([10.0]), 400.0)
    assert abs(np.linalg.det(g[0]) - 1.0) <= 1e-10


def test_rk4_truncated_backends_agree():
    rep = build_rep(Sector.boson_even(), 16)
    args = (np.ascontiguousarray(rep.sz_diag), np.ascontiguousarray(rep.amp), 1.0, 0.3, 1.0, 1.0, 500)
    assert _rel(K.rk4_truncated_numpy(*args), K._rk4_truncated_jit(*args)) <= 1e-14


def test_simpson_exact_for_cubics():
    x = np.linspace(0.0, 2.0, 9)
    for f in (K.simpson_numpy, K._simpson_checked_jit):
        assert f(x ** 3 - x, 0.25) == pytest.approx(2.0, abs=1e-14)


def test_simpson_backends_agree():
    v = np.cos(np.linspace(0.0, math.pi, 1025))
    assert K.simpson_numpy(v, math.pi / 1024) == pytest.approx(K._simpson_checked_jit(v, math.pi / 1024), abs=1e-15)


@pytest.mark.parametrize("f", [K.simpson_numpy, K._simpson_checked_jit])
def test_simpson_rejects_odd_interval_count(f):
    with pytest.raises(ValueError):
        f(np.ones(4), 0.1)
    with pytest.raises(ValueError):
        f(np.ones(2), 0.1)


def test_public_names_follow_backend():
    if K.HAVE_NUMBA:
        assert K.BACKEND == "numba" and K.rk4_group is K._rk4_group_jit
    else:
        assert K.BACKEND == "numpy" and K.rk4_group is K.rk4_group_numpy


def test_disable_flag_selects_numpy():
    env = dict(os.environ, SU11PT_DISABLE_NUMBA="1")
    code = ("from su11pt import _kernels as K; "
            "assert K.BACKEND == 'numpy' and K.ladder_exp is K.ladder_exp_numpy; print(K.BACKEND)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, timeout=120)
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "numpy"
