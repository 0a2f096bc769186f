import os
import subprocess
import sys

import numpy as np
import pytest

from qcorr import kernels
from qcorr._accel import HAS_NUMBA, njit, set_threads
from qcorr.measures import sphere_grid
from qcorr.states import random_mixed

needs_numba = pytest.mark.skipif(not HAS_NUMBA, reason="numba path disabled")


def _direct_disturbance(rho, d, n):
    ns = sum(c * s for c, s in zip(n, (np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1]))))
    out = np.zeros_like(rho)
    for sgn in (1, -1):
        p = np.kron((np.eye(2) + sgn * ns) / 2, np.eye(d))
        out = out + p @ rho @ p
    return np.sum(np.abs(rho - out) ** 2)


@pytest.mark.parametrize("d", [2, 3])
def test_numpy_disturbance_matches_direct_projection(d):
    rho = random_mixed(d, seed=d).matrix
    grid = sphere_grid(7)
    vals = kernels.measurement_disturbance(rho, d, grid, use_jit=False)
    for n, v in zip(grid, vals):
        assert v == pytest.approx(_direct_disturbance(rho, d, n), abs=1e-14)


@needs_numba
@pytest.mark.parametrize("d", [2, 3, 4])
def test_disturbance_paths_agree(d):
    rho = random_mixed(d, seed=10 + d).matrix
    grid = sphere_grid(25)
    a = kernels.measurement_disturbance(rho, d, grid, use_jit=False)
    b = kernels.measurement_disturbance(rho, d, grid, use_jit=True)
    assert np.abs(a - b).max() < 1e-14


def _physical_s(n, seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, 3, 4))
    return g @ g.transpose(0, 2, 1) / 16


@needs_numba
def test_closed_form_paths_agree():
    s = _physical_s(5000, 1)
    s[:5] = np.eye(3) * 0.05  # degenerate branch
    args = kernels.deviator_traces(s)
    for a, b in zip(kernels.closed_form_measures(*args, use_jit=False), kernels.closed_form_measures(*args, use_jit=True)):
        assert np.abs(a - b).max() < 1e-12


def test_closed_form_degenerate_branch():
    d_g, q, theta = kernels.closed_form_measures(*kernels.deviator_traces(np.eye(3) * 0.2), use_jit=False)
    assert theta[0] == 0.0
    assert d_g[0] == pytest.approx(0.8) and q[0] == pytest.approx(0.8)


def test_deviator_traces_stacked():
    s = _physical_s(4, 2)
    tr1, dev2, dev3 = kernels.deviator_traces(s)
    for i in range(4):
        b = s[i] - np.trace(s[i]) / 3 * np.eye(3)
        assert dev2[i] == pytest.approx(np.trace(b @ b))
        assert dev3[i] == pytest.approx(np.trace(b @ b @ b))


def test_njit_decorator_forms():
    @njit
    def f(x):
        return x + 1

    @njit(cache=False)
    def g(x):
        return x * 2

    assert f(1) == 2 and g(2) == 4


def test_set_threads_validation():
    with pytest.raises(ValueError):
        set_threads(0)
    set_threads(1)


def test_env_flag_disables_jit():
    env = dict(os.environ, QCORR_DISABLE_JIT="1")
    out = subprocess.run(
        [sys.executable, "-c", "from qcorr._accel import HAS_NUMBA; print(HAS_NUMBA)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "False"
