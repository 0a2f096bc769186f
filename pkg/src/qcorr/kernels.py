"""Hot numeric kernels, each with a numba path and a pure-numpy path.

``use_jit=None`` selects numba whenever :data:`qcorr._accel.HAS_NUMBA` is set.
Both paths must agree to rounding; ``tests/test_kernels.py`` checks that and
``benchmarks/bench_kernels.py`` times them against each other.
"""
import numpy as np

from qcorr._accel import HAS_NUMBA, njit, prange

# radicand 6Tr[S^2] - 2Tr[S]^2 below this is treated as a triple root
DEGENERATE_EPS = 1e-12


def _projector_tensor(nvecs):
    """K[m, a, b, c, e] = sum_pm p_ac p_eb for the two projectors (I +- n.sigma)/2."""
    nx, ny, nz = nvecs[:, 0], nvecs[:, 1], nvecs[:, 2]
    m = len(nvecs)
    p = np.empty((m, 2, 2, 2), dtype=np.complex128)
    for k, sgn in enumerate((1.0, -1.0)):
        p[:, k, 0, 0] = 0.5 * (1 + sgn * nz)
        p[:, k, 1, 1] = 0.5 * (1 - sgn * nz)
        p[:, k, 0, 1] = 0.5 * sgn * (nx - 1j * ny)
        p[:, k, 1, 0] = 0.5 * sgn * (nx + 1j * ny)
    return np.einsum("mkac,mkeb->mabce", p, p)


def _disturbance_np(blocks, nvecs):
    kern = _projector_tensor(nvecs)
    projected = np.einsum("mabce,ceij->mabij", kern, blocks)
    diff = blocks[None] - projected
    return np.sum(diff.real**2 + diff.imag**2, axis=(1, 2, 3, 4))


@njit(parallel=True)
def _disturbance_jit(blocks, nvecs):
    m = nvecs.shape[0]
    d = blocks.shape[2]
    out = np.empty(m)
    for k in prange(m):
        nx = nvecs[k, 0]
        ny = nvecs[k, 1]
        nz = nvecs[k, 2]
        kern = np.zeros((2, 2, 2, 2), dtype=np.complex128)
        for s in range(2):
            sgn = 1.0 if s == 0 else -1.0
            p = np.empty((2, 2), dtype=np.complex128)
            p[0, 0] = 0.5 * (1.0 + sgn * nz)
            p[1, 1] = 0.5 * (1.0 - sgn * nz)
            p[0, 1] = 0.5 * sgn * (nx - 1j * ny)
            p[1, 0] = 0.5 * sgn * (nx + 1j * ny)
            for a in range(2):
                for b in range(2):
                    for c in range(2):
                        for e in range(2):
                            kern[a, b, c, e] += p[a, c] * p[e, b]
        acc = 0.0
        for a in range(2):
            for b in range(2):
                for i in range(d):
                    for j in range(d):
                        v = blocks[a, b, i, j]
                        for c in range(2):
                            for e in range(2):
                                v -= kern[a, b, c, e] * blocks[c, e, i, j]
                        acc += v.real * v.real + v.imag * v.imag
        out[k] = acc
    return out


def measurement_disturbance(rho, dim_b, nvecs, use_jit=None):
    """Squared HS distance ``||rho - Pi_n(rho)||_2^2`` for each unit vector in ``nvecs``.

    ``Pi_n`` is the nonselective projective measurement of Alice's qubit along
    ``n``; ``rho`` is a ``(2*dim_b, 2*dim_b)`` matrix with Alice as the slow index.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    nvecs = np.ascontiguousarray(np.atleast_2d(nvecs), dtype=np.float64)
    blocks = np.ascontiguousarray(rho.reshape(2, dim_b, 2, dim_b).transpose(0, 2, 1, 3))
    if use_jit is None:
        use_jit = HAS_NUMBA
    if use_jit and HAS_NUMBA:
        return _disturbance_jit(blocks, nvecs)
    return _disturbance_np(blocks, nvecs)


def deviator_traces(s):
    """(Tr[S], Tr[B^2], Tr[B^3]) with ``B = S - Tr[S]/3 I``, for one or a stack of 3x3 matrices.

    Working with the traceless part keeps the cubic's angle accurate when the
    eigenvalues of S nearly coincide.
    """
    s = np.asarray(s, dtype=np.float64)
    tr1 = np.trace(s, axis1=-2, axis2=-1)
    b = s - (tr1 / 3.0)[..., None, None] * np.eye(3)
    b2m = b @ b
    dev2 = np.einsum("...ii->...", b2m)
    dev3 = np.einsum("...ij,...ji->...", b2m, b)
    return tr1, dev2, dev3


def _closed_form_np(tr1, dev2, dev3):
    rad = 6.0 * dev2
    degenerate = rad < DEGENERATE_EPS
    safe = np.where(degenerate, 1.0, dev2)
    arg = np.sqrt(6.0) * dev3 / safe**1.5
    theta = np.where(degenerate, 0.0, np.arccos(np.clip(arg, -1.0, 1.0)))
    root = np.where(degenerate, 0.0, np.sqrt(np.maximum(rad, 0.0)))
    d_g = (2.0 / 3.0) * (2.0 * tr1 - root * np.cos(theta / 3.0))
    q = (2.0 / 3.0) * (2.0 * tr1 - root)
    return d_g, q, theta


@njit(parallel=True)
def _closed_form_jit(tr1, dev2, dev3):
    n = tr1.shape[0]
    d_g = np.empty(n)
    q = np.empty(n)
    theta = np.empty(n)
    for i in prange(n):
        rad = 6.0 * dev2[i]
        if rad < DEGENERATE_EPS:
            th = 0.0
            root = 0.0
        else:
            arg = np.sqrt(6.0) * dev3[i] / dev2[i] ** 1.5
            arg = min(1.0, max(-1.0, arg))
            th = np.arccos(arg)
            root = np.sqrt(rad)
        theta[i] = th
        d_g[i] = (2.0 / 3.0) * (2.0 * tr1[i] - root * np.cos(th / 3.0))
        q[i] = (2.0 / 3.0) * (2.0 * tr1[i] - root)
    return d_g, q, theta


def closed_form_measures(tr1, dev2, dev3, use_jit=None):
    """Vectorised (D_G, Q, theta) from :func:`deviator_traces` output.

    ``6 dev2`` equals ``6Tr[S^2] - 2Tr[S]^2`` and ``sqrt(6) dev3 / dev2^1.5``
    is the arccos argument written with the power traces of S.
    """
    tr1 = np.ascontiguousarray(np.atleast_1d(tr1), dtype=np.float64)
    dev2 = np.ascontiguousarray(np.atleast_1d(dev2), dtype=np.float64)
    dev3 = np.ascontiguousarray(np.atleast_1d(dev3), dtype=np.float64)
    if use_jit is None:
        use_jit = HAS_NUMBA
    if use_jit and HAS_NUMBA:
        return _closed_form_jit(tr1, dev2, dev3)
    return _closed_form_np(tr1, dev2, dev3)
