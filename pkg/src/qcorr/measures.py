"""Geometric discord, its observable lower bound Q, and negativity.

For a 2 x d state with Bloch-Fano data (x, t) the 3x3 matrix
``S = (x x^T + t t^T) / (2d)`` carries everything: ``D_G = 2 (Tr S - k_max)``.
The largest eigenvalue is taken from the trigonometric solution of the
characteristic cubic, so D_G becomes an explicit function of Tr[S], Tr[S^2]
and Tr[S^3]. Dropping the angle (theta = 0) gives Q, which needs only the
first two traces.
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from qcorr import kernels
from qcorr.corematrix import partial_transpose_a, trace_norm
from qcorr.kernels import DEGENERATE_EPS
from qcorr.states import PAULIS, DensityMatrix, bloch_fano_decompose, default_basis


@dataclass(frozen=True, eq=False)
class SMatrix:
    s: np.ndarray
    tr_s: float
    tr_s2: float
    tr_s3: float

    @classmethod
    def from_array(cls, s):
        s = np.asarray(s, dtype=float)
        s = 0.5 * (s + s.T)
        s2 = s @ s
        return cls(s, float(np.trace(s)), float(np.trace(s2)), float(np.sum(s2 * s.T)))


@dataclass(frozen=True)
class CubicSolution:
    """Coefficients and trigonometric roots of ``k^3 + a0 k^2 + a1 k + a2 = 0``."""

    a0: float
    a1: float
    a2: float
    q: float
    r: float
    theta: float
    k: tuple  # descending; k[0] is the alpha = 0 branch


@dataclass(frozen=True)
class CorrelationReport:
    d_g: float
    q: float
    theta: float
    negativity: float
    neg_sq: float
    tr_s: float
    tr_s2: float

    def as_dict(self):
        return dict(self.__dict__)


def s_matrix(bf):
    """``(x x^T + t t^T) / (2d)`` from a :class:`BlochFano` record."""
    if isinstance(bf, DensityMatrix):
        bf = bloch_fano_decompose(bf)
    x = np.asarray(bf.x, dtype=float)
    t = np.asarray(bf.t, dtype=float)
    return SMatrix.from_array((np.outer(x, x) + t @ t.T) / (2 * bf.d))


def cubic_eigenvalues(s):
    """Eigenvalues of S from its characteristic cubic.

    A vanishing radicand ``6Tr[S^2] - 2Tr[S]^2`` means a triple root; theta is
    then set to 0. The arccos argument is clipped to [-1, 1].
    """
    if not isinstance(s, SMatrix):
        s = SMatrix.from_array(s)
    t1, t2, t3 = s.tr_s, s.tr_s2, s.tr_s3
    a0 = -t1
    a1 = 0.5 * (t1**2 - t2)
    a2 = -(a1 * t1 + a0 * t2 + t3) / 3.0
    # q = (3a1 - a0^2)/9 and r = (9a0a1 - 27a2 - 2a0^3)/54, evaluated on the
    # traceless part of S to avoid cancellation near degenerate spectra
    _, dev2, dev3 = kernels.deviator_traces(s.s)
    q = -dev2 / 6.0
    r = dev3 / 6.0
    rad = 6.0 * dev2
    if rad < DEGENERATE_EPS:
        theta = 0.0
        amp = 0.0
    else:
        theta = float(np.arccos(np.clip(r / np.sqrt(-(q**3)), -1.0, 1.0)))
        amp = np.sqrt(rad)
    k = tuple(float((t1 + amp * np.cos((theta + alpha) / 3.0)) / 3.0) for alpha in (0.0, 2 * np.pi, 4 * np.pi))
    k = (k[0],) + tuple(sorted(k[1:], reverse=True))
    return CubicSolution(a0=a0, a1=a1, a2=a2, q=q, r=r, theta=theta, k=k)


def _traces(rho):
    return kernels.deviator_traces(s_matrix(bloch_fano_decompose(rho)).s)


def geometric_discord_closed(rho):
    """D_G from the closed cosine formula in the power traces of S."""
    d_g, _, _ = kernels.closed_form_measures(*_traces(rho))
    return float(d_g[0])


def q_measure(rho):
    """Q: the closed D_G formula with theta fixed to 0."""
    _, q, _ = kernels.closed_form_measures(*_traces(rho))
    return float(q[0])


def closed_form_from_s(s):
    """(D_G, Q, theta) directly from an S matrix."""
    if isinstance(s, SMatrix):
        s = s.s
    d_g, q, theta = kernels.closed_form_measures(*kernels.deviator_traces(s))
    return float(d_g[0]), float(q[0]), float(theta[0])


def q_from_traces(tr_s, tr_s2):
    rad = 6.0 * tr_s2 - 2.0 * tr_s**2
    root = 0.0 if rad < DEGENERATE_EPS else np.sqrt(rad)
    return (2.0 / 3.0) * (2.0 * tr_s - root)


def sphere_grid(grid_n):
    """Unit vectors on a grid_n x grid_n (polar, azimuth) grid."""
    th = np.linspace(0.0, np.pi, grid_n)
    ph = np.linspace(0.0, 2 * np.pi, grid_n, endpoint=False)
    tt, pp = np.meshgrid(th, ph, indexing="ij")
    return np.stack([np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1).reshape(-1, 3)


def _tangent_frame(n):
    a = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(n, a)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1)


def geometric_discord_bruteforce(rho, grid_n=60, refine_tol=1e-10, n_starts=3):
    """``2 min_n ||rho - Pi_n(rho)||^2`` by direct search over Alice's measurement axis.

    A coarse (polar, azimuth) grid locates candidate minima; each of the
    ``n_starts`` best grid points is polished by Nelder-Mead in a local tangent
    chart (which avoids the coordinate singularity at the poles).
    """
    m, d = rho.matrix, rho.dim_b
    grid = sphere_grid(grid_n)
    vals = kernels.measurement_disturbance(m, d, grid)
    best = float(vals.min())
    step = np.pi / max(grid_n - 1, 1)
    for idx in np.argsort(vals)[:n_starts]:
        n0 = grid[idx]
        e1, e2 = _tangent_frame(n0)

        def f(uv):
            n = n0 + uv[0] * e1 + uv[1] * e2
            return float(kernels.measurement_disturbance(m, d, n / np.linalg.norm(n))[0])

        simplex = np.array([[0.0, 0.0], [step, 0.0], [0.0, step]])
        res = minimize(
            f, np.zeros(2), method="Nelder-Mead",
            options={"xatol": refine_tol, "fatol": 1e-16, "initial_simplex": simplex, "maxiter": 4000},
        )
        best = min(best, float(res.fun))
    return 2.0 * best


def negativity(rho):
    """``||rho^{T_A}||_1 - 1``, clipped at 0 (Bell states give 1)."""
    return max(0.0, trace_norm(partial_transpose_a(rho.matrix, rho.layout)) - 1.0)


def correlation_report(rho):
    s = s_matrix(bloch_fano_decompose(rho))
    d_g, q, theta = kernels.closed_form_measures(*kernels.deviator_traces(s.s))
    neg = negativity(rho)
    return CorrelationReport(
        d_g=float(d_g[0]), q=float(q[0]), theta=float(theta[0]),
        negativity=neg, neg_sq=neg * neg, tr_s=s.tr_s, tr_s2=s.tr_s2,
    )


def batch_reports(mats, dim_b=2):
    """Reports for a stack of density matrices of shape (n, 2d, 2d).

    Vectorised counterpart of :func:`correlation_report` used by the scatter
    and inequality sweeps; inputs are assumed valid.
    """
    mats = np.asarray(mats, dtype=np.complex128)
    n, d = len(mats), dim_b
    tau = np.array(default_basis(d).operators)
    blocks = mats.reshape(n, 2, d, 2, d)
    m_ops = np.einsum("pab,nbkal->npkl", np.array(PAULIS), blocks)
    x = np.real(np.einsum("npkk->np", m_ops))
    t = np.real(np.einsum("npkl,jlk->npj", m_ops, tau))
    s = (x[:, :, None] * x[:, None, :] + t @ t.transpose(0, 2, 1)) / (2 * d)
    tr1, dev2, dev3 = kernels.deviator_traces(s)
    tr2 = np.einsum("nij,nji->n", s, s)
    d_g, q, theta = kernels.closed_form_measures(tr1, dev2, dev3)
    pt = mats.reshape(n, 2, d, 2, d).transpose(0, 3, 2, 1, 4).reshape(n, 2 * d, 2 * d)
    neg = np.maximum(0.0, np.abs(np.linalg.eigvalsh(pt)).sum(axis=1) - 1.0)
    return [
        CorrelationReport(float(a), float(b), float(c), float(e), float(e * e), float(f), float(g))
        for a, b, c, e, f, g in zip(d_g, q, theta, neg, tr1, tr2)
    ]
