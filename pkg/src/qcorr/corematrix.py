"""Dense complex linear algebra on small tensor-product spaces.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. Factor
ordering is big-endian: the first factor of a layout is the slow index, so
``kron(a, b)[i*db + k, j*db + l] == a[i, j] * b[k, l]``.
"""
from dataclasses import dataclass
from math import prod

import numpy as np

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class SubsystemLayout:
    """Local dimensions of the tensor factors of an operator."""

    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"invalid subsystem dims {self.dims!r}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self):
        return prod(self.dims)

    def __len__(self):
        return len(self.dims)

    def check(self, m):
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if m.shape[0] != self.total:
            raise ValueError(f"layout {self.dims} has dimension {self.total}, matrix has {m.shape[0]}")


def as_layout(layout):
    return layout if isinstance(layout, SubsystemLayout) else SubsystemLayout(tuple(layout))


def is_hermitian(m, tol=DEFAULT_TOL):
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.allclose(m, m.conj().T, rtol=0, atol=tol)


def is_unitary(m, tol=DEFAULT_TOL):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return np.allclose(m @ m.conj().T, np.eye(m.shape[0]), rtol=0, atol=tol)


def kron(*ops):
    """Tensor product of one or more matrices, left factor slowest."""
    out = np.ones((1, 1), dtype=np.complex128)
    for op in ops:
        out = np.kron(out, np.asarray(op, dtype=np.complex128))
    return out


def permute_subsystems(m, layout, perm):
    """Reorder tensor factors so that new factor ``i`` is old factor ``perm[i]``.

    Rows and columns are permuted together, i.e. this is conjugation by the
    corresponding permutation unitary.
    """
    layout = as_layout(layout)
    m = np.asarray(m, dtype=np.complex128)
    layout.check(m)
    n = len(layout)
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of {n} factors")
    t = m.reshape(layout.dims + layout.dims)
    t = t.transpose(perm + tuple(n + p for p in perm))
    return t.reshape(m.shape)


def partial_trace(m, layout, keep):
    """Trace out every factor not listed in ``keep``; kept factors stay in order."""
    layout = as_layout(layout)
    m = np.asarray(m, dtype=np.complex128)
    layout.check(m)
    n = len(layout)
    keep = sorted({int(k) for k in np.atleast_1d(keep)})
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep={keep} must be a nonempty subset of range({n})")
    # einsum subscripts: row index letters, column letters shared on traced factors
    letters = [chr(ord("a") + i) for i in range(2 * n)]
    rows = letters[:n]
    cols = [letters[n + i] if i in keep else rows[i] for i in range(n)]
    out = "".join(rows[i] for i in keep) + "".join(cols[i] for i in keep)
    t = np.einsum("".join(rows) + "".join(cols) + "->" + out, m.reshape(layout.dims + layout.dims))
    dk = prod(layout.dims[i] for i in keep)
    return t.reshape(dk, dk)


def partial_transpose_a(m, layout):
    """Transpose on the first factor of a bipartite layout."""
    layout = as_layout(layout)
    m = np.asarray(m, dtype=np.complex128)
    layout.check(m)
    if len(layout) != 2:
        raise ValueError("partial_transpose_a needs a bipartite layout")
    da, db = layout.dims
    return m.reshape(da, db, da, db).transpose(2, 1, 0, 3).reshape(m.shape)


def herm_eigenvalues(m, tol=DEFAULT_TOL):
    """Ascending real eigenvalues of a Hermitian matrix."""
    m = np.asarray(m)
    if not is_hermitian(m, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    return np.linalg.eigvalsh(0.5 * (m + m.conj().T))


def trace_power(m, k):
    """Tr[m^k] for k in 1..4."""
    if k not in (1, 2, 3, 4):
        raise ValueError("k must be in 1..4")
    m = np.asarray(m, dtype=np.complex128)
    if k == 1:
        return np.trace(m)
    if k == 2:
        # Tr[m m] without forming the product
        return np.sum(m * m.T)
    m2 = m @ m
    if k == 3:
        return np.sum(m2 * m.T)
    return np.sum(m2 * m2.T)


def trace_norm(m):
    """Sum of singular values."""
    return float(np.sum(np.linalg.svd(np.asarray(m), compute_uv=False)))
