"""Density matrices of a qubit (Alice) and a d-level system (Bob).

Includes the operator bases used for Bob, the Bloch-Fano decomposition
``rho = (I + x.sigma x I + I x y.tau + sum t_ij sigma_i x tau_j) / (2d)``
and constructors for the state families used throughout the package.

Bloch-Fano coefficients are always taken relative to Bob operators rescaled to
``Tr[tau_i tau_j] = d delta_ij``. With that scaling ``t_ij = Tr[rho sigma_i x tau_j]``
for every d, and the S matrix ``(x x^T + t t^T) / (2d)`` gives the geometric
discord of a 2 x d state with the same formula as for two qubits.
"""
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from qcorr.corematrix import DEFAULT_TOL, is_hermitian, kron, partial_trace

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
IDENTITY2 = np.eye(2, dtype=np.complex128)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)
PAULI_LABELS = ("X", "Y", "Z")


class InvalidStateError(ValueError):
    """A matrix failed one of the density-matrix invariants."""


class StateFormatError(ValueError):
    """A state file could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated state on C^2 x C^d (Alice is the slow index)."""

    matrix: np.ndarray
    dim_b: int
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        dim_b = int(self.dim_b)
        if dim_b < 1:
            raise InvalidStateError("dim_b must be positive")
        if m.shape != (2 * dim_b, 2 * dim_b):
            raise InvalidStateError(f"shape {m.shape} does not match 2 x {dim_b} bipartition")
        if not is_hermitian(m, self.tol):
            raise InvalidStateError("not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > self.tol:
            raise InvalidStateError(f"trace is {float(tr.real):.15g}, expected 1")
        lam_min = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
        if lam_min < -self.tol:
            raise InvalidStateError(f"not positive semidefinite (min eigenvalue {lam_min:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dim_b", dim_b)

    dim_a = 2

    @property
    def dim(self):
        return 2 * self.dim_b

    @property
    def layout(self):
        return (2, self.dim_b)

    def marginal_a(self):
        return partial_trace(self.matrix, self.layout, [0])

    def marginal_b(self):
        return partial_trace(self.matrix, self.layout, [1])

    def purity(self):
        return float(np.real(np.sum(self.matrix * self.matrix.T)))

    def expect(self, op):
        return float(np.real(np.sum(self.matrix * np.asarray(op).T)))


@dataclass(frozen=True, eq=False)
class OperatorBasis:
    """Traceless Hermitian operators with ``Tr[tau_i tau_j] = normalization * delta_ij``."""

    labels: tuple
    operators: tuple
    normalization: float

    @property
    def dim(self):
        return self.operators[0].shape[0]

    def __len__(self):
        return len(self.operators)

    def rescaled(self, normalization):
        """Same directions, new normalization constant."""
        f = np.sqrt(normalization / self.normalization)
        return OperatorBasis(self.labels, tuple(f * op for op in self.operators), float(normalization))

    def gram(self):
        ops = np.array(self.operators)
        return np.einsum("aij,bji->ab", ops, ops)


def gell_mann_basis(d):
    """Generalized Gell-Mann matrices, ``Tr[tau_i tau_j] = 2 delta_ij``.

    Ordered symmetric, antisymmetric, diagonal per index pair so that d=2 gives
    exactly (sigma_x, sigma_y, sigma_z).
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    labels, ops = [], []
    for j, k in ((j, k) for k in range(d) for j in range(k)):
        sym = np.zeros((d, d), dtype=np.complex128)
        sym[j, k] = sym[k, j] = 1
        anti = np.zeros((d, d), dtype=np.complex128)
        anti[j, k], anti[k, j] = -1j, 1j
        labels += [f"s{j}{k}", f"a{j}{k}"]
        ops += [sym, anti]
        if j == k - 1:
            # diagonal element closing the k x k leading block
            diag = np.zeros(d)
            diag[:k] = 1
            diag[k] = -k
            labels.append(f"d{k}")
            ops.append(np.diag(np.sqrt(2.0 / (k * (k + 1))) * diag).astype(np.complex128))
    if d == 2:
        labels = ["X", "Y", "Z"]
    return OperatorBasis(tuple(labels), tuple(ops), 2.0)


def pauli_product_basis(n):
    """All 4^n - 1 non-identity Pauli strings on n qubits, ``Tr[tau_i tau_j] = 2^n delta_ij``.

    The first factor varies fastest: X x I, Y x I, Z x I, I x X, ...
    ending with Z x ... x Z.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    single = (IDENTITY2,) + PAULIS
    names = "IXYZ"
    labels, ops = [], []
    for idx in range(1, 4**n):
        digits = [(idx // 4**j) % 4 for j in range(n)]
        labels.append("".join(names[i] for i in digits))
        ops.append(kron(*(single[i] for i in digits)))
    return OperatorBasis(tuple(labels), tuple(ops), float(2**n))


def default_basis(d):
    """Gell-Mann basis rescaled to ``Tr[tau^2] = d``."""
    return gell_mann_basis(d).rescaled(d)


@dataclass(frozen=True, eq=False)
class BlochFano:
    """Alice Bloch vector ``x``, Bob Bloch vector ``y``, correlation matrix ``t``."""

    x: np.ndarray
    y: np.ndarray
    t: np.ndarray
    d: int


def _check_basis(basis, d):
    if basis.dim != d or len(basis) != d * d - 1:
        raise ValueError(f"basis of {len(basis)} operators on C^{basis.dim} does not match d={d}")


def bloch_fano_decompose(rho, basis=None):
    """Coefficients of ``rho`` in {sigma_i x tau_j}, with tau rescaled to Tr[tau^2]=d."""
    d = rho.dim_b
    basis = default_basis(d) if basis is None else basis
    _check_basis(basis, d)
    tau = np.array(basis.rescaled(d).operators)
    blocks = rho.matrix.reshape(2, d, 2, d)
    # M_i = Tr_A[(sigma_i x I) rho], then coefficients are Tr[M_i tau_j]
    m_ops = np.einsum("pab,bkal->pkl", np.array(PAULIS), blocks)
    rho_b = np.einsum("akal->kl", blocks)
    x = np.real(np.einsum("pkk->p", m_ops))
    y = np.real(np.einsum("kl,jlk->j", rho_b, tau))
    t = np.real(np.einsum("pkl,jlk->pj", m_ops, tau))
    return BlochFano(x=x, y=y, t=t, d=d)


def bloch_fano_reconstruct(bf, basis=None, tol=DEFAULT_TOL):
    d = bf.d
    basis = default_basis(d) if basis is None else basis
    _check_basis(basis, d)
    tau = np.array(basis.rescaled(d).operators)
    if bf.x.shape != (3,) or bf.y.shape != (d * d - 1,) or bf.t.shape != (3, d * d - 1):
        raise ValueError("Bloch-Fano coefficient shapes do not match d")
    eye_d = np.eye(d)
    m = np.eye(2 * d, dtype=np.complex128)
    for i, s in enumerate(PAULIS):
        m += bf.x[i] * np.kron(s, eye_d)
        m += np.kron(s, np.einsum("j,jkl->kl", bf.t[i], tau))
    m += np.kron(IDENTITY2, np.einsum("j,jkl->kl", bf.y, tau))
    return DensityMatrix(m / (2 * d), d, tol=tol)


# --- state families ---------------------------------------------------------

def _ket(*amps):
    v = np.asarray(amps, dtype=np.complex128)
    return v / np.linalg.norm(v)


def projector(v):
    v = np.asarray(v, dtype=np.complex128)
    return np.outer(v, v.conj())


PHI_PLUS = _ket(1, 0, 0, 1)
PHI_MINUS = _ket(1, 0, 0, -1)
PSI_PLUS = _ket(0, 1, 1, 0)
PSI_MINUS = _ket(0, 1, -1, 0)


def bell_state(which="phi+"):
    kets = {"phi+": PHI_PLUS, "phi-": PHI_MINUS, "psi+": PSI_PLUS, "psi-": PSI_MINUS}
    return DensityMatrix(projector(kets[which]), 2)


def maximally_mixed(d=2):
    return DensityMatrix(np.eye(2 * d) / (2 * d), d)


def werner(r):
    """``r |psi+><psi+| + (1 - r) I/4`` with psi+ = (|01> + |10>)/sqrt 2."""
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"Werner parameter r={r} outside [0, 1]")
    m = np.array(
        [[1 - r, 0, 0, 0], [0, 1 + r, 2 * r, 0], [0, 2 * r, 1 + r, 0], [0, 0, 0, 1 - r]],
        dtype=np.complex128,
    )
    return DensityMatrix(m / 4, 2)


def bell_diagonal_eigenvalues(c1, c2, c3):
    """Weights on (phi+, phi-, psi+, psi-) of ``(I + sum c_i sigma_i x sigma_i)/4``."""
    return np.array([
        1 + c1 - c2 + c3,
        1 - c1 + c2 + c3,
        1 + c1 + c2 - c3,
        1 - c1 - c2 - c3,
    ]) / 4


def bell_diagonal(c1, c2, c3, tol=DEFAULT_TOL):
    lam = bell_diagonal_eigenvalues(c1, c2, c3)
    if lam.min() < -tol:
        raise InvalidStateError(f"(c1, c2, c3)=({c1}, {c2}, {c3}) is unphysical: weights {lam}")
    m = np.eye(4, dtype=np.complex128)
    for c, s in zip((c1, c2, c3), PAULIS):
        m += c * np.kron(s, s)
    return DensityMatrix(m / 4, 2, tol=tol)


def pure_from_schmidt(alpha, d=2):
    """``sqrt(alpha)|00> + sqrt(1 - alpha)|11>`` on 2 x d."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"Schmidt coefficient {alpha} outside [0, 1]")
    if d < 2:
        raise ValueError("d must be >= 2")
    v = np.zeros(2 * d, dtype=np.complex128)
    v[0] = np.sqrt(alpha)
    v[d + 1] = np.sqrt(1.0 - alpha)
    return DensityMatrix(projector(v), d)


def classical_quantum(p, bob_states):
    """``sum_i p_i |i><i| x rho_Bi`` over Alice's computational basis."""
    p = np.asarray(p, dtype=float)
    if p.shape != (2,) or np.any(p < 0) or abs(p.sum() - 1.0) > DEFAULT_TOL:
        raise ValueError(f"p={p} is not a probability vector on two outcomes")
    if len(bob_states) != 2:
        raise ValueError("need one Bob state per Alice outcome")
    mats = [np.asarray(getattr(b, "matrix", b), dtype=np.complex128) for b in bob_states]
    d = mats[0].shape[0]
    m = sum(pi * np.kron(projector(np.eye(2)[i]), mb) for i, (pi, mb) in enumerate(zip(p, mats)))
    return DensityMatrix(m, d)


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_mixed(d, rank=None, seed=None):
    """Normalised Wishart state ``G G^dag / Tr`` with complex Gaussian ``G`` of shape (2d, rank)."""
    n = 2 * d
    rank = n if rank is None else int(rank)
    if not 1 <= rank <= n:
        raise ValueError(f"rank must be in 1..{n}")
    rng = _rng(seed)
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real, d)


def random_mixed_batch(n, d, seed=None):
    """``n`` full-rank Wishart states as an (n, 2d, 2d) array (unvalidated, for sweeps)."""
    rng = _rng(seed)
    k = 2 * d
    g = rng.standard_normal((n, k, k)) + 1j * rng.standard_normal((n, k, k))
    m = g @ g.conj().transpose(0, 2, 1)
    return m / np.trace(m, axis1=1, axis2=2).real[:, None, None]


def random_pure(d, seed=None):
    """Haar-random pure state on C^2 x C^d."""
    rng = _rng(seed)
    v = rng.standard_normal(2 * d) + 1j * rng.standard_normal(2 * d)
    return DensityMatrix(projector(v / np.linalg.norm(v)), d)


def random_unitary(n, seed=None):
    """Haar-random unitary via QR with phase correction."""
    rng = _rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


# --- state files ------------------------------------------------------------

def format_state(rho):
    lines = [f"dims 2 {rho.dim_b}"]
    for row in rho.matrix:
        lines.append(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row))
    return "\n".join(lines) + "\n"


def write_state(path, rho):
    Path(path).write_text(format_state(rho), encoding="utf-8")


def parse_state(text, tol=DEFAULT_TOL):
    """Parse the ``dims 2 d`` + rows-of-``re,im`` format.

    Raises :class:`StateFormatError` (naming the 1-based line) on syntax errors and
    :class:`InvalidStateError` when the parsed matrix is not a density matrix.
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise StateFormatError("empty file", 1)
    head = lines[0].split(" ")
    if len(head) != 3 or head[0] != "dims" or head[1] != "2":
        raise StateFormatError(f"expected 'dims 2 d', got {lines[0]!r}", 1)
    try:
        d = int(head[2])
    except ValueError:
        raise StateFormatError(f"bad dimension {head[2]!r}", 1) from None
    if d < 1:
        raise StateFormatError(f"bad dimension {d}", 1)
    n = 2 * d
    m = np.zeros((n, n), dtype=np.complex128)
    # rows are checked in reading order, so the first offending line is reported
    for i, line in enumerate(lines[1 : n + 1]):
        lineno = i + 2
        fields = line.split(" ")
        if len(fields) != n:
            raise StateFormatError(f"expected {n} entries, found {len(fields)}", lineno)
        for j, f in enumerate(fields):
            parts = f.split(",")
            if len(parts) != 2:
                raise StateFormatError(f"entry {j + 1} {f!r} is not 're,im'", lineno)
            try:
                m[i, j] = complex(float(parts[0]), float(parts[1]))
            except ValueError:
                raise StateFormatError(f"entry {j + 1} {f!r} is not numeric", lineno) from None
    if len(lines) - 1 != n:
        # point at the first missing or first surplus row
        bad_line = len(lines) + 1 if len(lines) - 1 < n else n + 2
        raise StateFormatError(f"expected {n} matrix rows, found {len(lines) - 1}", bad_line)
    return DensityMatrix(m, d, tol=tol)


def read_state(path, tol=DEFAULT_TOL):
    return parse_state(Path(path).read_text(encoding="utf-8"), tol=tol)
