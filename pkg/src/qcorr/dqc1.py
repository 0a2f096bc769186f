"""Four-qubit DQC1: one polarized ancilla plus a maximally mixed 3-qubit register.

The register uses big-endian ordering |q1 q2 q3>; the designed unitary's diagonal
is applied in listed order. Trace and correlation values do not depend on that
choice.
"""
import csv
from dataclasses import dataclass

import numpy as np

from qcorr.corematrix import is_unitary, kron, partial_trace
from qcorr.measures import correlation_report
from qcorr.states import SIGMA_X, SIGMA_Y, SIGMA_Z, DensityMatrix

HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
N_REGISTER = 3
QUADRATIC_CONSTANTS = {"d_g": 0.0531325, "q": 0.0402856}


@dataclass(frozen=True, eq=False)
class Dqc1Instance:
    mu: float
    u: np.ndarray
    n: int = N_REGISTER

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.complex128)
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"ancilla polarization mu={self.mu} outside [0, 1]")
        if u.shape != (2**self.n, 2**self.n):
            raise ValueError(f"unitary must be {2**self.n} x {2**self.n}")
        if not is_unitary(u, 1e-10):
            raise ValueError("u is not unitary")
        object.__setattr__(self, "u", u)


def designed_unitary():
    """diag(a, a, b, 1, a, b, 1, 1), a = -w^4, b = w^8 with w = exp(-3i pi/5)."""
    w = np.exp(-3j * np.pi / 5)
    a = -(w**4)
    b = w**8
    return np.diag([a, a, b, 1, a, b, 1, 1]).astype(np.complex128)


def output_state_blocks(mu, u):
    """``[[I, mu U^dag], [mu U, I]] / 2^(n+1)`` assembled directly."""
    dim = u.shape[0]
    eye = np.eye(dim)
    return np.block([[eye, mu * u.conj().T], [mu * u, eye]]) / (2 * dim)


def output_state_circuit(mu, u):
    """Hadamard on the ancilla then controlled-U, applied to the product input."""
    dim = u.shape[0]
    rho_in = kron((np.eye(2) + mu * SIGMA_Z) / 2, np.eye(dim) / dim)
    h = kron(HADAMARD, np.eye(dim))
    cu = np.block([[np.eye(dim), np.zeros((dim, dim))], [np.zeros((dim, dim)), u]])
    g = cu @ h
    return g @ rho_in @ g.conj().T


def dqc1_output_state(inst, check_circuit=False):
    m = output_state_blocks(inst.mu, inst.u)
    if check_circuit and not np.allclose(m, output_state_circuit(inst.mu, inst.u), rtol=0, atol=1e-12):
        raise AssertionError("block form and circuit evaluation disagree")
    return DensityMatrix(m, inst.u.shape[0])


def trace_estimate(rho_out, mu):
    """``Tr[U]`` recovered from the ancilla polarization, ``2^n (<X> + i<Y>) / mu``."""
    if mu <= 0:
        raise ValueError("Tr[U] is not recoverable from an unpolarized ancilla (mu = 0)")
    rho_a = partial_trace(rho_out.matrix, rho_out.layout, [0])
    sx = np.real(np.trace(rho_a @ SIGMA_X))
    sy = np.real(np.trace(rho_a @ SIGMA_Y))
    return rho_out.dim_b * complex(sx, sy) / mu


def _h2(p):
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def entropic_discord_dqc1(mu):
    """Closed approximate entropic discord of the DQC1 output."""
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu={mu} outside [0, 1]")
    root = np.sqrt(max(0.0, 1.0 - mu * mu))
    return float(2.0 - _h2((1.0 - mu) / 2.0) - np.log2(1.0 + root) - (1.0 - root) * np.log2(np.e))


@dataclass(frozen=True)
class SweepRow:
    mu: float
    d_g: float
    q: float
    entropic: float


def dqc1_sweep(mu_grid, u=None):
    u = designed_unitary() if u is None else u
    rows = []
    for mu in mu_grid:
        mu = float(mu)
        if not 0.0 <= mu <= 1.0:
            raise ValueError(f"mu={mu} outside [0, 1]")
        rep = correlation_report(dqc1_output_state(Dqc1Instance(mu, u)))
        rows.append(SweepRow(mu, rep.d_g, rep.q, entropic_discord_dqc1(mu)))
    return rows


def quadratic_coefficients(rows):
    """Least-squares c in ``measure = c mu^2`` for D_G and Q."""
    mu2 = np.array([r.mu for r in rows]) ** 2
    denom = float(mu2 @ mu2)
    return {
        "d_g": float(mu2 @ np.array([r.d_g for r in rows]) / denom),
        "q": float(mu2 @ np.array([r.q for r in rows]) / denom),
    }


def write_sweep_csv(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["mu", "d_g", "q", "entropic"])
    for r in rows:
        w.writerow([f"{r.mu:.15g}", f"{r.d_g:.15g}", f"{r.q:.15g}", f"{r.entropic:.15g}"])
