"""Measurement plans that give D_G and Q without full tomography.

NMR setting
    Expectations of sigma_nu x tau_lambda (Alice Pauli times Bob basis element
    or identity) fix x and t, hence S. Bob's Bloch vector is never needed, so
    the plan has 3d^2 entries instead of the 4d^2 - 1 of tomography.

Optical setting (two qubits)
    Tr[S] and Tr[S^2] are polynomials in multicopy overlaps of rho and its
    marginals. Each overlap is the expectation of a shift operator on copies of
    rho, and the antisymmetric projectors P- = (I - V)/2 on copy pairs turn them
    into seven projective (c) or four swap (d) observables.

Copies of a 2 x d state are laid out A1 B1 A2 B2 ... (one tensor factor per
party per copy).
"""
import hashlib
from dataclasses import dataclass
from functools import lru_cache
from enum import Enum

import numpy as np

from qcorr.corematrix import kron, permute_subsystems
from qcorr.measures import closed_form_from_s, q_from_traces, s_matrix
from qcorr.states import (
    random_mixed,
    IDENTITY2,
    PAULI_LABELS,
    PAULIS,
    SIGMA_Z,
    BlochFano,
    bloch_fano_decompose,
    default_basis,
    pauli_product_basis,
)


class Setting(str, Enum):
    NMR = "nmr"
    OPTICAL_PROJECTIVE = "optical-projective"
    OPTICAL_SWAP = "optical-swap"


@dataclass(frozen=True, eq=False)
class Observable:
    label: str
    operator: np.ndarray
    copies: int = 1

    def digest(self, n=12):
        """Short content hash of the operator (rounded to 12 decimals)."""
        op = np.round(np.asarray(self.operator, dtype=np.complex128), 12) + 0.0
        return hashlib.sha256(np.ascontiguousarray(op).tobytes()).hexdigest()[:n]


@dataclass(frozen=True, eq=False)
class ObservablePlan:
    setting: Setting
    observables: tuple
    tomography_count: int
    d: int = 2

    @property
    def count(self):
        return len(self.observables)

    @property
    def labels(self):
        return [o.label for o in self.observables]

    def expectations(self, rho):
        """Exact expectation of every observable on ``rho`` (copies included)."""
        cache = {}
        out = {}
        for o in self.observables:
            if o.copies not in cache:
                cache[o.copies] = kron(*([rho.matrix] * o.copies))
            out[o.label] = float(np.real(np.sum(o.operator * cache[o.copies].T)))
        return out


@dataclass(frozen=True, eq=False)
class MulticopyOperator:
    operator: np.ndarray
    layout: tuple
    label: str


# --- NMR --------------------------------------------------------------------

def _bob_basis(d, basis):
    if basis == "pauli":
        n = int(round(np.log2(d)))
        if 2**n != d:
            raise ValueError(f"Pauli-product basis needs d = 2^n, got d={d}")
        return pauli_product_basis(n)
    if basis == "gell-mann":
        return default_basis(d)
    raise ValueError(f"unknown basis {basis!r}")


def nmr_label(nu, bob_label):
    return f"{PAULI_LABELS[nu]}|{bob_label}"


def nmr_plan(d, basis="gell-mann"):
    """The 3d^2 spin observables sigma_nu x tau_lambda, lambda = 0 meaning I_d."""
    if d < 2:
        raise ValueError("d must be >= 2")
    bob = _bob_basis(d, basis).rescaled(d)
    bob_ops = [("I", np.eye(d))] + list(zip(bob.labels, bob.operators))
    obs = tuple(
        Observable(nmr_label(nu, lab), np.kron(s, op))
        for nu, s in enumerate(PAULIS)
        for lab, op in bob_ops
    )
    return ObservablePlan(Setting.NMR, obs, tomography_count=4 * d * d - 1, d=d)


def reconstruct_from_nmr(expectations, d, basis="gell-mann"):
    """(D_G, Q) from the NMR plan's expectation values (a label -> value mapping)."""
    bob = _bob_basis(d, basis)
    missing = [
        nmr_label(nu, lab)
        for nu in range(3)
        for lab in ("I",) + tuple(bob.labels)
        if nmr_label(nu, lab) not in expectations
    ]
    if missing:
        raise KeyError(f"missing expectations for {len(missing)} labels, e.g. {missing[:3]}")
    x = np.array([expectations[nmr_label(nu, "I")] for nu in range(3)], dtype=float)
    t = np.array([[expectations[nmr_label(nu, lab)] for lab in bob.labels] for nu in range(3)], dtype=float)
    s = s_matrix(BlochFano(x=x, y=np.zeros(d * d - 1), t=t, d=d))
    d_g, q, _ = closed_form_from_s(s)
    return d_g, q


# Local rotations (angle, axis) with R^dag sigma_1 R = sigma_lambda on Bob, and
# the Alice rotation plus readout Pauli such that CNOT pulls sigma_readout x I
# back to sigma_nu x sigma_1.
_BOB_ROTATION = {
    0: (0.0, (0.0, 0.0, 1.0)),
    1: (-np.pi / 2, (0.0, 0.0, 1.0)),
    2: (np.pi, (1.0, 0.0, 1.0)),
}
_ALICE_ROTATION = {
    0: ((0.0, (0.0, 0.0, 1.0)), 0),
    1: ((0.0, (0.0, 0.0, 1.0)), 1),
    2: ((np.pi, (1.0, 0.0, 1.0)), 0),
}
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)


def rotation(phi, axis):
    """``exp(-i phi n.sigma / 2)``."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    ns = sum(c * s for c, s in zip(n, PAULIS))
    return np.cos(phi / 2) * IDENTITY2 - 1j * np.sin(phi / 2) * ns


def localization_unitary(nu, lam):
    """CNOT (Alice control) after local rotations; returns (unitary, Alice readout index)."""
    (phi_a, ax_a), readout = _ALICE_ROTATION[nu]
    phi_b, ax_b = _BOB_ROTATION[lam]
    return CNOT @ np.kron(rotation(phi_a, ax_a), rotation(phi_b, ax_b)), readout


def nmr_localization_check(rho, nu, lam):
    """Both sides of ``Tr[(s_nu x s_lam) rho] = Tr[(s_readout x I) xi]`` for 1-based nu, lam.

    ``xi`` is rho after the rotations and CNOT. For nu in {1, 2} the readout is
    sigma_nu itself; sigma_3 on the control commutes with CNOT, so nu = 3 is first
    rotated onto sigma_1 and read out there.
    """
    if rho.dim_b != 2:
        raise ValueError("the localization identity is for two qubits")
    if nu not in (1, 2, 3) or lam not in (1, 2, 3):
        raise ValueError("nu and lambda must be in 1..3")
    u, readout = localization_unitary(nu - 1, lam - 1)
    xi = u @ rho.matrix @ u.conj().T
    lhs = float(np.real(np.trace(np.kron(PAULIS[nu - 1], PAULIS[lam - 1]) @ rho.matrix)))
    rhs = float(np.real(np.trace(np.kron(PAULIS[readout], IDENTITY2) @ xi)))
    return lhs, rhs


# --- shift, swap and projectors ----------------------------------------------

def shift_operator(k, local_dim):
    """Cyclic shift with ``Tr[V rho_1 x ... x rho_k] = Tr[rho_1 rho_2 ... rho_k]``.

    On kets this is ``V|psi_1 psi_2 ... psi_k> = |psi_2 ... psi_k psi_1>``; the
    opposite cycle gives the reversed product, which only matters for k >= 3
    with distinct factors.
    """
    if k not in (2, 3, 4):
        raise ValueError("k must be 2, 3 or 4")
    n = local_dim**k
    v = np.zeros((n, n), dtype=np.complex128)
    for col, digits in enumerate(np.ndindex(*([local_dim] * k))):
        shifted = digits[1:] + digits[:1]
        v[np.ravel_multi_index(shifted, [local_dim] * k), col] = 1.0
    return MulticopyOperator(v, (local_dim,) * k, f"V{k}")


def swap_general(d):
    """``(I + sum tau_i x tau_i) / d`` with Gell-Mann tau scaled to Tr[tau^2] = d."""
    if d < 2:
        raise ValueError("d must be >= 2")
    tau = default_basis(d).operators
    v = (np.eye(d * d) + sum(np.kron(t, t) for t in tau)) / d
    return MulticopyOperator(v.astype(np.complex128), (d, d), "V")


def antisym_projector(d):
    """``((d - 1) I - sum tau_i x tau_i) / (2d)``, i.e. (I - V)/2."""
    if d < 2:
        raise ValueError("d must be >= 2")
    tau = default_basis(d).operators
    p = ((d - 1) * np.eye(d * d) - sum(np.kron(t, t) for t in tau)) / (2 * d)
    return MulticopyOperator(p.astype(np.complex128), (d, d), "P-")


def overlap(*mats):
    """``Tr[m_1 m_2 ... m_k]``."""
    out = mats[0]
    for m in mats[1:]:
        out = out @ m
    return complex(np.trace(out))


def overlap_via_shift(*mats):
    """``Tr[V^k m_1 x ... x m_k]`` with the cyclic shift on k copies."""
    d = mats[0].shape[0]
    v = shift_operator(len(mats), d).operator
    return complex(np.sum(v * kron(*mats).T))


# --- multicopy trace identities (two qubits) --------------------------------

def _two_qubit_parts(rho):
    if rho.dim_b != 2:
        raise ValueError("multicopy identities are implemented for two qubits")
    return rho.matrix, rho.marginal_a(), rho.marginal_b()


def multicopy_traces(rho):
    """Tr[X], Tr[T], Tr[X^2], Tr[XT], Tr[T^2] from purities and overlaps.

    ``X = x x^T`` and ``T = t t^T``; ``varsigma = rho - rho_A x I/2 - I x rho_B/2``.
    """
    r, ra, rb = _two_qubit_parts(rho)
    pa = overlap(ra, ra).real
    pb = overlap(rb, rb).real
    p = overlap(r, r).real
    ra_i = np.kron(ra, IDENTITY2)
    vs = r - ra_i / 2 - np.kron(IDENTITY2, rb) / 2
    tr_x = 2 * pa - 1
    tr_t = 4 * (p - pa / 2 - pb / 2) + 1
    tr_x2 = (2 * pa - 1) ** 2
    tr_xt = (
        -1 + 4 * p * (-1 + pa) + 4 * pa - 4 * pa**2 + 2 * pb
        + 8 * overlap(r, ra_i, r, ra_i).real - 8 * overlap(r, np.kron(ra @ ra, rb)).real
    )
    tr_t2 = -32 * (overlap(vs, vs, vs, vs).real + overlap(vs, vs, vs).real) + 3 * (tr_t**2 / 2 - tr_t - 0.5)
    return {"tr_x": tr_x, "tr_t": tr_t, "tr_x2": tr_x2, "tr_xt": tr_xt, "tr_t2": tr_t2}


def bloch_traces(rho):
    """The same five traces computed from the Bloch-Fano coefficients."""
    bf = bloch_fano_decompose(rho)
    x = np.outer(bf.x, bf.x)
    t = bf.t @ bf.t.T
    return {
        "tr_x": float(np.trace(x)), "tr_t": float(np.trace(t)), "tr_x2": float(np.trace(x @ x)),
        "tr_xt": float(np.trace(x @ t)), "tr_t2": float(np.trace(t @ t)),
    }


def multicopy_traces_s(rho, via_shift=False):
    """(Tr[S], Tr[S^2]) from the nine multicopy overlap terms.

    With ``via_shift`` every overlap is evaluated as a shift-operator expectation
    on a product of copies instead of a matrix product.
    """
    r, ra, rb = _two_qubit_parts(rho)
    ov = overlap_via_shift if via_shift else overlap
    i_rb = np.kron(IDENTITY2, rb)
    ra_i = np.kron(ra, IDENTITY2)
    ra_rb = np.kron(ra, rb)
    p2 = ov(r, r).real
    p3 = ov(r, r, r).real
    p4 = ov(r, r, r, r).real
    pa = ov(ra, ra).real
    pb = ov(rb, rb).real
    tr_s = p2 - pb / 2
    tr_s2 = 0.25 * (
        -2 - 8 * p4 + 8 * p3 + 6 * p2**2
        - 2 * p2 * (5 + pb) - 2 * pa**2 + 10 * pa
        - pb**2 + 12 * pb - 6 * pa * pb
        + 4 * ov(r, i_rb, r, i_rb).real - 24 * ov(r, ra_rb).real
        + 8 * ov(r, ra_i, r, ra_i).real + 8 * ov(r, r, ra_rb).real
    )
    return tr_s, tr_s2


# --- optical c / d observables ----------------------------------------------

def _factor_index(name):
    party, copy = name[0], int(name[1:])
    return 2 * (copy - 1) + (0 if party == "A" else 1)


def pair_operator(pairs, n_copies, d=2):
    """Read-only cached operator for ``pairs``; see :func:`build_pair_operator`."""
    return _pair_operator_cached(tuple((k, tuple(fs)) for k, fs in pairs), n_copies, d)


@lru_cache(maxsize=256)
def _pair_operator_cached(pairs, n_copies, d):
    m = build_pair_operator(pairs, n_copies, d)
    m.setflags(write=False)
    return m


def build_pair_operator(pairs, n_copies, d=2):
    """Operator on ``n_copies`` of a 2 x d state built from two-factor pieces.

    ``pairs`` is a sequence of ``(kind, (f1, f2))`` with kind in {"I", "V", "P"}
    and factor names like "A1", "B3"; together they must cover every factor once.
    """
    dims_of = {"A": 2, "B": d}
    ops, order = [], []
    for kind, (f1, f2) in pairs:
        local = dims_of[f1[0]]
        if dims_of[f2[0]] != local:
            raise ValueError(f"pair {f1}{f2} mixes local dimensions")
        if kind == "I":
            ops.append(np.eye(local * local))
        elif kind == "V":
            ops.append(swap_general(local).operator)
        elif kind == "P":
            ops.append(antisym_projector(local).operator)
        else:
            raise ValueError(f"unknown pair kind {kind!r}")
        order += [_factor_index(f1), _factor_index(f2)]
    if sorted(order) != list(range(2 * n_copies)):
        raise ValueError("pairs must cover every factor exactly once")
    dims = [2 if i % 2 == 0 else d for i in order]
    m = kron(*ops)
    perm = [order.index(i) for i in range(2 * n_copies)]
    return permute_subsystems(m, dims, perm)


C_SPECS = {
    "c1": (2, [("P", ("A1", "A2")), ("P", ("B1", "B2"))]),
    "c2": (2, [("P", ("A1", "A2")), ("I", ("B1", "B2"))]),
    "c3": (2, [("I", ("A1", "A2")), ("P", ("B1", "B2"))]),
    "c4": (4, [("P", ("A1", "A4")), ("P", ("A2", "A3")), ("P", ("B1", "B2")), ("P", ("B3", "B4"))]),
    "c5": (4, [("P", ("A1", "A4")), ("I", ("A2", "A3")), ("P", ("B1", "B2")), ("P", ("B3", "B4"))]),
    "c6": (4, [("P", ("A1", "A4")), ("P", ("A2", "A3")), ("P", ("B1", "B2")), ("I", ("B3", "B4"))]),
    "c7": (4, [("I", ("A1", "A4")), ("P", ("A2", "A3")), ("P", ("B1", "B2")), ("I", ("B3", "B4"))]),
}
D_SPECS = {
    "d1": (2, [("V", ("A1", "A2")), ("V", ("B1", "B2"))]),
    "d2": (2, [("I", ("A1", "A2")), ("V", ("B1", "B2"))]),
    "d3": (4, [("I", ("A1", "A4")), ("V", ("A2", "A3")), ("V", ("B1", "B2")), ("V", ("B3", "B4"))]),
    "d4": (4, [("V", ("A1", "A4")), ("V", ("A2", "A3")), ("V", ("B1", "B2")), ("V", ("B3", "B4"))]),
}


@lru_cache(maxsize=None)
def optical_plan(setting):
    setting = Setting(setting)
    if setting is Setting.OPTICAL_PROJECTIVE:
        specs = C_SPECS
    elif setting is Setting.OPTICAL_SWAP:
        specs = D_SPECS
    else:
        raise ValueError("use nmr_plan for the NMR setting")
    obs = tuple(Observable(lab, pair_operator(pairs, k), k) for lab, (k, pairs) in specs.items())
    return ObservablePlan(setting, obs, tomography_count=15, d=2)


@dataclass(frozen=True)
class OpticalObservables:
    c: tuple
    d_vals: tuple


def optical_observables(rho):
    """The seven projective (c) and four swap (d) expectations on copies of rho."""
    _two_qubit_parts(rho)
    c = optical_plan(Setting.OPTICAL_PROJECTIVE).expectations(rho)
    dv = optical_plan(Setting.OPTICAL_SWAP).expectations(rho)
    return OpticalObservables(c=tuple(c[f"c{i}"] for i in range(1, 8)), d_vals=tuple(dv[f"d{i}"] for i in range(1, 5)))


def trs_from_observables(obs):
    """(Tr[S], Tr[S^2]) from the c-route and from the d-route.

    The constant in the c-route Tr[S^2] is 1/4: with +1/2 the identity is off by
    exactly 1/4 for every state (e.g. it would give 1/4 for I/4, where S = 0).
    """
    c1, c2, c3, c4, c5, c6, c7 = obs.c
    d1, d2, d3, d4 = obs.d_vals
    c_route = (
        4 * c1 - 2 * c2 - c3 + 0.5,
        16 * c4 + 8 * (c7 - c5 - 2 * c6) + c3**2 + 4 * c2**2 - c3 - 2 * c2 + 0.25,
    )
    d_route = (d1 - 0.5 * d2, d4 - d3 + 0.25 * d2**2)
    return {"c": c_route, "d": d_route}


def q_from_observables(obs, route="d"):
    return q_from_traces(*trs_from_observables(obs)[route])


# --- ancilla interferometer ---------------------------------------------------

def _hadamard_blocks(b):
    # (H x I) M (H x I) on the ancilla block grid
    s00, s01, s10, s11 = b[0][0], b[0][1], b[1][0], b[1][1]
    return [
        [(s00 + s01 + s10 + s11) / 2, (s00 - s01 + s10 - s11) / 2],
        [(s00 + s01 - s10 - s11) / 2, (s00 - s01 - s10 + s11) / 2],
    ]


def _permutation_rows(u):
    """Row source indices if ``u`` is a 0/1 permutation matrix, else None."""
    src = np.argmax(np.abs(u), axis=1)
    if np.array_equal(u, np.eye(len(u))[src]) and len(set(src.tolist())) == len(u):
        return src
    return None


def interferometer_visibility(unitary, state):
    """Ancilla <Z> after H, controlled-``unitary``, H on ``|0><0| x state``.

    The joint state is held as a 2x2 grid of system blocks indexed by the
    ancilla; the result equals Re Tr[unitary state]. Permutation unitaries
    (every swap product) are applied by reindexing.
    """
    src = _permutation_rows(unitary)
    if src is not None:
        def left(m):
            return m[src, :]

        def right(m):
            return m[:, src]
    else:
        ud = unitary.conj().T

        def left(m):
            return unitary @ m

        def right(m):
            return m @ ud
    z = np.zeros_like(state)
    b = _hadamard_blocks([[state, z], [z, z]])
    b = [[b[0][0], right(b[0][1])], [left(b[1][0]), left(right(b[1][1]))]]
    b = _hadamard_blocks(b)
    probs = np.array([np.trace(b[0][0]), np.trace(b[1][1])]).real
    return float(probs @ np.diag(SIGMA_Z).real)


def _expand_pairs(pairs):
    """Write a product of I/V/P pieces as a sum of (coefficient, I/V-only pieces)."""
    terms = [(1.0, [])]
    for kind, fs in pairs:
        if kind == "P":
            opts = [(0.5, "I"), (-0.5, "V")]
        else:
            opts = [(1.0, kind)]
        terms = [(c * oc, pl + [(ok, fs)]) for c, pl in terms for oc, ok in opts]
    return terms


def circuit_observables(rho):
    """c and d values estimated through the interferometer, one swap product per run.

    Projectors are expanded into swap products (Hermitian and unitary), each
    measured as a visibility; the results are recombined linearly.
    """
    _two_qubit_parts(rho)
    copies = {k: kron(*([rho.matrix] * k)) for k in (2, 4)}
    out = {}
    for lab, (k, pairs) in {**C_SPECS, **D_SPECS}.items():
        total = 0.0
        for coef, term in _expand_pairs(pairs):
            total += coef * interferometer_visibility(pair_operator(term, k), copies[k])
        out[lab] = total
    return out



# --- identity suite ---------------------------------------------------------

@dataclass(frozen=True)
class IdentityCheck:
    name: str
    max_error: float
    tol: float

    @property
    def passed(self):
        return self.max_error < self.tol


def _random_density(n, rng):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    m = g @ g.conj().T
    return m / np.trace(m).real


def identity_suite(n_states=20, seed=0, circuit=True):
    """Every multicopy and localization identity on seeded random two-qubit states."""
    rng = np.random.default_rng(seed)
    errs = {}

    def record(name, err, tol):
        prev = errs.get(name, (0.0, tol))[0]
        errs[name] = (max(prev, float(err)), tol)

    for k in (2, 3, 4):
        for local in (2, 4):
            if local**k > 256:
                continue
            mats = [_random_density(local, rng) for _ in range(k)]
            record(f"shift k={k}", abs(overlap_via_shift(*mats) - overlap(*mats)), 1e-12)
    for d in (2, 3, 4):
        v = swap_general(d).operator
        p = antisym_projector(d).operator
        err = max(
            np.abs(v @ v - np.eye(d * d)).max(),
            np.abs(p - (np.eye(d * d) - v) / 2).max(),
            np.abs(p @ p - p).max(),
            abs(np.trace(p).real - d * (d - 1) / 2),
        )
        record("swap and antisymmetric projector", err, 1e-12)
    for _ in range(n_states):
        rho = random_mixed(2, seed=rng)
        s = s_matrix(rho)
        a, b = multicopy_traces(rho), bloch_traces(rho)
        record("five multicopy traces", max(abs(a[key] - b[key]) for key in a), 1e-10)
        nine = multicopy_traces_s(rho)
        record("nine-term Tr[S], Tr[S^2]", max(abs(nine[0] - s.tr_s), abs(nine[1] - s.tr_s2)), 1e-10)
        obs = optical_observables(rho)
        routes = trs_from_observables(obs)
        for route in ("c", "d"):
            ts, ts2 = routes[route]
            record(f"{route}-route Tr[S], Tr[S^2]", max(abs(ts - s.tr_s), abs(ts2 - s.tr_s2)), 1e-10)
        if circuit:
            sim = circuit_observables(rho)
            exact = dict(zip([f"c{i}" for i in range(1, 8)], obs.c))
            exact.update(zip([f"d{i}" for i in range(1, 5)], obs.d_vals))
            record("interferometer visibilities", max(abs(sim[key] - exact[key]) for key in exact), 1e-10)
        record("localization", max(
            abs(np.subtract(*nmr_localization_check(rho, nu, lam))) for nu in (1, 2, 3) for lam in (1, 2, 3)
        ), 1e-10)
        plan = nmr_plan(2)
        d_g, q = reconstruct_from_nmr(plan.expectations(rho), 2)
        ref = closed_form_from_s(s)
        record("NMR reconstruction", max(abs(d_g - ref[0]), abs(q - ref[1])), 1e-10)
    return [IdentityCheck(name, err, tol) for name, (err, tol) in errs.items()]
