"""Two exactly solvable two-qubit channels and correlation trajectories.

Lorentzian channel: each qubit decays into its own zero-temperature reservoir
with a Lorentzian spectral density (coupling gamma0, width lambda). Small
lambda / gamma0 gives memory effects and revivals.

Phase-flip channel: each qubit dephases along z at rate gamma. Bell-diagonal
states stay Bell-diagonal, with c1 and c2 decaying and c3 frozen.

States use the standard basis |00>, |01>, |10>, |11>. The Lorentzian element
map is written in the reversed basis |11>, |10>, |01>, |00>, and the
conversion happens inside :func:`evolve_independent`.
"""
import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from qcorr.measures import batch_reports
from qcorr.states import DensityMatrix, bell_diagonal, werner


class ChannelDomainError(ValueError):
    """The excited-state survival factor is negative at the requested time."""

    def __init__(self, t, p):
        super().__init__(f"P_t = {p:.6g} < 0 at t = {t:.15g}; fractional powers are undefined")
        self.t = t
        self.p = p


@dataclass(frozen=True)
class LorentzianParams:
    gamma0: float
    lam: float

    def __post_init__(self):
        if not (self.gamma0 > 0 and self.lam > 0):
            raise ValueError("gamma0 and lambda must be positive")

    @property
    def delta_sq(self):
        return (2 * self.gamma0 * self.lam - self.lam**2) / 4.0

    @property
    def delta(self):
        """Real for 2 gamma0 > lambda, otherwise purely imaginary."""
        d2 = self.delta_sq
        return np.sqrt(d2) if d2 >= 0 else 1j * np.sqrt(-d2)

    @property
    def overdamped(self):
        return self.delta_sq < 0

    def label(self):
        return {"gamma0": self.gamma0, "lambda": self.lam}


@dataclass(frozen=True)
class PhaseFlipParams:
    gamma: float
    j: int = 3

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.j != 3:
            raise ValueError("only the phase-flip axis j = 3 is supported")

    def label(self):
        return {"gamma": self.gamma}


def _amplitude(t, params):
    """``e^{-lambda t / 2} [cos(D t) + lambda/(2D) sin(D t)]`` with its D -> 0 and D^2 < 0 limits."""
    lam = params.lam
    d2 = params.delta_sq
    if abs(d2) < 1e-14:
        bracket = 1.0 + lam * t / 2.0
    elif d2 > 0:
        d = np.sqrt(d2)
        bracket = np.cos(d * t) + lam / (2 * d) * np.sin(d * t)
    else:
        d = np.sqrt(-d2)
        bracket = np.cosh(d * t) + lam / (2 * d) * np.sinh(d * t)
    return np.exp(-lam * t / 2.0) * bracket


def p_t(t, params, squared=True):
    """Excited-state survival probability of one qubit.

    ``squared=True`` returns ``e^{-lambda t}[cos(D t) + lambda/(2D) sin(D t)]^2``,
    the modulus squared of the single-qubit amplitude, which is never negative.
    ``squared=False`` returns the bracket to the first power; it crosses zero
    in the oscillating regime.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    amp = _amplitude(t, params)
    out = amp**2 if squared else np.exp(-params.lam * t / 2.0) * amp
    return float(out) if out.ndim == 0 else out


def _check_p(t, p):
    if p < 0:
        raise ChannelDomainError(t, p)


def apply_element_map(m, p):
    """Element map in the reversed basis |11>, |10>, |01>, |00> (indices 0..3)."""
    if p < 0:
        raise ChannelDomainError(float("nan"), p)
    o = np.zeros((4, 4), dtype=np.complex128)
    sp = np.sqrt(p)
    o[0, 0] = m[0, 0] * p**2
    o[1, 1] = m[1, 1] * p + m[0, 0] * p * (1 - p)
    o[2, 2] = m[2, 2] * p + m[0, 0] * p * (1 - p)
    o[3, 3] = 1 - o[0, 0] - o[1, 1] - o[2, 2]
    o[0, 1] = m[0, 1] * p * sp
    o[0, 2] = m[0, 2] * p * sp
    o[0, 3] = m[0, 3] * p
    o[1, 2] = m[1, 2] * p
    o[1, 3] = sp * (m[1, 3] + m[0, 2] * (1 - p))
    o[2, 3] = sp * (m[2, 3] + m[0, 1] * (1 - p))
    iu = np.triu_indices(4, 1)
    o[iu[1], iu[0]] = np.conj(o[iu])
    return o


def evolve_independent(rho0, t, params, squared=True):
    """State at time ``t`` under two independent Lorentzian reservoirs."""
    if rho0.dim_b != 2:
        raise ValueError("the Lorentzian channel acts on two qubits")
    p = p_t(t, params, squared=squared)
    _check_p(t, p)
    rev = rho0.matrix[::-1, ::-1]
    return DensityMatrix(apply_element_map(rev, p)[::-1, ::-1], 2)


def amplitude_damping_kraus(p):
    """Single-qubit Kraus pair keeping |1> with probability ``p`` (basis |0>, |1>)."""
    k0 = np.diag([1.0, np.sqrt(p)]).astype(np.complex128)
    k1 = np.array([[0.0, np.sqrt(1 - p)], [0.0, 0.0]], dtype=np.complex128)
    return k0, k1


def evolve_by_kraus(rho0, p):
    """Independent single-qubit damping composed as a product channel."""
    ks = amplitude_damping_kraus(p)
    m = rho0.matrix
    return sum(np.kron(a, b) @ m @ np.kron(a, b).conj().T for a in ks for b in ks)


def phase_flip_coefficients(c0, t, params):
    decay = np.exp(-2.0 * params.gamma * t)
    return (c0[0] * decay, c0[1] * decay, c0[2])


def evolve_phase_flip(c0, t, params):
    """Bell-diagonal state with c1, c2 damped by exp(-2 gamma t) and c3 fixed."""
    if t < 0:
        raise ValueError("t must be >= 0")
    bell_diagonal(*c0)
    return bell_diagonal(*phase_flip_coefficients(c0, t, params))


def kink_time_phase_flip(c0, params):
    """Crossover where c1(t)^2 reaches c3^2 (D_G switches eigenvalue branch)."""
    c1, _, c3 = c0
    if abs(c3) >= abs(c1) or c3 == 0:
        return None
    return np.log(abs(c1) / abs(c3)) / (2.0 * params.gamma)


# --- trajectories ---------------------------------------------------------------

@dataclass(frozen=True)
class Channel:
    """A named channel: ``kind`` is "lorentzian" or "phaseflip"."""

    kind: str
    params: object
    squared: bool = True

    def evolve(self, initial, t):
        if self.kind == "lorentzian":
            return evolve_independent(initial, t, self.params, squared=self.squared)
        if self.kind == "phaseflip":
            return evolve_phase_flip(initial, t, self.params)
        raise ValueError(f"unknown channel {self.kind!r}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    reports: list
    channel: str
    params: dict = field(default_factory=dict)
    states: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if len(self.times) != len(self.reports):
            raise ValueError("times and reports differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def series(self, name):
        if name == "gap":
            return np.array([r.d_g - r.q for r in self.reports])
        return np.array([getattr(r, name) for r in self.reports])

    def filename(self):
        parts = [self.channel] + [f"{k}-{_fmt(v)}" for k, v in self.params.items()]
        return "_".join(parts) + ".csv"

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "d_g", "q", "gap", "negativity"])
        for t, r in zip(self.times, self.reports):
            w.writerow([_fmt(t), _fmt(r.d_g), _fmt(r.q), _fmt(r.d_g - r.q), _fmt(r.negativity)])


def _fmt(v):
    if isinstance(v, (tuple, list)):
        return ",".join(_fmt(x) for x in v)
    return f"{float(v):.15g}"


def trajectory(initial, channel, times, params_label=None, keep_states=False):
    """Correlation reports along ``times``.

    ``initial`` is a DensityMatrix for the Lorentzian channel and a c-triple for
    the phase-flip channel. Sampling stops at the first time where the channel
    is undefined.
    """
    times = np.asarray(times, dtype=float)
    kept_t, mats = [], []
    for t in times:
        try:
            mats.append(channel.evolve(initial, t))
        except ChannelDomainError:
            break
        kept_t.append(t)
    reports = batch_reports([m.matrix for m in mats]) if mats else []
    label = dict(params_label) if params_label else {}
    label.update(channel.params.label())
    return Trajectory(np.array(kept_t), reports, channel.kind, label, mats if keep_states else [])


def _gap_at(initial, channel, t):
    rep = batch_reports([channel.evolve(initial, t).matrix])[0]
    return rep.d_g - rep.q


def max_gap(family, channel, t_grid):
    """Rows ``(param, t_at_max, max_t (D_G - Q))`` for each ``(param, initial)`` in ``family``.

    The grid maximum is polished by a bounded scalar search between the
    neighbouring grid points.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    rows = []
    for param, initial in family:
        gaps = trajectory(initial, channel, t_grid).series("gap")
        i = int(np.argmax(gaps))
        best_t, best = float(t_grid[i]), float(gaps[i])
        lo, hi = t_grid[max(i - 1, 0)], t_grid[min(i + 1, len(t_grid) - 1)]
        if hi > lo and best > 0:
            res = minimize_scalar(
                lambda t: -_gap_at(initial, channel, t), bounds=(lo, hi), method="bounded",
                options={"xatol": 1e-10},
            )
            if -res.fun > best:
                best_t, best = float(res.x), float(-res.fun)
        rows.append((param, best_t, best))
    return rows


def werner_family(rs):
    return [(float(r), werner(float(r))) for r in rs]


def phase_flip_family(ss):
    """c(0) = (1, -s, s)."""
    return [(float(s), (1.0, -float(s), float(s))) for s in ss]


# --- feature detection ----------------------------------------------------------------

def detect_kink(f, t_lo, t_hi, n=4001):
    """Time of the largest |second difference| of ``f`` on a uniform grid."""
    ts = np.linspace(t_lo, t_hi, n)
    ys = np.array([f(t) for t in ts])
    dd = np.abs(ys[2:] - 2 * ys[1:-1] + ys[:-2])
    return float(ts[1 + int(np.argmax(dd))])


def one_sided_slopes(f, t, h=1e-4):
    """Second-order backward and forward difference quotients of ``f`` at ``t``."""
    back = (3 * f(t) - 4 * f(t - h) + f(t - 2 * h)) / (2 * h)
    fwd = (-3 * f(t) + 4 * f(t + h) - f(t + 2 * h)) / (2 * h)
    return back, fwd


def revivals(values, rel_tol=1e-12):
    """Indices ``(i_min, i_max)`` where a local minimum is followed by a higher local maximum."""
    v = np.asarray(values, dtype=float)
    scale = max(1.0, float(np.max(np.abs(v)))) if len(v) else 1.0
    dv = np.diff(v)
    dv[np.abs(dv) < rel_tol * scale] = 0.0
    out = []
    last_min = None
    for i in range(1, len(v) - 1):
        if dv[i - 1] < 0 and dv[i] >= 0:
            last_min = i
        elif dv[i - 1] > 0 and dv[i] <= 0 and last_min is not None:
            out.append((last_min, i))
            last_min = None
    return out


def measure_along(initial, channel, name):
    """``t -> name`` of the report at t (scalar callable for the detectors)."""
    def f(t):
        rep = batch_reports([channel.evolve(initial, t).matrix])[0]
        return getattr(rep, name)
    return f
