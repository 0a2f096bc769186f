import io

import numpy as np
import pytest

from qcorr.dynamics import (
    Channel,
    ChannelDomainError,
    LorentzianParams,
    PhaseFlipParams,
    Trajectory,
    apply_element_map,
    detect_kink,
    evolve_by_kraus,
    evolve_independent,
    evolve_phase_flip,
    kink_time_phase_flip,
    max_gap,
    measure_along,
    one_sided_slopes,
    p_t,
    phase_flip_coefficients,
    phase_flip_family,
    revivals,
    trajectory,
    werner_family,
)
from qcorr.corematrix import partial_trace
from qcorr.states import DensityMatrix, InvalidStateError, maximally_mixed, random_mixed, werner


def test_params_validation():
    with pytest.raises(ValueError):
        LorentzianParams(0, 1)
    with pytest.raises(ValueError):
        PhaseFlipParams(1, j=1)
    p = LorentzianParams(1, 4)
    assert p.overdamped
    assert p.delta**2 == pytest.approx(p.delta_sq)
    q = LorentzianParams(1, 0.1)
    assert q.delta**2 == pytest.approx((2 * 0.1 - 0.01) / 4)


def test_p_t_examples():
    p = LorentzianParams(1, 1)
    assert p_t(0, p) == 1
    bracket = np.exp(-1) * (np.cos(0.5) + np.sin(0.5))
    assert p_t(1, p, squared=False) == pytest.approx(bracket, abs=1e-12)
    assert p_t(1, p) == pytest.approx(np.exp(-1) * (np.cos(0.5) + np.sin(0.5)) ** 2, abs=1e-12)


def test_overdamped_continuation():
    p = LorentzianParams(1, 4)
    ts = np.linspace(0, 5, 51)
    vals = p_t(ts, p)
    assert np.all(np.isreal(vals)) and np.all(np.diff(vals) < 0)
    # complex Delta in the oscillating formula gives the same real numbers
    d = np.sqrt(complex(p.delta_sq))
    amp = np.exp(-p.lam * ts / 2) * (np.cos(d * ts) + p.lam / (2 * d) * np.sin(d * ts))
    assert np.allclose(vals, np.abs(amp) ** 2, atol=1e-14)
    # critical damping limit
    crit = LorentzianParams(1, 2)
    assert p_t(1.0, crit) == pytest.approx(np.exp(-2) * 4, abs=1e-12)


def test_negative_t_rejected():
    with pytest.raises(ValueError):
        p_t(-1, LorentzianParams(1, 1))


def test_unsquared_factor_hits_domain_error():
    p = LorentzianParams(1, 0.1)
    zero = (np.pi - np.arctan(2 * p.delta / p.lam)) / p.delta
    with pytest.raises(ChannelDomainError) as exc:
        evolve_independent(werner(0.5), zero + 0.5, p, squared=False)
    assert exc.value.t == pytest.approx(zero + 0.5)
    ch = Channel("lorentzian", p, squared=False)
    traj = trajectory(werner(0.5), ch, np.linspace(0, 2 * zero, 12))
    assert traj.times[-1] < zero
    assert len(traj.times) == 6


def test_evolve_t0_identity():
    rho = random_mixed(2, seed=1)
    assert np.allclose(evolve_independent(rho, 0.0, LorentzianParams(1, 0.1)).matrix, rho.matrix)


def test_excited_population_cascade():
    ket11 = np.zeros((4, 4))
    ket11[3, 3] = 1
    p = LorentzianParams(1, 1)
    out = evolve_independent(DensityMatrix(ket11, 2), 0.7, p).matrix
    pt = p_t(0.7, p)
    assert out[3, 3].real == pytest.approx(pt**2)
    assert out[0, 0].real == pytest.approx((1 - pt) ** 2)
    assert np.trace(out).real == pytest.approx(1, abs=1e-15)


@pytest.mark.parametrize("lam", [0.1, 1.0, 4.0])
def test_element_map_factorizes(lam):
    p = LorentzianParams(1, lam)
    rng = np.random.default_rng(int(lam * 10))
    for t in (0.2, 1.3, 6.0):
        rho = random_mixed(2, seed=rng)
        a = evolve_independent(rho, t, p).matrix
        b = evolve_by_kraus(rho, p_t(t, p))
        assert np.abs(a - b).max() < 1e-12


def test_element_map_rejects_negative():
    with pytest.raises(ChannelDomainError):
        apply_element_map(np.eye(4) / 4, -0.1)


def test_phase_flip():
    pf = PhaseFlipParams(1)
    c0 = (1, -0.6, 0.6)
    assert np.allclose(evolve_phase_flip(c0, 0, pf).matrix, evolve_phase_flip(c0, 0, pf).matrix)
    late = evolve_phase_flip(c0, 40, pf).matrix
    zz = np.kron(np.diag([1, -1]), np.diag([1, -1]))
    assert np.trace(late @ zz).real == pytest.approx(0.6)
    assert abs(late[0, 3]) < 1e-15
    for t in (0.1, 1.0):
        rho = evolve_phase_flip(c0, t, pf).matrix
        assert np.array_equal(partial_trace(rho, (2, 2), [0]), np.eye(2) / 2)
        assert np.trace(rho @ zz).real == pytest.approx(0.6, abs=1e-15)
        assert phase_flip_coefficients(c0, t, pf)[2] == 0.6
    with pytest.raises(InvalidStateError):
        evolve_phase_flip((1, 1, 1), 0.2, pf)
    assert kink_time_phase_flip(c0, pf) == pytest.approx(np.log(1 / 0.6) / 2)
    assert kink_time_phase_flip((0.5, 0, 0.6), pf) is None


def test_trajectory_fixed_point():
    for ch, init in (
        (Channel("lorentzian", LorentzianParams(1, 0.1)), maximally_mixed()),
        (Channel("phaseflip", PhaseFlipParams(1)), (0.0, 0.0, 0.0)),
    ):
        traj = trajectory(init, ch, np.linspace(0, 5, 11))
        assert np.abs(traj.series("d_g")).max() < 1e-14
        assert np.abs(traj.series("q")).max() < 1e-14


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 0.0]), [None, None], "x")
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0]), [], "x")
    with pytest.raises(ValueError):
        Channel("bogus", PhaseFlipParams(1)).evolve((0, 0, 0), 0)


def test_trajectory_csv_and_filename():
    ch = Channel("lorentzian", LorentzianParams(1, 0.1))
    traj = trajectory(werner(0.75), ch, np.linspace(0, 1, 3), {"r": 0.75})
    assert traj.filename() == "lorentzian_r-0.75_gamma0-1_lambda-0.1.csv"
    buf = io.StringIO()
    traj.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,d_g,q,gap,negativity"
    assert lines[1] == "0,0.5625,0.5625,0,0.625"


def test_markovian_and_non_markovian_curves():
    t = np.linspace(0, 40, 801)
    for lam in (1.0, 0.1):
        traj = trajectory(werner(0.75), Channel("lorentzian", LorentzianParams(1, lam)), t, keep_states=True)
        assert np.all(traj.series("gap") >= -1e-12)
        for rho in traj.states:
            assert np.trace(rho.matrix).real == pytest.approx(1, abs=1e-14)
            assert np.linalg.eigvalsh(rho.matrix)[0] >= -1e-9
    assert revivals(traj.series("q"))


def test_revival_detector():
    assert revivals([3, 2, 1, 2, 3, 2]) == [(2, 4)]
    assert revivals([3, 2, 1, 0]) == []
    assert revivals([1, 1, 1]) == []


def test_kink_and_slopes():
    pf = PhaseFlipParams(1)
    c0 = (1, -0.6, 0.6)
    ch = Channel("phaseflip", pf)
    ts = kink_time_phase_flip(c0, pf)
    tk = detect_kink(measure_along(c0, ch, "d_g"), 0, 2, 4001)
    assert abs(tk - ts) < 0.01
    dl, dr = one_sided_slopes(measure_along(c0, ch, "d_g"), ts)
    assert abs(dl - dr) > 0.1
    ql, qr = one_sided_slopes(measure_along(c0, ch, "q"), ts)
    assert abs(ql - qr) < 1e-6


def test_max_gap_werner_monotone():
    ch = Channel("lorentzian", LorentzianParams(1, 1))
    rows = max_gap(werner_family(np.linspace(0, 1, 11)), ch, np.linspace(0, 10, 201))
    gaps = [g for _, _, g in rows]
    assert gaps[0] == pytest.approx(0, abs=1e-14)
    assert np.all(np.diff(gaps) >= -1e-12)


def test_max_gap_phase_flip_at_kink():
    pf = PhaseFlipParams(1)
    ch = Channel("phaseflip", pf)
    grid = np.linspace(0, 2, 401)
    for s, t_max, gap in max_gap(phase_flip_family([0.3, 0.5, 0.6]), ch, grid):
        assert gap > 0
        assert abs(t_max - np.log(1 / s) / 2) < grid[1] - grid[0]
