import io

import numpy as np
import pytest

from qcorr.corematrix import partial_trace
from qcorr.dqc1 import (
    QUADRATIC_CONSTANTS,
    Dqc1Instance,
    designed_unitary,
    dqc1_output_state,
    dqc1_sweep,
    entropic_discord_dqc1,
    output_state_blocks,
    output_state_circuit,
    quadratic_coefficients,
    trace_estimate,
    write_sweep_csv,
)
from qcorr.states import DensityMatrix


def test_designed_unitary_entries():
    u = designed_unitary()
    assert np.count_nonzero(u - np.diag(np.diag(u))) == 0
    assert u[3, 3] == 1
    a = u[0, 0]
    assert a == pytest.approx(-0.309017 + 0.951057j, abs=1e-6)
    assert np.trace(u) == pytest.approx(0.454915 + 1.677599j, abs=1e-6)


def test_instance_validation():
    with pytest.raises(ValueError):
        Dqc1Instance(1.5, np.eye(8))
    with pytest.raises(ValueError):
        Dqc1Instance(0.5, 2 * np.eye(8))
    with pytest.raises(ValueError):
        Dqc1Instance(0.5, np.eye(4))


def test_output_state_examples():
    assert np.allclose(dqc1_output_state(Dqc1Instance(0.0, np.eye(8))).matrix, np.eye(16) / 16)
    m = dqc1_output_state(Dqc1Instance(1.0, np.eye(8))).matrix
    assert np.allclose(m[8:, :8], np.eye(8) / 16)
    u = designed_unitary()
    m = dqc1_output_state(Dqc1Instance(1.0, u), check_circuit=True).matrix
    assert np.allclose(m[8:, :8], u / 16)


def test_block_form_equals_circuit():
    rng = np.random.default_rng(0)
    for mu in np.linspace(0.1, 1, 10):
        u = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, 8)))
        assert np.abs(output_state_blocks(mu, u) - output_state_circuit(mu, u)).max() < 1e-12


def test_alice_marginal():
    u = designed_unitary()
    mu = 0.7
    rho = dqc1_output_state(Dqc1Instance(mu, u))
    ra = partial_trace(rho.matrix, rho.layout, [0])
    assert ra[1, 0] == pytest.approx(mu * np.trace(u) / 16, abs=1e-14)
    assert ra[0, 0] == pytest.approx(0.5)


@pytest.mark.parametrize("mu", [0.25, 0.5, 1.0])
def test_trace_estimate(mu):
    u = designed_unitary()
    est = trace_estimate(dqc1_output_state(Dqc1Instance(mu, u)), mu)
    assert abs(est - np.sum(np.diag(u))) < 1e-10


def test_trace_estimate_examples():
    assert trace_estimate(dqc1_output_state(Dqc1Instance(1.0, np.eye(8))), 1.0) == pytest.approx(8)
    traceless = np.diag([1, -1] * 4).astype(complex)
    assert abs(trace_estimate(dqc1_output_state(Dqc1Instance(0.6, traceless)), 0.6)) < 1e-14
    with pytest.raises(ValueError, match="mu = 0"):
        trace_estimate(DensityMatrix(np.eye(16) / 16, 8), 0.0)


def test_entropic_formula():
    assert entropic_discord_dqc1(0.0) == pytest.approx(0, abs=1e-15)
    assert entropic_discord_dqc1(1.0) == pytest.approx(2 - np.log2(np.e))
    assert 0 < entropic_discord_dqc1(0.5) < 0.56
    with pytest.raises(ValueError):
        entropic_discord_dqc1(-0.1)


def test_sweep_examples_and_quadratic_law():
    rows = dqc1_sweep(np.linspace(0, 1, 21))
    assert (rows[0].d_g, rows[0].q, rows[0].entropic) == pytest.approx((0, 0, 0), abs=1e-15)
    assert rows[-1].d_g == pytest.approx(QUADRATIC_CONSTANTS["d_g"], abs=1e-6)
    assert rows[-1].q == pytest.approx(QUADRATIC_CONSTANTS["q"], abs=1e-6)
    assert rows[10].d_g == pytest.approx(rows[-1].d_g / 4, rel=1e-10)
    ratios = [r.d_g / r.mu**2 for r in rows[1:]]
    assert max(ratios) - min(ratios) < 1e-10
    for name in ("d_g", "q", "entropic"):
        vals = [getattr(r, name) for r in rows]
        assert np.all(np.diff(vals) >= -1e-15)
    coef = quadratic_coefficients(rows)
    assert coef["d_g"] == pytest.approx(rows[-1].d_g, rel=1e-10)


def test_sweep_rejects_out_of_range():
    with pytest.raises(ValueError):
        dqc1_sweep([0.5, 1.2])


def test_sweep_csv_format():
    buf = io.StringIO()
    write_sweep_csv(dqc1_sweep([0.0, 1.0]), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "mu,d_g,q,entropic"
    assert lines[2].startswith("1,0.05313250")
