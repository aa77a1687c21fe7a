import math

import numpy as np
import pytest

from nvqae.autoencoder import EncoderParams
from nvqae.device import CalibrationModel, Device, NoiseParams
from nvqae.experiments import (
    ProtocolError,
    ProtocolSpec,
    Sampling,
    alpha_sweep,
    cnot_voltage,
    protocol_state,
    run_protocol,
    target_state,
    tomography_selftest,
    train_encoder,
)

CAL = CalibrationModel.uniform(3.81, 0.0)
V_PI = CAL.pi_voltage("MW1")
PERFECT = EncoderParams(V_PI, 0.0)
# default decoherence, exact tomography
EXACT = Device(CAL, NoiseParams(), None, 0.1)


def test_bare_bell_ideal_at_zero():
    curve = run_protocol(ProtocolSpec("bare", (0.0,)), Device.ideal(CAL))
    assert curve.values[0] == pytest.approx(0.5, abs=1e-12)


def test_bare_bell_one_electron_t2():
    curve = run_protocol(ProtocolSpec("bare", (2.22,)), EXACT)
    # nuclear dephasing and electron T1 each contribute a factor within 1e-3 of 1
    assert curve.values[0] == pytest.approx(0.5 * math.exp(-1), rel=1e-3)
    assert curve.values[0] == pytest.approx(0.1838, abs=5e-4)


def test_sweep_closed_forms():
    rows = alpha_sweep(EXACT, PERFECT, (0.0, 0.25, 0.5), 300.0)
    decay = math.exp(-300.0 / 3100.0)
    assert rows[0]["bare"] == pytest.approx(0.0, abs=1e-12)
    assert rows[0]["encoded"] == pytest.approx(0.0, abs=1e-12)
    assert rows[1]["encoded"] == pytest.approx(math.sqrt(0.25 * 0.75) * decay, rel=1e-9)
    assert rows[1]["encoded"] == pytest.approx(0.393, abs=1e-3)
    assert rows[2]["encoded"] == pytest.approx(0.454, abs=1e-3)
    assert rows[2]["bare"] == pytest.approx(0.0, abs=1e-12)


def test_cnot_matches_perfect_autoencoder_exactly_without_shots():
    grid = (0.0, 1000.0, 3000.0)
    cnot = run_protocol(ProtocolSpec("cnot", grid), EXACT)
    ae = run_protocol(ProtocolSpec("autoencoder", grid, encoder=PERFECT), EXACT)
    assert np.allclose(cnot.values, ae.values, atol=1e-12)


def test_cnot_and_perfect_autoencoder_agree_within_shot_noise():
    device = Device(CAL, NoiseParams())
    grid = (0.0, 1500.0, 3000.0, 4500.0)
    sampling = Sampling(repeats=20, bootstrap=50, seed=2)
    cnot = run_protocol(ProtocolSpec("cnot", grid), device, sampling)
    ae = run_protocol(ProtocolSpec("autoencoder", grid, encoder=PERFECT), device, sampling)
    for c, a, sc, sa in zip(cnot.values, ae.values, cnot.stderr, ae.stderr):
        assert abs(c - a) <= 3 * math.hypot(sc, sa)


def test_nominal_cnot_misses_pi_under_nonlinearity():
    cal = CalibrationModel.uniform(3.81, 0.25)
    device = Device(cal, NoiseParams(), None, 0.1)
    nominal = cnot_voltage(device, "nominal")
    exact = cnot_voltage(device, "exact")
    assert nominal == pytest.approx(V_PI)
    assert 3.81 * exact * (1 + 0.25 * exact) == pytest.approx(0.625, rel=1e-12)
    bad = protocol_state(ProtocolSpec("cnot", (0.0,)), 0.0, device)
    good = protocol_state(ProtocolSpec("cnot", (0.0,), cnot_mode="exact"), 0.0, device)
    assert abs(bad[0, 3]) < abs(good[0, 3])
    assert abs(good[0, 3]) == pytest.approx(0.5, abs=1e-12)


def test_trained_encoder_under_nonlinearity_is_near_perfect():
    cal = CalibrationModel.uniform(3.81, 0.25)
    trace = train_encoder(Device(cal))
    assert trace.converged
    assert trace.final_cost >= 0.999


def test_protocol_spec_validation():
    with pytest.raises(ProtocolError):
        ProtocolSpec("teleport")
    with pytest.raises(ProtocolError):
        ProtocolSpec("autoencoder")
    with pytest.raises(ProtocolError):
        ProtocolSpec("bare", (2.0, 1.0))
    with pytest.raises(ProtocolError):
        ProtocolSpec("cnot", cnot_mode="magic")


def test_protocol_replay_deterministic():
    device = Device(CAL, NoiseParams())
    spec = ProtocolSpec("bare", (0.0, 2.0))
    a = run_protocol(spec, device, Sampling(5, 10, 9))
    b = run_protocol(spec, device, Sampling(5, 10, 9))
    assert a.values == b.values and a.stderr == b.stderr


@pytest.mark.parametrize("case,n,latent", [("ghz3", 3, 1), ("w3", 3, 1), ("cat4", 4, 2)])
def test_target_states(case, n, latent):
    psi, nq, nl = target_state(case)
    assert (nq, nl) == (n, latent)
    assert np.linalg.norm(psi) == pytest.approx(1.0)
    if case == "cat4":
        assert psi[4].real == pytest.approx(math.sqrt(5 / 136))
    with pytest.raises(ProtocolError):
        target_state("ghz9")


def test_tomography_selftest_small():
    report = tomography_selftest(n_states=10, n_seeds=20, seed=1)
    assert report["ideal_max_error"] <= 1e-10
    assert len(report["bias_z"]) == 6
    assert len(report["records"]) == 30
