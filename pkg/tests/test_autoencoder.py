import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nvqae import linalg
from nvqae.autoencoder import (
    EncoderError,
    EncoderParams,
    PqcParams,
    apply_autoencoder_cycle,
    build_encoder,
    build_pqc,
    encoder_cost,
    euler_rotation,
    n_gates,
    pqc_layout,
    pqc_reconstruction_fidelity,
    pqc_trash_cost,
    readout_decoherence,
    refresh_electron,
    run_pqc_batch,
)
from nvqae.device import CalibrationModel, Device, NoiseParams, prepare_state
from nvqae.experiments import target_state

from strategies import random_density, random_state, seeds

CAL = CalibrationModel.uniform(3.81, 0.0)
IDEAL = Device.ideal(CAL)
V_PI = CAL.pi_voltage("MW1")


def electron_populations(rho):
    return linalg.partial_trace(rho, [2, 2], keep=[0]).diagonal().real


def test_zero_amplitudes_identity():
    assert np.allclose(build_encoder(EncoderParams(0.0, 0.0), CAL), np.eye(4))


@pytest.mark.parametrize("phi1", [0.0, 0.7, math.pi / 4, 2.0])
def test_pi_flip_encoder_moves_electron_to_zero(phi1):
    u = build_encoder(EncoderParams(V_PI, 0.0, phi1), CAL)
    for name in ("00", "11"):
        pops = electron_populations(u @ prepare_state(name) @ u.conj().T)
        assert pops[0] == pytest.approx(1.0, abs=1e-12)


def test_encoder_cost_examples():
    assert encoder_cost(EncoderParams(0.0, 0.0), IDEAL) == pytest.approx(0.5)
    assert encoder_cost(EncoderParams(V_PI, 0.0), IDEAL) == pytest.approx(1.0)


def test_readout_mixing_caps_cost():
    dev = Device(CAL, NoiseParams.noiseless(), None, 0.1)
    assert encoder_cost(EncoderParams(V_PI, 0.0), dev) == pytest.approx(0.95)


def test_noisy_cost_close_to_ideal():
    dev = Device(CAL, NoiseParams(), readout_mixing=0.0)
    p = EncoderParams()
    noisy = encoder_cost(p, dev, np.random.default_rng(3))
    assert noisy == pytest.approx(encoder_cost(p, IDEAL), abs=3e-3)


def test_negative_amplitude_rejected():
    with pytest.raises(EncoderError):
        EncoderParams(-0.1, 0.0)


def test_cycle_round_trip_noiseless():
    rho = prepare_state("bell")
    out = apply_autoencoder_cycle(rho, EncoderParams(V_PI, 0.0), 0.0,
                                  NoiseParams.noiseless(), CAL)
    assert np.allclose(out, rho, atol=1e-10)


def test_cycle_nuclear_storage_decay():
    noise = NoiseParams()
    tau = noise.t2_us[1]
    out = apply_autoencoder_cycle(prepare_state("bell"), EncoderParams(V_PI, 0.0), tau, noise, CAL)
    assert abs(out[0, 3]) == pytest.approx(0.5 * math.exp(-1), rel=1e-9)


def test_imperfect_encoder_loses_fidelity():
    p = EncoderParams(0.8 * V_PI, 0.0)
    assert encoder_cost(p, IDEAL) < 1.0
    rho = prepare_state("bell")
    out = apply_autoencoder_cycle(rho, p, 0.0, NoiseParams.noiseless(), CAL)
    psi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert linalg.fidelity_pure(psi, out) < 1.0


def test_refresh_and_postselect():
    rho = prepare_state("bell")
    refreshed = refresh_electron(rho)
    assert np.allclose(electron_populations(refreshed), [1, 0])
    kept = refresh_electron(rho, postselect=True)
    assert np.allclose(kept, prepare_state("00"))
    with pytest.raises(EncoderError):
        refresh_electron(prepare_state("11"), postselect=True)


def test_readout_decoherence_keeps_trace(rng):
    rho = random_density(rng, 4)
    out = readout_decoherence(rho, 0.3)
    assert linalg.is_density(out)
    assert np.allclose(linalg.partial_trace(out, [2, 2], [1]), linalg.partial_trace(rho, [2, 2], [1]))


# --- parameterized circuit ---------------------------------------------------


def test_gate_count_formula():
    assert n_gates(2) == 6
    assert PqcParams(2, 1).n_angles == 18
    assert len(pqc_layout(3)) == n_gates(3) == 12


def test_zero_angles_identity():
    for n in (2, 3, 4):
        assert np.allclose(build_pqc(PqcParams(n, 1)), np.eye(2**n))


def _explicit_pqc(p: PqcParams) -> np.ndarray:
    """Oracle: assemble the circuit from full-size matrices."""
    n = p.n_qubits
    u = np.eye(2**n, dtype=complex)
    for k, gate in enumerate(p.layout):
        r = euler_rotation(*p.angles[3 * k:3 * k + 3])
        if gate[0] == "rot":
            ops = [np.eye(2)] * n
            ops[gate[1]] = r
            g = linalg.kron_all(*ops)
        else:
            _, c, t = gate
            off = [np.eye(2)] * n
            off[c] = linalg.P0
            on = [np.eye(2)] * n
            on[c] = linalg.P1
            on[t] = r
            g = linalg.kron_all(*off) + linalg.kron_all(*on)
        u = g @ u
    return u


@given(seeds, st.sampled_from([2, 3, 4]))
def test_pqc_matches_explicit_oracle_and_is_unitary(seed, n):
    rng = np.random.default_rng(seed)
    p = PqcParams(n, 1, rng.uniform(-np.pi, np.pi, 3 * n_gates(n)))
    u = build_pqc(p)
    assert linalg.is_unitary(u)
    assert np.allclose(u, _explicit_pqc(p), atol=1e-12)


def test_trash_cost_identity_examples():
    assert pqc_trash_cost(PqcParams(3, 1), np.eye(8)[0]) == pytest.approx(1.0)
    ghz, n, n_latent = target_state("ghz3")
    p = PqcParams(n, n_latent)
    assert pqc_trash_cost(p, ghz) == pytest.approx(0.5)
    # identity on GHZ: overlap 0.5 but reconstruction fidelity only 0.25
    assert pqc_reconstruction_fidelity(p, ghz) == pytest.approx(0.25)


def test_batched_run_matches_single(rng):
    psi = random_state(rng, 8)
    batch = rng.uniform(-np.pi, np.pi, (5, 3 * n_gates(3)))
    out = run_pqc_batch(batch, 3, psi)
    for row, state in zip(batch, out):
        assert np.allclose(build_pqc(PqcParams(3, 1, row)) @ psi, state)


@given(seeds, st.sampled_from([(2, 1), (3, 1), (3, 2), (4, 2)]), st.floats(0, 2 * np.pi))
def test_trash_cost_bounds_reconstruction(seed, shape, phase):
    rng = np.random.default_rng(seed)
    n, n_latent = shape
    p = PqcParams(n, n_latent, rng.uniform(-np.pi, np.pi, 3 * n_gates(n)))
    psi = random_state(rng, 2**n)
    c = pqc_trash_cost(p, psi)
    f = pqc_reconstruction_fidelity(p, psi)
    assert c**2 - 1e-10 <= f <= c + 1e-10
    # global phase of the input is irrelevant
    assert pqc_trash_cost(p, np.exp(1j * phase) * psi) == pytest.approx(c, abs=1e-12)


@given(st.floats(0.0, 0.3), st.floats(0.0, 0.3), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi),
       st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_cost_invariant_under_pulse_phases(b1, b2, phi1, phi2, psi1, psi2):
    a = encoder_cost(EncoderParams(b1, b2, phi1, phi2), IDEAL)
    b = encoder_cost(EncoderParams(b1, b2, psi1, psi2), IDEAL)
    assert a == pytest.approx(b, abs=1e-12)
    assert 0.0 <= a <= 1.0 + 1e-12


@given(st.floats(0.0, 0.3), st.floats(0.0, 0.3), st.floats(0, 2 * np.pi))
def test_encoder_unitary(b1, b2, phi):
    assert linalg.is_unitary(build_encoder(EncoderParams(b1, b2, phi, phi), CAL))
