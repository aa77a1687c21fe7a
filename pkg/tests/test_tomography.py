import math

import numpy as np
import pytest
from hypothesis import given

from nvqae import linalg
from nvqae.device import ShotConfig, prepare_state
from nvqae.experiments import random_partial_state
from nvqae.tomography import (
    PlCalibration,
    TomographyError,
    coherence_modulus,
    diagonal_tomography,
    off_diagonal_tomography,
    partial_density,
    partial_tomography,
    sequence_unitary,
    simulate_fluorescence,
)

from strategies import seeds

PL = PlCalibration()


def test_direct_readout_examples():
    assert simulate_fluorescence(prepare_state("00"), "M1", PL) == pytest.approx(PL.pl00)
    assert simulate_fluorescence(np.eye(4) / 4, "M1", PL) == pytest.approx(PL.values.mean())
    bell = simulate_fluorescence(prepare_state("bell"), "M1", PL)
    assert bell == pytest.approx((PL.pl00 + PL.pl11) / 2)


def test_diagonal_inversion_of_ground_state():
    m = [PL.pl00, PL.pl00, PL.pl01, PL.pl00]
    assert np.allclose(diagonal_tomography(m, PL), [1, 0, 0, 0], atol=1e-12)


def test_diagonal_readouts_match_pl_matrix(rng):
    pops = rng.dirichlet(np.ones(4))
    rho = np.diag(pops).astype(complex)
    m = [simulate_fluorescence(rho, s, PL) for s in ("M1", "M2", "M3", "M4")]
    assert np.allclose(m, PL.matrix @ pops, atol=1e-14)
    assert np.allclose(diagonal_tomography(m, PL), pops, atol=1e-10)


def test_bell_state_reconstruction():
    rec = partial_tomography(prepare_state("bell"), PL)
    assert np.allclose(rec.populations, [0.5, 0, 0, 0.5], atol=1e-10)
    assert (rec.b_tilde, rec.c_tilde) == pytest.approx((0.5, 0.0), abs=1e-10)


def test_imaginary_coherence_channel():
    # rho[00,11] = b + i c; (|00> - i|11>)/sqrt2 has rho[00,11] = +i/2
    minus_i = np.array([1, 0, 0, -1j]) / math.sqrt(2)
    b, c = off_diagonal_tomography(np.outer(minus_i, minus_i.conj()), PL)
    assert (b, c) == pytest.approx((0.0, 0.5), abs=1e-10)
    b, c = off_diagonal_tomography(prepare_state("bell-i"), PL)
    assert (b, c) == pytest.approx((0.0, -0.5), abs=1e-10)


def test_diagonal_state_has_no_coherence(rng):
    rho = np.diag(rng.dirichlet(np.ones(4))).astype(complex)
    assert off_diagonal_tomography(rho, PL) == pytest.approx((0.0, 0.0), abs=1e-12)


def test_modulus_examples():
    assert coherence_modulus(0.5, 0.0) == 0.5
    assert coherence_modulus(0.0, 0.0) == 0.0
    assert coherence_modulus(0.3, 0.4) == pytest.approx(0.5)


def test_pl_calibration_validation():
    with pytest.raises(TomographyError):
        PlCalibration(1.0, 0.8, 0.8, 0.6)
    with pytest.raises(TomographyError):
        PlCalibration(1.0, -0.1, 0.7, 0.6)
    with pytest.raises(TomographyError):
        sequence_unitary("M9")
    with pytest.raises(TomographyError):
        diagonal_tomography([1, 2, 3], PL)


def test_shot_noise_uses_poisson_counts():
    shots = ShotConfig(repeats=1000)
    vals = [simulate_fluorescence(prepare_state("00"), "M1", PL, shots, np.random.default_rng(s))
            for s in range(400)]
    assert np.mean(vals) == pytest.approx(PL.pl00, abs=4 * math.sqrt(PL.pl00 / 1000 / 400))
    assert np.std(vals) == pytest.approx(math.sqrt(PL.pl00 / 1000), rel=0.15)


@given(seeds)
def test_round_trip_exact(seed):
    rho = random_partial_state(np.random.default_rng(seed))
    assert linalg.is_density(rho)
    rec = partial_tomography(rho, PL)
    back = partial_density(*rec.populations, rec.b_tilde, rec.c_tilde)
    assert np.max(np.abs(back - rho)) <= 1e-10


@given(seeds)
def test_sequences_unitary_and_modulus_exact(seed):
    rng = np.random.default_rng(seed)
    rho = random_partial_state(rng)
    for name in ("M1", "M2", "M3", "M4", "P1", "P2", "P3", "P4"):
        assert linalg.is_unitary(sequence_unitary(name))
    rec = partial_tomography(rho, PL)
    assert rec.modulus == pytest.approx(abs(rho[0, 3]), abs=1e-10)
