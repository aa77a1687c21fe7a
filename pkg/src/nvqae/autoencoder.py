"""Encoders: the two-pulse NV encoder and the n-qubit parameterized circuit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import linalg
from .device import (
    DEFAULT_DURATION_NS,
    CalibrationModel,
    Device,
    NoiseParams,
    PulseSpec,
    apply_unitary,
    free_evolution,
    measure_populations,
    prepare_state,
    pulse_unitary,
)
from .linalg import P0


class EncoderError(ValueError):
    pass


@dataclass(frozen=True)
class EncoderParams:
    b1_volts: float = 0.02
    b2_volts: float = 0.1
    phi1: float = math.pi / 4
    phi2: float = math.pi / 4
    duration_ns: float = DEFAULT_DURATION_NS

    def __post_init__(self):
        if self.b1_volts < 0 or self.b2_volts < 0:
            raise EncoderError("encoder amplitudes must be >= 0")

    def with_amplitudes(self, b1: float, b2: float) -> "EncoderParams":
        return replace(self, b1_volts=b1, b2_volts=b2)

    def to_dict(self) -> dict:
        return {
            "b1_volts": self.b1_volts,
            "b2_volts": self.b2_volts,
            "phi1": self.phi1,
            "phi2": self.phi2,
            "duration_ns": self.duration_ns,
        }


def build_encoder(p: EncoderParams, cal: CalibrationModel) -> np.ndarray:
    """``U_MW2 @ U_MW1``: MW1 acts first."""
    u1 = pulse_unitary(PulseSpec("MW1", p.b1_volts, p.phi1, p.duration_ns), cal)
    u2 = pulse_unitary(PulseSpec("MW2", p.b2_volts, p.phi2, p.duration_ns), cal)
    return u2 @ u1


def refresh_electron(rho: np.ndarray, postselect: bool = False) -> np.ndarray:
    """Reset the electron to |0> while keeping the nuclear state.

    With ``postselect`` the electron-|0> branch is kept and renormalized
    instead; a state with no weight there raises.
    """
    if postselect:
        proj = np.kron(P0, np.eye(2))
        kept = proj @ rho @ proj
        weight = np.trace(kept).real
        if weight <= 1e-15:
            raise EncoderError("post-selection on electron |0> has zero probability")
        return kept / weight
    nuclear = linalg.partial_trace(rho, [2, 2], keep=[1])
    return np.kron(P0, nuclear)


def readout_decoherence(rho: np.ndarray, mixing: float) -> np.ndarray:
    """Randomize the electron with probability ``mixing`` before readout."""
    if mixing == 0:
        return rho
    nuclear = linalg.partial_trace(rho, [2, 2], keep=[1])
    return (1.0 - mixing) * rho + mixing * np.kron(np.eye(2) / 2, nuclear)


def electron_zero_probability(rho: np.ndarray, device: Device,
                              rng: np.random.Generator | None = None) -> float:
    rho = readout_decoherence(rho, device.readout_mixing)
    pops = measure_populations(rho, device.shots, rng)
    return float(pops[0] + pops[1])


def encoder_cost_terms(p: EncoderParams, device: Device,
                       rng: np.random.Generator | None = None) -> tuple[float, float]:
    """Electron-|0> probabilities after encoding |00> and |11>."""
    u = build_encoder(p, device.calibration)
    if device.shots is not None and rng is None:
        rng = device.shots.rng()
    return tuple(
        electron_zero_probability(apply_unitary(prepare_state(name), u), device, rng)
        for name in ("00", "11")
    )


def encoder_cost(p: EncoderParams, device: Device,
                 rng: np.random.Generator | None = None) -> float:
    """Mean electron-|0> probability over the |00> and |11> experiments."""
    p00, p11 = encoder_cost_terms(p, device, rng)
    return 0.5 * (p00 + p11)


def apply_autoencoder_cycle(rho_in, p: EncoderParams, tau: float, noise: NoiseParams,
                            cal: CalibrationModel, postselect: bool = False) -> np.ndarray:
    """Encode, discard the electron, store for ``tau`` us, refresh, decode."""
    u = build_encoder(p, cal)
    return storage_cycle(rho_in, u, u.conj().T, tau, noise, postselect=postselect)


def storage_cycle(rho_in, encode: np.ndarray, decode: np.ndarray, tau: float,
                  noise: NoiseParams, postselect: bool = False,
                  refresh: bool = True) -> np.ndarray:
    rho = apply_unitary(np.asarray(rho_in, dtype=complex), encode)
    if refresh:
        rho = refresh_electron(rho, postselect)
    rho = free_evolution(rho, tau, noise)
    if refresh:
        rho = refresh_electron(rho, postselect)
    return apply_unitary(rho, decode)


# --- n-qubit parameterized circuit -----------------------------------------


def n_gates(n_qubits: int) -> int:
    return n_qubits * (n_qubits - 1) + 2 * n_qubits


def pqc_layout(n_qubits: int) -> list[tuple]:
    """Gate list: per-qubit Euler layer, controlled rotations, per-qubit layer.

    Entries are ``("rot", q)`` or ``("crot", control, target)``; each gate
    consumes three consecutive angles.
    """
    first = [("rot", q) for q in range(n_qubits)]
    middle = [("crot", c, t) for c in range(n_qubits) for t in range(n_qubits) if c != t]
    last = [("rot", q) for q in range(n_qubits)]
    return first + middle + last


@dataclass(frozen=True)
class PqcParams:
    n_qubits: int
    n_latent: int
    angles: tuple = field(default=())

    def __post_init__(self):
        if self.n_qubits < 2 or 2**self.n_qubits > linalg.MAX_DIM:
            raise EncoderError(f"n_qubits must be in [2, 4], got {self.n_qubits}")
        if not 1 <= self.n_latent < self.n_qubits:
            raise EncoderError("need 1 <= n_latent < n_qubits")
        angles = tuple(float(a) for a in self.angles) or (0.0,) * self.n_angles
        if len(angles) != self.n_angles:
            raise EncoderError(f"expected {self.n_angles} angles, got {len(angles)}")
        object.__setattr__(self, "angles", angles)

    @property
    def n_angles(self) -> int:
        return 3 * n_gates(self.n_qubits)

    @property
    def n_trash(self) -> int:
        return self.n_qubits - self.n_latent

    @property
    def layout(self) -> list[tuple]:
        return pqc_layout(self.n_qubits)

    def with_angles(self, angles) -> "PqcParams":
        return replace(self, angles=tuple(angles))


def euler_batch(angles: np.ndarray) -> np.ndarray:
    """``Rz(g) Ry(b) Rz(a)`` for rows ``(a, b, g)``; shape (B, 2, 2)."""
    a, b, g = angles[:, 0], angles[:, 1], angles[:, 2]
    cb, sb = np.cos(b / 2), np.sin(b / 2)
    out = np.empty((angles.shape[0], 2, 2), dtype=complex)
    out[:, 0, 0] = np.exp(-0.5j * (a + g)) * cb
    out[:, 0, 1] = -np.exp(0.5j * (a - g)) * sb
    out[:, 1, 0] = np.exp(-0.5j * (a - g)) * sb
    out[:, 1, 1] = np.exp(0.5j * (a + g)) * cb
    return out


def euler_rotation(a: float, b: float, g: float) -> np.ndarray:
    return euler_batch(np.array([[a, b, g]], dtype=float))[0]


def _apply_1q(states: np.ndarray, mats: np.ndarray, q: int) -> np.ndarray:
    # states: (B, 2, ..., 2); qubit q sits on axis q + 1.
    moved = np.moveaxis(states, q + 1, 1)
    shape = moved.shape
    flat = moved.reshape(shape[0], 2, -1)
    out = np.einsum("bij,bjk->bik", mats, flat).reshape(shape)
    return np.moveaxis(out, 1, q + 1)


def run_pqc_batch(angle_batch: np.ndarray, n_qubits: int, psi: np.ndarray) -> np.ndarray:
    """Apply the circuit for every row of ``angle_batch`` to ``psi``.

    Returns states of shape ``(B, 2**n)``.
    """
    angle_batch = np.atleast_2d(np.asarray(angle_batch, dtype=float))
    batch = angle_batch.shape[0]
    states = np.broadcast_to(np.asarray(psi, dtype=complex).reshape((1,) + (2,) * n_qubits),
                             (batch,) + (2,) * n_qubits).copy()
    for k, gate in enumerate(pqc_layout(n_qubits)):
        mats = euler_batch(angle_batch[:, 3 * k:3 * k + 3])
        if gate[0] == "rot":
            states = _apply_1q(states, mats, gate[1])
        else:
            _, c, t = gate
            idx = [slice(None)] * (n_qubits + 1)
            idx[c + 1] = 1
            idx = tuple(idx)
            # Target axis index shifts down by one once the control axis is sliced out.
            t_sub = t if t < c else t - 1
            states[idx] = _apply_1q(states[idx], mats, t_sub)
    return states.reshape(batch, -1)


def build_pqc(p: PqcParams) -> np.ndarray:
    dim = 2**p.n_qubits
    cols = [run_pqc_batch(np.array([p.angles]), p.n_qubits, linalg.basis_vector(j, dim))[0]
            for j in range(dim)]
    return np.stack(cols, axis=1)


def trash_overlap_batch(states: np.ndarray, n_qubits: int, n_trash: int) -> np.ndarray:
    """Probability that the first ``n_trash`` qubits read all zeros, per row."""
    latent_dim = 2 ** (n_qubits - n_trash)
    return np.sum(np.abs(states[:, :latent_dim]) ** 2, axis=1)


def pqc_trash_cost(p: PqcParams, psi) -> float:
    """``<0...0| tr_latent(U rho U^dag) |0...0>`` on the trash register."""
    psi = linalg.normalized_vector(psi)
    if psi.size != 2**p.n_qubits:
        raise EncoderError(f"input has {psi.size} amplitudes, circuit expects {2**p.n_qubits}")
    out = run_pqc_batch(np.array([p.angles]), p.n_qubits, psi)
    return float(trash_overlap_batch(out, p.n_qubits, p.n_trash)[0])


def pqc_reconstruction(p: PqcParams, psi) -> np.ndarray:
    """Density matrix after encode, trash refresh to |0...0>, and adjoint decode."""
    psi = linalg.normalized_vector(psi)
    u = build_pqc(p)
    rho = apply_unitary(np.outer(psi, psi.conj()), u)
    d_trash, d_latent = 2**p.n_trash, 2**p.n_latent
    latent = linalg.partial_trace(rho, [d_trash, d_latent], keep=[1])
    ref = np.zeros((d_trash, d_trash), dtype=complex)
    ref[0, 0] = 1.0
    return apply_unitary(np.kron(ref, latent), u.conj().T)


def pqc_reconstruction_fidelity(p: PqcParams, psi) -> float:
    return linalg.fidelity_pure(psi, pqc_reconstruction(p, psi))
