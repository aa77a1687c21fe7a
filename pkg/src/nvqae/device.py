"""Effective two-qubit NV-center device.

The electron (qubit 0) and the 14N nucleus (qubit 1) are treated in their
rotating frames.  Pulses are ideal rectangles whose rotation angle is
``2*pi * duration * rabi``; the Rabi frequency comes from the drive voltage
through :func:`device_response`, which may be nonlinear.  Times are in
microseconds unless a field name says otherwise (pulse durations in ns).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from . import linalg
from .linalg import P0, P1, SX, SY, LinalgError

CHANNELS = ("MW1", "MW2", "RF1", "RF2")
DEFAULT_DURATION_NS = 800.0
DEFAULT_KAPPA = 3.81  # MHz/V; 0.164 V is a pi pulse at 800 ns


class DeviceError(ValueError):
    pass


@dataclass(frozen=True)
class PhysicalConstants:
    """Spin-Hamiltonian reference values (MHz, mT).

    Stored for provenance and reporting only; the rotating-frame dynamics do
    not use them.
    """

    D: float = 2870.0
    A_parallel: float = -2.153228
    Q: float = -4.945
    B_z: float = 52.0
    # ms=0 <-> ms=-1 lines at 52 mT; sample-specific, override from config.
    f_MW1: float = 1412.66
    f_MW2: float = 1414.81
    f_RF1: float = 5.101870
    f_RF2: float = 2.940878

    def __post_init__(self):
        for name in ("D", "A_parallel", "Q", "B_z", "f_MW1", "f_MW2", "f_RF1", "f_RF2"):
            if not math.isfinite(getattr(self, name)):
                raise DeviceError(f"{name} must be finite")


@dataclass(frozen=True)
class NoiseParams:
    """Decoherence times; ``math.inf`` disables a channel.

    ``t2_*`` are pure-dephasing times: the coherence factor from dephasing is
    ``exp(-tau/T2)`` and amplitude damping contributes its own
    ``exp(-tau/(2*T1))`` on top.
    """

    t2_electron_us: float = 2.22
    t2_nuclear_ms: float = 3.1
    t1_electron_ms: float = 6.0
    t1_nuclear_s: float = math.inf

    def __post_init__(self):
        for name in ("t2_electron_us", "t2_nuclear_ms", "t1_electron_ms", "t1_nuclear_s"):
            v = getattr(self, name)
            if not (v > 0):
                raise DeviceError(f"{name} must be positive or inf, got {v}")

    @classmethod
    def noiseless(cls) -> "NoiseParams":
        return cls(math.inf, math.inf, math.inf, math.inf)

    @property
    def t2_us(self) -> tuple[float, float]:
        return self.t2_electron_us, self.t2_nuclear_ms * 1e3

    @property
    def t1_us(self) -> tuple[float, float]:
        return self.t1_electron_ms * 1e3, self.t1_nuclear_s * 1e6


def _per_channel(value) -> dict:
    if isinstance(value, Mapping):
        out = {ch: float(value.get(ch, 0.0)) for ch in CHANNELS}
        unknown = set(value) - set(CHANNELS)
        if unknown:
            raise DeviceError(f"unknown channels {sorted(unknown)}")
        return out
    return {ch: float(value) for ch in CHANNELS}


@dataclass(frozen=True)
class CalibrationModel:
    """Voltage to Rabi-frequency map ``kappa*v*(1 + eta*v)`` per channel."""

    kappa: Mapping[str, float] = field(default_factory=lambda: _per_channel(DEFAULT_KAPPA))
    eta: Mapping[str, float] = field(default_factory=lambda: _per_channel(0.0))

    def __post_init__(self):
        object.__setattr__(self, "kappa", _per_channel(self.kappa))
        object.__setattr__(self, "eta", _per_channel(self.eta))
        for ch in CHANNELS:
            if not self.kappa[ch] > 0:
                raise DeviceError(f"kappa[{ch}] must be > 0")
            if self.eta[ch] < 0:
                raise DeviceError(f"eta[{ch}] must be >= 0")

    @classmethod
    def uniform(cls, kappa: float = DEFAULT_KAPPA, eta: float = 0.0) -> "CalibrationModel":
        return cls(kappa=_per_channel(kappa), eta=_per_channel(eta))

    def nominal(self) -> "CalibrationModel":
        """The same calibration with the nonlinearity removed (what a designer assumes)."""
        return replace(self, eta=_per_channel(0.0))

    def pi_voltage(self, channel: str, duration_ns: float = DEFAULT_DURATION_NS) -> float:
        """Voltage for a pi rotation assuming the linear response only."""
        return 1.0 / (2.0 * duration_ns * 1e-3 * self.kappa[channel])


@dataclass(frozen=True)
class PulseSpec:
    channel: str
    amplitude_volts: float
    phase: float = 0.0
    duration_ns: float = DEFAULT_DURATION_NS

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise DeviceError(f"invalid channel {self.channel!r}")
        if not self.duration_ns > 0:
            raise DeviceError("pulse duration must be > 0")
        if self.amplitude_volts < 0:
            raise DeviceError("pulse amplitude must be >= 0")


DEFAULT_BRIGHTNESS = (1.00, 0.85, 0.70, 0.60)


@dataclass(frozen=True)
class ShotConfig:
    repeats: int = 3_000_000
    rng_seed: int = 0
    brightness: tuple = DEFAULT_BRIGHTNESS

    def __post_init__(self):
        if self.repeats < 1:
            raise DeviceError("repeats must be >= 1")
        b = tuple(float(x) for x in self.brightness)
        if len(b) != 4 or min(b) <= 0 or len(set(b)) != 4:
            raise DeviceError("brightness needs four distinct positive values")
        object.__setattr__(self, "brightness", b)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.rng_seed)


def device_response(v: float, channel: str, cal: CalibrationModel) -> float:
    """Rabi frequency (MHz) produced by drive amplitude ``v`` (V) on ``channel``."""
    if v < 0:
        raise DeviceError(f"negative voltage {v}")
    if channel not in CHANNELS:
        raise DeviceError(f"invalid channel {channel!r}")
    return cal.kappa[channel] * v * (1.0 + cal.eta[channel] * v)


def _embed(channel: str, op2: np.ndarray) -> np.ndarray:
    if channel == "MW1":
        return np.kron(op2, P1)
    if channel == "MW2":
        return np.kron(op2, P0)
    if channel == "RF1":
        return np.kron(P1, op2)
    if channel == "RF2":
        return np.kron(P0, op2)
    raise DeviceError(f"invalid channel {channel!r}")


def conditional_rotation(channel: str, theta: float, phase: float = 0.0) -> np.ndarray:
    """``exp(-i*theta*(cos(phase) X + sin(phase) Y)/2)`` on the target, conditioned.

    MW1/MW2 rotate the electron when the nucleus is |1>/|0>; RF1/RF2 rotate
    the nucleus when the electron is |1>/|0>.
    """
    axis = 0.5 * (math.cos(phase) * SX + math.sin(phase) * SY)
    return linalg.expm_hermitian(_embed(channel, axis), theta)


def rotation_angle(p: PulseSpec, cal: CalibrationModel) -> float:
    rabi = device_response(p.amplitude_volts, p.channel, cal)
    return 2.0 * math.pi * p.duration_ns * 1e-3 * rabi


def pulse_unitary(p: PulseSpec, cal: CalibrationModel) -> np.ndarray:
    return conditional_rotation(p.channel, rotation_angle(p, cal), p.phase)


def _amplitude_damping(survival: float) -> list[np.ndarray]:
    # survival = exp(-tau/T1) = 1 - gamma
    return [
        np.array([[1, 0], [0, math.sqrt(survival)]], dtype=complex),
        np.array([[0, math.sqrt(1.0 - survival)], [0, 0]], dtype=complex),
    ]


def _phase_damping(coherence: float) -> list[np.ndarray]:
    # Off-diagonals scale by `coherence`; populations untouched.  Built from
    # the coherence directly so tiny factors keep full relative precision.
    return [
        np.array([[1, 0], [0, coherence]], dtype=complex),
        np.array([[0, 0], [0, math.sqrt(1.0 - coherence**2)]], dtype=complex),
    ]


def _decay(tau: float, time: float) -> float:
    return 1.0 if math.isinf(time) else math.exp(-tau / time)


def single_qubit_kraus(tau: float, t1: float, t2: float) -> list[np.ndarray]:
    """Kraus operators of amplitude damping (T1) followed by dephasing (T2)."""
    ad = _amplitude_damping(_decay(tau, t1))
    pd = _phase_damping(_decay(tau, t2))
    return [b @ a for a in ad for b in pd]


def free_evolution_kraus(tau: float, noise: NoiseParams) -> list[np.ndarray]:
    """Four-dimensional Kraus set for an idle period of ``tau`` microseconds."""
    if tau < 0:
        raise DeviceError(f"negative evolution time {tau}")
    (t2e, t2n), (t1e, t1n) = noise.t2_us, noise.t1_us
    ke = single_qubit_kraus(tau, t1e, t2e)
    kn = single_qubit_kraus(tau, t1n, t2n)
    return [np.kron(a, b) for a in ke for b in kn]


def apply_kraus(rho: np.ndarray, kraus: list[np.ndarray]) -> np.ndarray:
    return sum(k @ rho @ k.conj().T for k in kraus)


def free_evolution(rho, tau: float, noise: NoiseParams) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if tau < 0:
        raise DeviceError(f"negative evolution time {tau}")
    if tau == 0:
        return rho.copy()
    return apply_kraus(rho, free_evolution_kraus(tau, noise))


def apply_unitary(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    return u @ rho @ u.conj().T


def measure_populations(rho, shots: ShotConfig | None = None,
                        rng: np.random.Generator | None = None) -> np.ndarray:
    """Computational-basis populations, exact or as multinomial frequencies."""
    rho = np.asarray(rho, dtype=complex)
    probs = np.clip(np.real(np.diag(rho)), 0.0, None)
    probs = probs / probs.sum()
    if shots is None:
        return probs
    rng = rng if rng is not None else shots.rng()
    return rng.multinomial(shots.repeats, probs) / shots.repeats


NAMED_STATES = {
    "00": [1, 0, 0, 0],
    "01": [0, 1, 0, 0],
    "10": [0, 0, 1, 0],
    "11": [0, 0, 0, 1],
    "bell": [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)],
    "bell-": [1 / math.sqrt(2), 0, 0, -1 / math.sqrt(2)],
    "bell-i": [1 / math.sqrt(2), 0, 0, 1j / math.sqrt(2)],
}


def bell_type_vector(alpha2: float) -> np.ndarray:
    """``alpha|00> + beta|11>`` with real non-negative alpha and beta."""
    if not 0.0 <= alpha2 <= 1.0:
        raise DeviceError(f"alpha^2 = {alpha2} outside [0, 1]")
    return np.array([math.sqrt(alpha2), 0, 0, math.sqrt(1.0 - alpha2)], dtype=complex)


def prepare_state(spec) -> np.ndarray:
    """Ideal density matrix from an alpha^2 value, a named state or a vector."""
    if isinstance(spec, str):
        if spec not in NAMED_STATES:
            raise DeviceError(f"unknown named state {spec!r}")
        psi = np.array(NAMED_STATES[spec], dtype=complex)
    elif np.isscalar(spec):
        psi = bell_type_vector(float(spec))
    else:
        try:
            psi = linalg.normalized_vector(spec)
        except LinalgError as exc:
            raise DeviceError(str(exc)) from exc
        if psi.size != 4:
            raise DeviceError("two-qubit state needs 4 amplitudes")
    return np.outer(psi, psi.conj())


@dataclass(frozen=True)
class Device:
    """What the training loop and the protocols talk to.

    ``shots=None`` means exact populations.  ``readout_mixing`` is the
    fraction of the electron readout that is randomized by decoherence during
    the readout stage; it only affects the encoder cost measurement.
    """

    calibration: CalibrationModel = field(default_factory=CalibrationModel)
    noise: NoiseParams = field(default_factory=NoiseParams)
    shots: ShotConfig | None = field(default_factory=ShotConfig)
    readout_mixing: float = 0.1
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        if not 0.0 <= self.readout_mixing < 1.0:
            raise DeviceError("readout_mixing must be in [0, 1)")

    @classmethod
    def ideal(cls, calibration: CalibrationModel | None = None) -> "Device":
        return cls(
            calibration=calibration or CalibrationModel(),
            noise=NoiseParams.noiseless(),
            shots=None,
            readout_mixing=0.0,
        )

    @property
    def brightness(self) -> tuple:
        return (self.shots or ShotConfig()).brightness
