"""Partial two-qubit tomography from fluorescence.

Only the four populations ``(a2, a~, a, d)`` of ``|00>, |01>, |10>, |11>``
and the double-quantum coherence ``rho[00,11] = b~ + i c~`` are
reconstructed.  Populations come from four readouts with interleaved pi
pulses; the coherence is moved onto the populations with a nuclear pi/2
pulse in four phase settings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .device import DEFAULT_BRIGHTNESS, ShotConfig, apply_unitary, conditional_rotation

COND_LIMIT = 1e8


class TomographyError(ValueError):
    pass


@dataclass(frozen=True)
class PlCalibration:
    """Mean fluorescence per readout of the four basis states."""

    pl00: float = DEFAULT_BRIGHTNESS[0]
    pl01: float = DEFAULT_BRIGHTNESS[1]
    pl10: float = DEFAULT_BRIGHTNESS[2]
    pl11: float = DEFAULT_BRIGHTNESS[3]

    def __post_init__(self):
        if min(self.values) <= 0:
            raise TomographyError("PL values must be positive")
        if self.pl01 == self.pl10:
            raise TomographyError("pl01 == pl10 makes the coherence readout singular")
        if self.condition_number > COND_LIMIT:
            raise TomographyError(f"PL matrix condition number {self.condition_number:.3g} too large")

    @classmethod
    def from_brightness(cls, brightness) -> "PlCalibration":
        return cls(*(float(x) for x in brightness))

    @property
    def values(self) -> np.ndarray:
        return np.array([self.pl00, self.pl01, self.pl10, self.pl11])

    @property
    def matrix(self) -> np.ndarray:
        """Rows map populations ``(a2, a~, a, d)`` to readouts M1..M4."""
        p00, p01, p10, p11 = self.values
        return np.array([
            [p00, p01, p10, p11],
            [p00, p11, p10, p01],
            [p01, p00, p10, p11],
            [p00, p10, p01, p11],
        ])

    @property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.matrix))


def _mw1_pi():
    # Phase pi gives the +i entries of the printed MW1 pi matrix.
    return conditional_rotation("MW1", math.pi, math.pi)


def _nuclear_pi_e0():
    return conditional_rotation("RF2", math.pi, 0.0)


def _nuclear_pi_e1():
    return conditional_rotation("RF1", math.pi, 0.0)


def _mw2_pi():
    return conditional_rotation("MW2", math.pi, 0.0)


# Nuclear pi/2 phases reproducing the four printed rotation matrices:
# P1 = (1/sqrt2)[[1, i], [i, 1]], P2 = [[1, -i], [-i, 1]],
# P3 = [[1, -1], [1, 1]], P4 = [[1, 1], [-1, 1]].
PHASE_CYCLE = {"P1": math.pi, "P2": 0.0, "P3": math.pi / 2, "P4": -math.pi / 2}
OFFDIAG_LABELS = {"P1": "X1", "P2": "X2", "P3": "Y1", "P4": "Y2"}


def _sequences() -> dict:
    seqs = {
        "M1": [],
        "M2": [_mw1_pi()],
        "M3": [_nuclear_pi_e0()],
        "M4": [_mw1_pi(), _nuclear_pi_e1(), _mw1_pi()],
    }
    for name, phase in PHASE_CYCLE.items():
        # The nuclear pi/2 acts where the electron is |0>, after MW1 pi has
        # moved the |11> coherence onto |01>.
        seqs[name] = [_mw1_pi(), conditional_rotation("RF2", math.pi / 2, phase), _mw2_pi()]
    return seqs


SEQUENCES = _sequences()
DIAGONAL_SEQUENCES = ("M1", "M2", "M3", "M4")
OFFDIAG_SEQUENCES = ("P1", "P2", "P3", "P4")


def sequence_unitary(name: str) -> np.ndarray:
    if name not in SEQUENCES:
        raise TomographyError(f"unknown sequence {name!r}")
    u = np.eye(4, dtype=complex)
    for step in SEQUENCES[name]:
        u = step @ u
    return u


def simulate_fluorescence(rho, sequence: str, pl: PlCalibration,
                          shots: ShotConfig | None = None,
                          rng: np.random.Generator | None = None) -> float:
    """Mean counts per readout after running ``sequence`` on ``rho``.

    With ``shots`` the total photon count over ``shots.repeats`` readouts is
    Poisson distributed and the per-readout average is returned.
    """
    final = apply_unitary(np.asarray(rho, dtype=complex), sequence_unitary(sequence))
    pops = np.clip(np.real(np.diag(final)), 0.0, None)
    expected = float(pops @ pl.values)
    if shots is None:
        return expected
    rng = rng if rng is not None else shots.rng()
    return rng.poisson(expected * shots.repeats) / shots.repeats


def diagonal_tomography(measurements, pl: PlCalibration) -> np.ndarray:
    """Solve the PL system for ``(a2, a~, a, d)``."""
    m = np.asarray(measurements, dtype=float)
    if m.shape != (4,):
        raise TomographyError("need exactly four diagonal readouts")
    if pl.condition_number > COND_LIMIT:
        raise TomographyError("PL matrix is ill-conditioned")
    return np.linalg.solve(pl.matrix, m)


def coherence_from_readouts(x1: float, x2: float, y1: float, y2: float,
                            pl: PlCalibration) -> tuple[float, float]:
    denom = 2.0 * (pl.pl01 - pl.pl10)
    return (x1 - x2) / denom, (y1 - y2) / denom


def off_diagonal_tomography(rho, pl: PlCalibration, shots: ShotConfig | None = None,
                            rng: np.random.Generator | None = None) -> tuple[float, float]:
    """Real and imaginary parts ``(b~, c~)`` of ``rho[00,11]``."""
    if shots is not None and rng is None:
        rng = shots.rng()
    x1, x2, y1, y2 = (simulate_fluorescence(rho, s, pl, shots, rng) for s in OFFDIAG_SEQUENCES)
    return coherence_from_readouts(x1, x2, y1, y2, pl)


def coherence_modulus(b: float, c: float) -> float:
    return math.hypot(b, c)


@dataclass(frozen=True)
class TomographyRecord:
    a2: float
    a_tilde: float
    a: float
    d: float
    b_tilde: float
    c_tilde: float
    tau: float = 0.0
    seed: int | None = None

    @property
    def populations(self) -> np.ndarray:
        return np.array([self.a2, self.a_tilde, self.a, self.d])

    @property
    def modulus(self) -> float:
        return coherence_modulus(self.b_tilde, self.c_tilde)

    def row(self) -> dict:
        return {
            "tau": self.tau,
            "a2": self.a2,
            "a_tilde": self.a_tilde,
            "a": self.a,
            "d": self.d,
            "b_tilde": self.b_tilde,
            "c_tilde": self.c_tilde,
            "modulus": self.modulus,
            "seed": self.seed,
        }


def partial_tomography(rho, pl: PlCalibration, shots: ShotConfig | None = None,
                       rng: np.random.Generator | None = None, tau: float = 0.0,
                       seed: int | None = None) -> TomographyRecord:
    """Run all eight readout sequences and reconstruct the partial matrix."""
    if shots is not None and rng is None:
        rng = shots.rng()
    m = [simulate_fluorescence(rho, s, pl, shots, rng) for s in DIAGONAL_SEQUENCES]
    pops = diagonal_tomography(m, pl)
    b, c = off_diagonal_tomography(rho, pl, shots, rng)
    return TomographyRecord(*pops, b, c, tau=tau, seed=seed)


def partial_density(a2: float, a_tilde: float, a: float, d: float,
                    b: float, c: float) -> np.ndarray:
    """Matrix with the given populations and ``rho[00,11] = b + i c``."""
    rho = np.diag([a2, a_tilde, a, d]).astype(complex)
    rho[0, 3] = b + 1j * c
    rho[3, 0] = b - 1j * c
    return rho
