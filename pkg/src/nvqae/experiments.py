"""Lifetime protocols, the alpha^2 sweep and the multi-qubit runs."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .autoencoder import (
    EncoderParams,
    PqcParams,
    apply_autoencoder_cycle,
    pqc_reconstruction_fidelity,
    storage_cycle,
)
from .device import (
    Device,
    PulseSpec,
    ShotConfig,
    free_evolution,
    prepare_state,
    pulse_unitary,
)
from .fitting import FitResult, fit_exponential
from .hqca import FdConfig, HqcaConfig, TrainingTrace, fd_train_pqc, hqca_train
from .tomography import PlCalibration, partial_density, partial_tomography

log = logging.getLogger(__name__)

KINDS = ("bare", "cnot", "autoencoder")
_KIND_ID = {k: i for i, k in enumerate(KINDS)}

BARE_GRID_US = tuple(2.0 * k for k in range(7))  # 0..12 us
ENCODED_GRID_US = tuple(500.0 * k for k in range(13))  # 0..6 ms


class ProtocolError(ValueError):
    pass


@dataclass(frozen=True)
class ProtocolSpec:
    kind: str
    tau_grid: tuple = BARE_GRID_US
    alpha2: float = 0.5
    encoder: EncoderParams | None = None
    cnot_mode: str = "nominal"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ProtocolError(f"unknown protocol {self.kind!r}")
        grid = tuple(float(t) for t in self.tau_grid)
        if not grid or grid[0] < 0 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ProtocolError("tau grid must be nonnegative and strictly increasing")
        object.__setattr__(self, "tau_grid", grid)
        if self.cnot_mode not in ("nominal", "exact"):
            raise ProtocolError(f"unknown cnot mode {self.cnot_mode!r}")
        if self.kind == "autoencoder" and self.encoder is None:
            raise ProtocolError("autoencoder protocol needs encoder parameters")


@dataclass
class DecayCurve:
    kind: str
    taus: list
    values: list
    stderr: list
    alpha2: float = 0.5
    repeats: int = 1
    meta: dict = field(default_factory=dict)

    def rows(self) -> list[dict]:
        return [{"tau_us": t, "modulus": v, "stderr": s}
                for t, v, s in zip(self.taus, self.values, self.stderr)]


@dataclass(frozen=True)
class Sampling:
    """How many shot-noise repetitions per point and how to bootstrap them."""

    repeats: int = 100
    bootstrap: int = 50
    seed: int = 0


def cnot_voltage(device: Device, mode: str = "nominal", duration_ns: float = 800.0) -> float:
    """MW1 amplitude meant to give a pi rotation.

    ``nominal`` uses only the linear coefficient, as a designer without a
    nonlinearity model would; ``exact`` inverts the true response.
    """
    cal = device.calibration
    v_lin = cal.pi_voltage("MW1", duration_ns)
    eta = cal.eta["MW1"]
    if mode == "nominal" or eta == 0:
        return v_lin
    # kappa*v*(1 + eta*v) = kappa*v_lin  ->  eta*v^2 + v - v_lin = 0
    return (-1.0 + math.sqrt(1.0 + 4.0 * eta * v_lin)) / (2.0 * eta)


def protocol_state(spec: ProtocolSpec, tau: float, device: Device) -> np.ndarray:
    """Exact state handed to tomography after storage time ``tau``."""
    rho = prepare_state(spec.alpha2)
    if spec.kind == "bare":
        return free_evolution(rho, tau, device.noise)
    if spec.kind == "cnot":
        v = cnot_voltage(device, spec.cnot_mode)
        u = pulse_unitary(PulseSpec("MW1", v, 0.0), device.calibration)
        return storage_cycle(rho, u, u, tau, device.noise)
    return apply_autoencoder_cycle(rho, spec.encoder, tau, device.noise, device.calibration)


def _bootstrap_se(samples: np.ndarray, resamples: int, rng: np.random.Generator) -> float:
    if samples.size < 2 or resamples < 1:
        return 0.0
    idx = rng.integers(0, samples.size, size=(resamples, samples.size))
    return float(np.std(samples[idx].mean(axis=1), ddof=1))


def run_protocol(spec: ProtocolSpec, device: Device,
                 sampling: Sampling = Sampling()) -> DecayCurve:
    """Coherence modulus versus storage time for one protocol.

    Each (protocol, tau index, repetition) cell draws shot noise from its own
    generator, so results do not depend on evaluation order.
    """
    pl = PlCalibration.from_brightness(device.brightness)
    values, errors = [], []
    repeats = 1 if device.shots is None else sampling.repeats
    for i, tau in enumerate(spec.tau_grid):
        rho = protocol_state(spec, tau, device)
        mods = []
        for r in range(repeats):
            rng = None
            if device.shots is not None:
                rng = np.random.default_rng([sampling.seed, _KIND_ID[spec.kind], i, r])
            mods.append(partial_tomography(rho, pl, device.shots, rng, tau=tau).modulus)
        mods = np.array(mods)
        boot_rng = np.random.default_rng([sampling.seed, _KIND_ID[spec.kind], i, 1_000_003])
        values.append(float(mods.mean()))
        errors.append(_bootstrap_se(mods, sampling.bootstrap, boot_rng))
    meta = {"cnot_mode": spec.cnot_mode} if spec.kind == "cnot" else {}
    if spec.encoder is not None and spec.kind == "autoencoder":
        meta["encoder"] = spec.encoder.to_dict()
    return DecayCurve(spec.kind, list(spec.tau_grid), values, errors,
                      alpha2=spec.alpha2, repeats=repeats, meta=meta)


def fit_curve(curve: DecayCurve, bootstrap: int = 0, seed: int = 0) -> FitResult:
    sigma = curve.stderr if all(s > 0 for s in curve.stderr) else None
    return fit_exponential(curve.taus, curve.values, sigma, bootstrap=bootstrap, seed=seed)


def train_encoder(device: Device, cfg: HqcaConfig | None = None) -> TrainingTrace:
    """HQCA training of the encoder used by the storage protocols.

    The loop sees the true (possibly nonlinear) drive response but exact
    readout, so it can settle on the real pi pulse rather than stopping at
    the readout-limited cost.
    """
    cfg = cfg or HqcaConfig(target_cost=0.999, max_iterations=60)
    return hqca_train(cfg, Device.ideal(device.calibration))


def encoder_from_trace(trace: TrainingTrace) -> EncoderParams:
    return EncoderParams(**trace.final_params)


@dataclass
class LifetimeResult:
    curves: dict
    fits: dict

    def summary(self) -> dict:
        return {k: f.to_dict() for k, f in self.fits.items()}


def run_lifetimes(device: Device, encoder: EncoderParams,
                  kinds: Sequence[str] = KINDS, sampling: Sampling = Sampling(),
                  bare_grid=BARE_GRID_US, encoded_grid=ENCODED_GRID_US,
                  alpha2: float = 0.5, cnot_mode: str = "nominal",
                  fit_bootstrap: int = 0) -> LifetimeResult:
    curves, fits = {}, {}
    for kind in kinds:
        grid = bare_grid if kind == "bare" else encoded_grid
        spec = ProtocolSpec(kind, grid, alpha2,
                            encoder if kind == "autoencoder" else None, cnot_mode)
        curves[kind] = run_protocol(spec, device, sampling)
        fits[kind] = fit_curve(curves[kind], fit_bootstrap, sampling.seed)
        log.info("%s lifetime %.4g us", kind, fits[kind].t)
    return LifetimeResult(curves, fits)


SWEEP_ALPHAS = (0.0, 0.25, 0.5, 0.75, 1.0)


def alpha_sweep(device: Device, encoder: EncoderParams, alphas=SWEEP_ALPHAS,
                tau: float = 300.0, sampling: Sampling = Sampling()) -> list[dict]:
    """Residual |00><11| coherence after ``tau`` us, with and without encoding."""
    rows = []
    for a2 in alphas:
        bare = run_protocol(ProtocolSpec("bare", (tau,), a2), device, sampling)
        enc = run_protocol(ProtocolSpec("autoencoder", (tau,), a2, encoder), device, sampling)
        rows.append({
            "alpha2": a2,
            "bare": bare.values[0],
            "bare_stderr": bare.stderr[0],
            "encoded": enc.values[0],
            "encoded_stderr": enc.stderr[0],
        })
    return rows


# --- multi-qubit compression ------------------------------------------------


def target_state(case: str) -> tuple[np.ndarray, int, int]:
    """``(state, n_qubits, n_latent)`` for ghz3, w3 or cat4."""
    if case == "ghz3":
        psi = np.zeros(8, dtype=complex)
        psi[0] = psi[7] = 1 / math.sqrt(2)
        return psi, 3, 1
    if case == "w3":
        psi = np.zeros(8, dtype=complex)
        psi[[1, 2, 4]] = 1 / math.sqrt(3)
        return psi, 3, 1
    if case == "cat4":
        psi = np.sqrt(np.arange(1, 17) / 136.0).astype(complex)
        return psi, 4, 2
    raise ProtocolError(f"unknown multi-qubit case {case!r}")


MULTIQUBIT_CASES = ("ghz3", "w3", "cat4")


@dataclass
class MultiQubitResult:
    case: str
    best_fidelity: float
    best_seed: int
    reconstruction_fidelity: float
    traces: list

    def to_dict(self, full: bool = False) -> dict:
        out = {
            "case": self.case,
            "best_fidelity": self.best_fidelity,
            "best_seed": self.best_seed,
            "reconstruction_fidelity": self.reconstruction_fidelity,
            "per_seed": [
                {"seed": t.seed, "final_fidelity": t.final_fidelity,
                 "iterations": len(t.fidelities), "status": t.status}
                for t in self.traces
            ],
        }
        if full:
            out["traces"] = [t.to_dict() for t in self.traces]
        return out


def reproduce_multiqubit(case: str, cfg: FdConfig = FdConfig(),
                         seeds: Sequence[int] = range(5)) -> MultiQubitResult:
    psi, n, n_latent = target_state(case)
    layout = PqcParams(n, n_latent)
    traces = [fd_train_pqc(replace(cfg, seed=s), [psi], layout) for s in seeds]
    best = max(traces, key=lambda t: t.final_fidelity)
    trained = layout.with_angles(best.angles)
    return MultiQubitResult(
        case=case,
        best_fidelity=best.final_fidelity,
        best_seed=best.seed,
        reconstruction_fidelity=pqc_reconstruction_fidelity(trained, psi),
        traces=traces,
    )


# --- tomography self-test ---------------------------------------------------


def random_partial_state(rng: np.random.Generator) -> np.ndarray:
    """Random diagonal plus an allowed |00><11| coherence."""
    pops = rng.dirichlet(np.ones(4))
    radius = rng.uniform(0.0, math.sqrt(pops[0] * pops[3]))
    phase = rng.uniform(0.0, 2 * math.pi)
    return partial_density(*pops, radius * math.cos(phase), radius * math.sin(phase))


def _partial_params(rho: np.ndarray) -> np.ndarray:
    return np.array([*np.real(np.diag(rho)), rho[0, 3].real, rho[0, 3].imag])


def tomography_selftest(n_states: int = 100, n_seeds: int = 100,
                        shots=None, seed: int = 0) -> dict:
    """Ideal round trip on random states, then a shot-noise bias check.

    Returns the worst ideal reconstruction error, the per-parameter bias in
    units of its standard error, and the individual records.
    """
    pl = PlCalibration()
    rng = np.random.default_rng(seed)
    worst, records = 0.0, []
    for _ in range(n_states):
        rho = random_partial_state(rng)
        rec = partial_tomography(rho, pl)
        est = np.array([*rec.populations, rec.b_tilde, rec.c_tilde])
        worst = max(worst, float(np.max(np.abs(est - _partial_params(rho)))))
        records.append(rec)

    shots = shots or ShotConfig(rng_seed=seed)
    rho = random_partial_state(np.random.default_rng([seed, 1]))
    truth = _partial_params(rho)
    est = []
    for s in range(n_seeds):
        rec = partial_tomography(rho, pl, shots, np.random.default_rng([seed, 2, s]), seed=s)
        est.append([*rec.populations, rec.b_tilde, rec.c_tilde])
        records.append(rec)
    est = np.array(est)
    se = est.std(axis=0, ddof=1) / math.sqrt(n_seeds)
    z = (est.mean(axis=0) - truth) / se
    return {
        "ideal_max_error": worst,
        "bias_z": z.tolist(),
        "stderr": se.tolist(),
        "records": records,
    }
