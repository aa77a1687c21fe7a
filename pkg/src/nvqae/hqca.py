"""Hybrid quantum-classical training loops.

``hqca_train`` runs the measured-gradient loop for the two-pulse NV encoder:
one-sided finite differences on the device, a per-parameter probe step that
halves when the measured change is too small to trust, a fixed learning rate,
and clamping of amplitudes at zero.  ``fd_train_pqc`` is plain central
finite-difference ascent for the multi-qubit circuit.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .autoencoder import (
    EncoderParams,
    PqcParams,
    encoder_cost,
    run_pqc_batch,
    trash_overlap_batch,
)
from .device import Device

log = logging.getLogger(__name__)

AMPLITUDES = ("b1_volts", "b2_volts")


class CostOracle:
    """Encoder cost measured on a device, counting state preparations.

    Every evaluation prepares |00> and |11> once each, so it adds two device
    queries.  Shot noise for evaluation ``k`` is drawn from a generator seeded
    with ``(seed, k)`` so traces replay exactly.
    """

    def __init__(self, device: Device, seed: int = 0):
        self.device = device
        self.seed = seed
        self.evaluations = 0

    @property
    def queries(self) -> int:
        return 2 * self.evaluations

    def __call__(self, params: EncoderParams) -> float:
        rng = None
        if self.device.shots is not None:
            rng = np.random.default_rng([self.seed, self.evaluations])
        self.evaluations += 1
        return encoder_cost(params, self.device, rng)


@dataclass(frozen=True)
class HqcaConfig:
    initial: EncoderParams = field(default_factory=EncoderParams)
    probe_step: float = 0.05
    learning_rate: float = 0.006
    step_halving_threshold: float = 0.02
    max_iterations: int = 30
    target_cost: float = 0.93
    stable_window: int = 3
    stable_tolerance: float = 0.01
    parameters: tuple = AMPLITUDES
    # "current": probe every parameter from the current iterate.
    # "initial": probe parameters after the first from the initial guess, as
    # the optimization recipe literally reads.
    reset_mode: str = "current"
    seed: int = 0

    def __post_init__(self):
        if not self.probe_step > 0:
            raise ValueError("probe_step must be > 0")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.reset_mode not in ("current", "initial"):
            raise ValueError(f"unknown reset_mode {self.reset_mode!r}")
        unknown = set(self.parameters) - set(AMPLITUDES)
        if unknown:
            raise ValueError(f"only amplitudes are optimized, got {sorted(unknown)}")


@dataclass
class IterationRecord:
    iteration: int
    params: dict
    cost: float
    gradients: dict
    delta_p: dict
    probe_steps: dict
    queries: int


@dataclass
class TrainingTrace:
    records: list = field(default_factory=list)
    status: str = "running"
    final_params: dict | None = None

    @property
    def costs(self) -> list:
        return [r.cost for r in self.records]

    @property
    def final_cost(self) -> float:
        return self.records[-1].cost

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "final_params": self.final_params,
            "records": [asdict(r) for r in self.records],
        }


def fd_gradient(param_id: str, params: EncoderParams, probe_step: float,
                cost: Callable[[EncoderParams], float],
                baseline: float | None = None) -> tuple[float, float]:
    """Forward-difference gradient along one amplitude.

    Returns ``(delta_p / probe_step, delta_p)``.  Pass ``baseline`` to reuse a
    cost already measured at ``params``.
    """
    if not probe_step > 0:
        raise ValueError("probe_step must be > 0")
    if baseline is None:
        baseline = cost(params)
    probed = replace(params, **{param_id: getattr(params, param_id) + probe_step})
    delta_p = cost(probed) - baseline
    return delta_p / probe_step, delta_p


def _stable(costs: Sequence[float], cfg: HqcaConfig) -> bool:
    window = costs[-cfg.stable_window:]
    if len(window) < cfg.stable_window or min(window) < cfg.target_cost:
        return False
    return max(window) - min(window) < cfg.stable_tolerance


def hqca_train(cfg: HqcaConfig, device: Device,
               oracle: Callable[[EncoderParams], float] | None = None) -> TrainingTrace:
    """Train the encoder amplitudes against ``device``.

    An iterate whose measured cost already reaches ``target_cost`` is kept as
    is; training stops once ``stable_window`` consecutive costs reach the
    target within ``stable_tolerance`` of each other.
    """
    oracle = oracle or CostOracle(device, cfg.seed)
    params = cfg.initial
    steps = {name: cfg.probe_step for name in cfg.parameters}
    trace = TrainingTrace()

    for q in range(cfg.max_iterations):
        baseline = oracle(params)
        grads, dps, used = {}, {}, dict(steps)
        for k, name in enumerate(cfg.parameters):
            if cfg.reset_mode == "initial" and k > 0:
                origin, base = cfg.initial, None
            else:
                origin, base = params, baseline
            grads[name], dps[name] = fd_gradient(name, origin, steps[name], oracle, base)

        trace.records.append(IterationRecord(
            iteration=q,
            params=params.to_dict(),
            cost=baseline,
            gradients=grads,
            delta_p=dps,
            probe_steps=used,
            queries=getattr(oracle, "queries", 0),
        ))
        log.debug("iteration %d: cost %.5f params %s", q, baseline, params)

        if _stable(trace.costs, cfg):
            trace.status = "converged"
            break
        if baseline >= cfg.target_cost:
            continue

        updates = {}
        for name in cfg.parameters:
            updates[name] = max(0.0, getattr(params, name) + cfg.learning_rate * grads[name])
            if abs(dps[name]) < cfg.step_halving_threshold:
                steps[name] *= 0.5
        params = replace(params, **updates)
    else:
        trace.status = "max_iterations"

    trace.final_params = params.to_dict()
    return trace


# --- multi-qubit circuit ----------------------------------------------------


@dataclass(frozen=True)
class FdConfig:
    probe_step: float = 1e-3
    learning_rate: float = 0.5
    max_iterations: int = 2000
    target_fidelity: float = 0.999
    seed: int = 0
    init_scale: float = np.pi

    def __post_init__(self):
        if not (self.probe_step > 0 and self.learning_rate > 0):
            raise ValueError("probe_step and learning_rate must be > 0")


@dataclass
class PqcTrace:
    fidelities: list = field(default_factory=list)
    angles: list = field(default_factory=list)
    status: str = "running"
    seed: int = 0

    @property
    def final_fidelity(self) -> float:
        return self.fidelities[-1]

    @property
    def best_fidelity(self) -> float:
        return max(self.fidelities)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "seed": self.seed,
            "fidelities": self.fidelities,
            "final_angles": self.angles,
        }


def mean_trash_cost(angle_batch: np.ndarray, layout: PqcParams,
                    inputs: Sequence[np.ndarray]) -> np.ndarray:
    total = np.zeros(np.atleast_2d(angle_batch).shape[0])
    for psi in inputs:
        out = run_pqc_batch(angle_batch, layout.n_qubits, psi)
        total += trash_overlap_batch(out, layout.n_qubits, layout.n_trash)
    return total / len(inputs)


def fd_train_pqc(cfg: FdConfig, inputs: Sequence, layout: PqcParams,
                 initial_angles: Sequence[float] | None = None) -> PqcTrace:
    """Gradient ascent on the mean trash overlap with central differences.

    Angles start from ``initial_angles`` or, if omitted, uniformly in
    ``[-init_scale, init_scale]`` from ``cfg.seed``.
    """
    if not inputs:
        raise ValueError("need at least one input state")
    inputs = [np.asarray(psi, dtype=complex) for psi in inputs]
    n = layout.n_angles
    if initial_angles is None:
        rng = np.random.default_rng(cfg.seed)
        theta = rng.uniform(-cfg.init_scale, cfg.init_scale, n)
    else:
        theta = np.asarray(initial_angles, dtype=float).copy()
    h = cfg.probe_step
    shifts = np.vstack([h * np.eye(n), -h * np.eye(n)])
    trace = PqcTrace(seed=cfg.seed)

    for _ in range(cfg.max_iterations):
        batch = np.vstack([theta[None, :], theta[None, :] + shifts])
        costs = mean_trash_cost(batch, layout, inputs)
        trace.fidelities.append(float(costs[0]))
        if costs[0] >= cfg.target_fidelity:
            trace.status = "converged"
            break
        grad = (costs[1:n + 1] - costs[n + 1:]) / (2 * h)
        theta = theta + cfg.learning_rate * grad
    else:
        trace.fidelities.append(float(mean_trash_cost(theta[None, :], layout, inputs)[0]))
        trace.status = "max_iterations"
    trace.angles = theta.tolist()
    return trace
