"""Simulated NV-center quantum autoencoder for entanglement storage."""

from .autoencoder import (
    EncoderParams,
    PqcParams,
    apply_autoencoder_cycle,
    build_encoder,
    build_pqc,
    encoder_cost,
    pqc_reconstruction_fidelity,
    pqc_trash_cost,
)
from .config import RunConfig, load_config
from .device import (
    CalibrationModel,
    Device,
    NoiseParams,
    PhysicalConstants,
    PulseSpec,
    ShotConfig,
    free_evolution,
    prepare_state,
)
from .experiments import (
    DecayCurve,
    ProtocolSpec,
    Sampling,
    alpha_sweep,
    reproduce_multiqubit,
    run_lifetimes,
    run_protocol,
    train_encoder,
)
from .fitting import FitResult, fit_exponential
from .hqca import FdConfig, HqcaConfig, TrainingTrace, fd_train_pqc, hqca_train
from .tomography import PlCalibration, partial_tomography

__version__ = "0.1.0"

__all__ = [
    "CalibrationModel",
    "DecayCurve",
    "Device",
    "EncoderParams",
    "FdConfig",
    "FitResult",
    "HqcaConfig",
    "NoiseParams",
    "PhysicalConstants",
    "PlCalibration",
    "PqcParams",
    "ProtocolSpec",
    "PulseSpec",
    "RunConfig",
    "Sampling",
    "ShotConfig",
    "TrainingTrace",
    "alpha_sweep",
    "apply_autoencoder_cycle",
    "build_encoder",
    "build_pqc",
    "encoder_cost",
    "fd_train_pqc",
    "fit_exponential",
    "free_evolution",
    "hqca_train",
    "load_config",
    "partial_tomography",
    "pqc_reconstruction_fidelity",
    "pqc_trash_cost",
    "prepare_state",
    "reproduce_multiqubit",
    "run_lifetimes",
    "run_protocol",
    "train_encoder",
]
