"""Run configuration loaded from a TOML file.

Recognized sections and keys (every key optional, unknown ones rejected)::

    [constants]    D, A_parallel, Q, B_z, f_MW1, f_MW2, f_RF1, f_RF2   (MHz, mT)
    [noise]        t2_electron_us, t2_nuclear_ms, t1_electron_ms, t1_nuclear_s,
                   readout_mixing             ("inf" disables a channel)
    [calibration]  kappa, eta                 (number, or table keyed by channel)
    [shots]        repeats, seed, brightness (4 values), ideal
    [hqca]         b1_volts, b2_volts, phi1, phi2, duration_ns, probe_step,
                   learning_rate, step_halving_threshold, max_iterations,
                   target_cost, stable_window, stable_tolerance, reset_mode,
                   encoder_target_cost, encoder_max_iterations,
                   pqc_probe_step, pqc_learning_rate, pqc_max_iterations,
                   pqc_target_fidelity, pqc_seeds
    [protocols]    alpha2, cnot_mode, bare_step_us, bare_max_us,
                   encoded_step_us, encoded_max_us, sweep_tau_us, sweep_alphas,
                   repeats_per_point, bootstrap_resamples, fit_bootstrap
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .autoencoder import EncoderParams
from .device import (
    CalibrationModel,
    Device,
    NoiseParams,
    PhysicalConstants,
    ShotConfig,
)
from .experiments import Sampling
from .hqca import FdConfig, HqcaConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProtocolSettings:
    alpha2: float = 0.5
    cnot_mode: str = "nominal"
    bare_step_us: float = 2.0
    bare_max_us: float = 12.0
    encoded_step_us: float = 500.0
    encoded_max_us: float = 6000.0
    sweep_tau_us: float = 300.0
    sweep_alphas: tuple = (0.0, 0.25, 0.5, 0.75, 1.0)
    repeats_per_point: int = 100
    bootstrap_resamples: int = 50
    fit_bootstrap: int = 0

    @staticmethod
    def _grid(step: float, stop: float) -> tuple:
        n = int(math.floor(stop / step + 1e-9))
        return tuple(step * k for k in range(n + 1))

    @property
    def bare_grid(self) -> tuple:
        return self._grid(self.bare_step_us, self.bare_max_us)

    @property
    def encoded_grid(self) -> tuple:
        return self._grid(self.encoded_step_us, self.encoded_max_us)


@dataclass(frozen=True)
class RunConfig:
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    noise: NoiseParams = field(default_factory=NoiseParams)
    readout_mixing: float = 0.1
    calibration: CalibrationModel = field(default_factory=CalibrationModel)
    shots: ShotConfig = field(default_factory=ShotConfig)
    ideal: bool = False
    hqca: HqcaConfig = field(default_factory=HqcaConfig)
    encoder_hqca: HqcaConfig = field(
        default_factory=lambda: HqcaConfig(target_cost=0.999, max_iterations=60))
    pqc: FdConfig = field(default_factory=lambda: FdConfig(learning_rate=0.5))
    pqc_seeds: int = 5
    protocols: ProtocolSettings = field(default_factory=ProtocolSettings)

    @property
    def seed(self) -> int:
        return self.shots.rng_seed

    def device(self) -> Device:
        if self.ideal:
            return Device(self.calibration, NoiseParams.noiseless(), None, 0.0, self.constants)
        return Device(self.calibration, self.noise, self.shots, self.readout_mixing, self.constants)

    def sampling(self) -> Sampling:
        return Sampling(self.protocols.repeats_per_point,
                        self.protocols.bootstrap_resamples, self.seed)

    def with_overrides(self, seed=None, ideal=None, eta=None, shots=None) -> "RunConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, shots=replace(cfg.shots, rng_seed=seed),
                          hqca=replace(cfg.hqca, seed=seed),
                          pqc=replace(cfg.pqc, seed=seed))
        if ideal:
            cfg = replace(cfg, ideal=True)
        if eta is not None:
            cfg = replace(cfg, calibration=replace(cfg.calibration, eta=eta))
        if shots is not None:
            cfg = replace(cfg, shots=replace(cfg.shots, repeats=shots))
        return cfg

    def to_dict(self) -> dict:
        """Plain snapshot written next to results."""
        from dataclasses import asdict

        out = asdict(self)
        out["hqca"]["initial"] = self.hqca.initial.to_dict()
        out["encoder_hqca"]["initial"] = self.encoder_hqca.initial.to_dict()
        return _jsonable(out)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


SECTIONS = ("constants", "noise", "calibration", "shots", "hqca", "protocols")


def _number(value, key):
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    return float(value)


def _check_keys(section: str, table: dict, allowed) -> None:
    unknown = set(table) - set(allowed)
    if unknown:
        raise ConfigError(f"[{section}] unknown keys: {', '.join(sorted(unknown))}")


def parse_config(data: dict) -> RunConfig:
    unknown = set(data) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown sections: {', '.join(sorted(unknown))}")
    cfg = RunConfig()

    sec = data.get("constants", {})
    names = [f.name for f in fields(PhysicalConstants)]
    _check_keys("constants", sec, names)
    cfg = replace(cfg, constants=PhysicalConstants(
        **{k: _number(v, k) for k, v in sec.items()}))

    sec = dict(data.get("noise", {}))
    names = [f.name for f in fields(NoiseParams)]
    _check_keys("noise", sec, names + ["readout_mixing"])
    if "readout_mixing" in sec:
        cfg = replace(cfg, readout_mixing=_number(sec.pop("readout_mixing"), "readout_mixing"))
    cfg = replace(cfg, noise=NoiseParams(**{k: _number(v, k) for k, v in sec.items()}))

    sec = data.get("calibration", {})
    _check_keys("calibration", sec, ["kappa", "eta"])
    kw = {}
    for key in ("kappa", "eta"):
        if key in sec:
            v = sec[key]
            kw[key] = ({ch: _number(x, f"{key}.{ch}") for ch, x in v.items()}
                       if isinstance(v, dict) else _number(v, key))
    base = CalibrationModel()
    cfg = replace(cfg, calibration=CalibrationModel(
        kappa=kw.get("kappa", base.kappa), eta=kw.get("eta", base.eta)))

    sec = data.get("shots", {})
    _check_keys("shots", sec, ["repeats", "seed", "brightness", "ideal"])
    shots = ShotConfig(
        repeats=int(sec.get("repeats", ShotConfig.repeats)),
        rng_seed=int(sec.get("seed", 0)),
        brightness=tuple(sec.get("brightness", ShotConfig.brightness)),
    )
    cfg = replace(cfg, shots=shots, ideal=bool(sec.get("ideal", False)))

    sec = dict(data.get("hqca", {}))
    enc_keys = [f.name for f in fields(EncoderParams)]
    loop_keys = ["probe_step", "learning_rate", "step_halving_threshold", "max_iterations",
                 "target_cost", "stable_window", "stable_tolerance", "reset_mode"]
    extra = ["encoder_target_cost", "encoder_max_iterations", "pqc_probe_step",
             "pqc_learning_rate", "pqc_max_iterations", "pqc_target_fidelity", "pqc_seeds"]
    _check_keys("hqca", sec, enc_keys + loop_keys + extra)
    initial = EncoderParams(**{k: _number(sec[k], k) for k in enc_keys if k in sec})
    loop = {}
    for k in loop_keys:
        if k in sec:
            if k == "reset_mode":
                loop[k] = str(sec[k])
            elif k in ("max_iterations", "stable_window"):
                loop[k] = int(sec[k])
            else:
                loop[k] = _number(sec[k], k)
    hq = replace(cfg.hqca, initial=initial, seed=shots.rng_seed, **loop)
    enc = replace(cfg.encoder_hqca, initial=initial,
                  target_cost=_number(sec.get("encoder_target_cost", 0.999), "encoder_target_cost"),
                  max_iterations=int(sec.get("encoder_max_iterations", 60)))
    pqc = replace(cfg.pqc, seed=shots.rng_seed)
    for key, attr in (("pqc_probe_step", "probe_step"), ("pqc_learning_rate", "learning_rate"),
                      ("pqc_target_fidelity", "target_fidelity")):
        if key in sec:
            pqc = replace(pqc, **{attr: _number(sec[key], key)})
    if "pqc_max_iterations" in sec:
        pqc = replace(pqc, max_iterations=int(sec["pqc_max_iterations"]))
    cfg = replace(cfg, hqca=hq, encoder_hqca=enc, pqc=pqc,
                  pqc_seeds=int(sec.get("pqc_seeds", cfg.pqc_seeds)))

    sec = data.get("protocols", {})
    names = [f.name for f in fields(ProtocolSettings)]
    _check_keys("protocols", sec, names)
    kw = {}
    for k, v in sec.items():
        if k == "cnot_mode":
            kw[k] = str(v)
        elif k == "sweep_alphas":
            kw[k] = tuple(_number(x, k) for x in v)
        elif k in ("repeats_per_point", "bootstrap_resamples", "fit_bootstrap"):
            kw[k] = int(v)
        else:
            kw[k] = _number(v, k)
    return replace(cfg, protocols=ProtocolSettings(**kw))


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    try:
        return parse_config(data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
