"""Command line entry point: ``nvqae <command> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import experiments as ex
from .config import ConfigError, RunConfig, load_config
from .hqca import hqca_train
from .results import trace_rows, write_csv, write_json

log = logging.getLogger("nvqae")


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="TOML run configuration")
    parser.add_argument("--seed", type=int, help="master RNG seed (overrides [shots].seed)")
    parser.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    parser.add_argument("--ideal", action="store_true", help="disable decoherence and shot noise")
    parser.add_argument("--eta", type=float, help="drive nonlinearity (1/V) on every channel")
    parser.add_argument("--shots", type=int, help="readout repetitions per measurement")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvqae",
        description="Quantum-autoencoder entanglement storage on a simulated NV center.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("train", help="HQCA training of the two-pulse encoder"))
    p = sub.add_parser("lifetime", help="bare / CNOT / autoencoder lifetime experiments")
    _common(p)
    p.add_argument("--protocols", default="bare,cnot,autoencoder",
                   help="comma-separated subset of bare,cnot,autoencoder")
    _common(sub.add_parser("sweep", help="alpha^2 sweep of the residual coherence"))
    p = sub.add_parser("multiqubit", help="multi-qubit circuit compression")
    _common(p)
    p.add_argument("case", choices=ex.MULTIQUBIT_CASES + ("all",))
    p = sub.add_parser("tomo-selftest", help="tomography round-trip checks")
    _common(p)
    p.add_argument("--states", type=int, default=100)
    p.add_argument("--seeds", type=int, default=100)
    return parser


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    return cfg.with_overrides(seed=args.seed, ideal=args.ideal, eta=args.eta, shots=args.shots)


def _write_rows(args, name: str, rows: list[dict]) -> None:
    if args.format == "csv":
        write_csv(args.out / f"{name}.csv", rows)
    else:
        write_json(args.out / f"{name}.json", rows)


def cmd_train(args, cfg: RunConfig) -> int:
    trace = hqca_train(cfg.hqca, cfg.device())
    if args.format == "csv":
        write_csv(args.out / "trace.csv", trace_rows(trace))
    write_json(args.out / "trace.json", trace.to_dict())
    p = trace.final_params
    print(f"{trace.status} after {trace.iterations} iterations: cost {trace.final_cost:.4f}, "
          f"B1 = {p['b1_volts']:.4f} V, B2 = {p['b2_volts']:.4f} V")
    return 0


def _protocol_encoder(cfg: RunConfig, device):
    trace = ex.train_encoder(device, cfg.encoder_hqca)
    log.info("protocol encoder: %s (%s)", trace.final_params, trace.status)
    return trace, ex.encoder_from_trace(trace)


def cmd_lifetime(args, cfg: RunConfig) -> int:
    kinds = [k.strip() for k in args.protocols.split(",") if k.strip()]
    bad = set(kinds) - set(ex.KINDS)
    if bad:
        raise SystemExit(f"unknown protocols: {', '.join(sorted(bad))}")
    device = cfg.device()
    trace, encoder = _protocol_encoder(cfg, device)
    pr = cfg.protocols
    result = ex.run_lifetimes(device, encoder, kinds, cfg.sampling(), pr.bare_grid,
                              pr.encoded_grid, pr.alpha2, pr.cnot_mode, pr.fit_bootstrap)
    for kind, curve in result.curves.items():
        _write_rows(args, f"decay_{kind}", curve.rows())
    write_json(args.out / "fit.json", {
        "fits": result.summary(),
        "encoder": encoder.to_dict(),
        "encoder_training_status": trace.status,
        "cnot_volts": ex.cnot_voltage(device, pr.cnot_mode),
    })
    for kind, fit in result.fits.items():
        print(f"{kind:12s} t = {fit.t:.4g} us +/- {fit.sigma_t:.2g}")
    return 0


def cmd_sweep(args, cfg: RunConfig) -> int:
    device = cfg.device()
    _, encoder = _protocol_encoder(cfg, device)
    pr = cfg.protocols
    rows = ex.alpha_sweep(device, encoder, pr.sweep_alphas, pr.sweep_tau_us, cfg.sampling())
    _write_rows(args, "sweep", rows)
    for r in rows:
        print(f"alpha^2 = {r['alpha2']:.2f}: bare {r['bare']:.4f}, encoded {r['encoded']:.4f}")
    return 0


def cmd_multiqubit(args, cfg: RunConfig) -> int:
    cases = ex.MULTIQUBIT_CASES if args.case == "all" else (args.case,)
    seeds = range(cfg.pqc.seed, cfg.pqc.seed + cfg.pqc_seeds)
    for case in cases:
        res = ex.reproduce_multiqubit(case, cfg.pqc, seeds)
        write_json(args.out / f"multiqubit_{case}.json", res.to_dict(full=True))
        print(f"{case}: best fidelity {res.best_fidelity:.4f} (seed {res.best_seed}), "
              f"reconstruction {res.reconstruction_fidelity:.4f}")
    return 0


def cmd_tomo_selftest(args, cfg: RunConfig) -> int:
    report = ex.tomography_selftest(args.states, args.seeds, cfg.shots, cfg.seed)
    _write_rows(args, "tomo_selftest", [r.row() for r in report["records"]])
    ok_ideal = report["ideal_max_error"] <= 1e-10
    ok_bias = all(abs(z) <= 3 for z in report["bias_z"])
    print(f"ideal round trip max error {report['ideal_max_error']:.2e}: "
          f"{'PASS' if ok_ideal else 'FAIL'}")
    print("shot-noise bias (z): " + ", ".join(f"{z:+.2f}" for z in report["bias_z"])
          + (": PASS" if ok_bias else ": FAIL"))
    return 0 if ok_ideal and ok_bias else 1


COMMANDS = {
    "train": cmd_train,
    "lifetime": cmd_lifetime,
    "sweep": cmd_sweep,
    "multiqubit": cmd_multiqubit,
    "tomo-selftest": cmd_tomo_selftest,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    write_json(args.out / "config.json", cfg.to_dict())
    return COMMANDS[args.command](args, cfg)


if __name__ == "__main__":
    sys.exit(main())
