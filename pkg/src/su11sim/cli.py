"""Command-line front end: ``su11sim <command> [--config PATH] [--out DIR] ...``.

Exit codes: 0 success, 2 configuration or output error, 3 numeric failure
(symplectic validation, kernel resolution, failed verification).
"""

from __future__ import annotations

import argparse
import sys

from su11sim import config, experiments
from su11sim.exceptions import ConfigError, NumericError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

DEFAULT_PRESET = "paper-unbalanced"


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML run configuration")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides config)")
    common.add_argument("--engine", choices=config.ENGINES, help="analytic, montecarlo or both")
    common.add_argument("--seed", type=int, help="Monte Carlo seed (enables a default sampler)")
    common.add_argument("--preset", help="paper-balanced, paper-unbalanced or symmetric(K)")

    parser = argparse.ArgumentParser(prog="su11sim", description="Pulse-train SU(1,1) interferometer simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("phase-scan", parents=[common], help="direct and homodyne fringes over theta")
    sub.add_parser("delay-scan", parents=[common], help="homodyne visibility versus arm lag")
    sub.add_parser("noise-report", parents=[common], help="homodyne noise in dB vs the k1=0 reference")
    sub.add_parser("schmidt", parents=[common], help="Schmidt decomposition of a joint spectral function")
    v = sub.add_parser("verify", parents=[common], help="Monte Carlo oracle checks, one PASS/FAIL line each")
    v.add_argument("--samples", type=int, default=1_000_000, help="samples per check (default 1e6)")
    return parser


def _load(args) -> config.RunConfig:
    if args.config:
        cfg = config.load(args.config, preset_override=args.preset, default_preset=DEFAULT_PRESET)
    else:
        cfg = config.parse({}, preset_override=args.preset or DEFAULT_PRESET)
    return config.finalize(cfg, engine=args.engine, seed=args.seed, output=args.out)


def _report(result: dict) -> None:
    for name, path in result["files"].items():
        print(f"wrote {name}: {path}")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _load(args)
        if args.command == "phase-scan":
            result = experiments.run_phase_scan(cfg)
            s = result["summary"]
            print(f"direct visibility (fit): {s['direct']['visibility_fitted']:.6g}")
            if "visibility_fitted" in s["homodyne"]:
                print(f"homodyne visibility (fit): {s['homodyne']['visibility_fitted']:.6g}")
            print(f"homodyne visibility (closed form): {s['homodyne']['visibility_closed_form']:.6g}")
        elif args.command == "delay-scan":
            result = experiments.run_delay_scan(cfg)
        elif args.command == "noise-report":
            result = experiments.run_noise_report(cfg)
            for entry in result["report"]["levels"]:
                print(f"eta={entry['eta']:.4g}: reduction {entry['reduction_db']:.4f} dB, "
                      f"anti-squeezing {entry['antisqueezing_db']:.4f} dB")
        elif args.command == "schmidt":
            result = experiments.run_schmidt(cfg)
            dec = result["decomposition"]
            print(f"K={dec.k_total:.6g}  r1={dec.r[0]:.8f}  effective modes={dec.effective_mode_number:.4f}")
        else:
            ok = experiments.verify(cfg, n_samples=args.samples)
            print("verify: all checks passed" if ok else "verify: FAILED")
            return EXIT_OK if ok else EXIT_NUMERIC
        _report(result)
    except ConfigError as exc:
        print(f"su11sim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"su11sim: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
