"""Command-line entry point.

Exit codes: 0 success, 2 configuration or usage error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .baselines import BaselineKind
from .harness.config import ConfigError, ExperimentConfig, load_config, load_preset, preset_names
from .harness.experiments import (
    Ablation,
    baseline_rows,
    load_searched_circuit,
    run_ablation_study,
    run_decomposition,
    run_scaling_study,
    run_signal_distribution_study,
)
from .harness.records import ResultRecord, load_results
from .noise import NoiseError, NoiseModel

log = logging.getLogger("metroforge")

SEEDED = ("optimize", "scaling", "ablation", "signal-study")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="metroforge", description="Noise-aware sensing circuit search.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        src = sp.add_mutually_exclusive_group()
        src.add_argument("--config", type=Path, help="TOML experiment file")
        src.add_argument("--preset", help=f"bundled config: {', '.join(preset_names())}")
        if out:
            sp.add_argument("--out", type=Path, help="output directory (default results/<command>)")
            sp.add_argument("--n", type=int, nargs="+", help="override the qubit counts")

    for name, help_ in (
        ("optimize", "search circuits for each N"),
        ("scaling", "baselines and search for each N"),
        ("ablation", "scaling study under a weakened noise model"),
        ("signal-study", "uniform versus gaussian angle priors"),
    ):
        sp = sub.add_parser(name, help=help_)
        common(sp)
        sp.add_argument("--seed", type=int, required=True)
        if name == "ablation":
            sp.add_argument("--ablation", required=True, choices=[a.value for a in Ablation])

    sp = sub.add_parser("baseline", help="tune t for one reference protocol")
    common(sp)
    sp.add_argument("--kind", required=True, choices=[k.value for k in BaselineKind])
    sp.add_argument("--noiseless", action="store_true", help="switch off every noise source")

    sp = sub.add_parser("decompose", help="per-stage information loss at a fixed time")
    common(sp)
    sp.add_argument("--from-results", type=Path, help="add the optimized circuit stored in this run directory")

    sp = sub.add_parser("validate-config", help="check a config and print its hash")
    common(sp, out=False)
    return p


def _load(args) -> ExperimentConfig:
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    elif getattr(args, "preset", None):
        cfg = load_preset(args.preset)
    else:
        cfg = ExperimentConfig()
    if getattr(args, "n", None):
        cfg = replace(cfg, qubits=tuple(args.n))
    return cfg


def _run(args) -> int:
    cfg = _load(args)
    if args.command == "validate-config":
        print(f"ok {cfg.config_hash()}")
        return 0

    if args.command == "baseline":
        if args.noiseless:
            cfg = replace(cfg, noise=NoiseModel.noiseless())
        record = ResultRecord(cfg.name, cfg.config_hash(), cfg.seed, [])
        for n in cfg.qubits:
            record.rows.extend(r for r in baseline_rows(cfg, n, cfg.seed) if r["protocol"] == args.kind)
    elif args.command == "optimize":
        record = run_scaling_study(cfg, args.seed, baselines=False)
    elif args.command == "scaling":
        record = run_scaling_study(cfg, args.seed)
    elif args.command == "ablation":
        record = run_ablation_study(cfg, args.ablation, args.seed)
    elif args.command == "signal-study":
        record = run_signal_distribution_study(cfg, args.seed)
    else:
        record = None
        for n in cfg.qubits:
            extra = {}
            if args.from_results:
                circuit, _ = load_searched_circuit(load_results(args.from_results), n)
                extra["optimized"] = circuit
            part = run_decomposition(cfg, n, extra)
            if record is None:
                record = part
            else:
                record.rows.extend(part.rows)

    out = args.out or Path("results") / args.command
    record.write(out, cfg.canonical_json())
    for row in record.rows:
        log.info("%s", row)
    print(f"wrote {len(record.rows)} rows to {out}")
    return 0


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return _run(args)
    except (ConfigError, NoiseError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        log.debug("traceback", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
