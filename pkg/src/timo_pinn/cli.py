"""Command line entry point: ``timo-pinn {run,analyze,presets}``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import PRESETS, ExperimentConfig, catalog, preset
from .network import NetworkParams

OUT_ENV = "TIMO_PINN_OUT"


def _add_common(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", help=f"one of: {', '.join(PRESETS)}")
    src.add_argument("--config", help="JSON config file")
    p.add_argument("--out", help=f"output directory (else ${OUT_ENV}, else runs/<name>)")
    p.add_argument("--nx", type=int, help="diagnostic grid intervals in x")
    p.add_argument("--nt", type=int, help="diagnostic grid intervals in t")
    p.add_argument("--t-cut", type=float, help="decay fits use t > t_cut")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="timo-pinn", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train and write every artifact")
    _add_common(run)
    run.add_argument("--epochs", type=int)
    run.add_argument("--collocation", type=int,
                     help="points per set (interior, boundary times, initial x)")
    run.add_argument("--seed", type=int, help="network initialisation seed")
    run.add_argument("--sample-seed", type=int, help="collocation seed")
    run.add_argument("--log-every", type=int)
    run.add_argument("--literal-aggregation", action="store_true",
                     help="sum boundary/initial deviations before squaring")

    an = sub.add_parser("analyze", help="diagnostics for an existing checkpoint")
    _add_common(an)
    an.add_argument("--checkpoint", required=True)

    sub.add_parser("presets", help="list the preset catalog with chi")
    return parser


def resolve_config(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.load(args.config)
    else:
        cfg = preset(args.preset or "manufactured")
    tc = cfg.train
    updates = {}
    if getattr(args, "epochs", None) is not None:
        updates["epochs"] = args.epochs
    if getattr(args, "collocation", None) is not None:
        n = args.collocation
        updates.update(n_collocation=n, n_boundary=n, n_initial=n)
    for flag, name in (("seed", "seed"), ("sample_seed", "sample_seed"),
                       ("log_every", "log_every")):
        if getattr(args, flag, None) is not None:
            updates[name] = getattr(args, flag)
    if getattr(args, "literal_aggregation", False):
        updates["paper_literal_aggregation"] = True
    if updates:
        cfg = replace(cfg, train=replace(tc, **updates))
    if args.nx is not None:
        cfg = replace(cfg, n_x=args.nx)
    if args.nt is not None:
        cfg = replace(cfg, n_t=args.nt)
    if args.t_cut is not None:
        cfg = replace(cfg, t_cut=args.t_cut)
    out = args.out or os.environ.get(OUT_ENV) or cfg.out_dir or str(Path("runs") / cfg.name)
    return replace(cfg, out_dir=out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "presets":
        for row in catalog():
            print(json.dumps(row))
        return 0
    try:
        cfg = resolve_config(args)
    except (KeyError, ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) else exc
        print(f"error: invalid configuration: {msg}", file=sys.stderr)
        return 2

    from .experiment import analyze, run  # heavy imports only when needed

    if args.command == "run":
        manifest = run(cfg, cfg.out_dir)
        print(json.dumps({"out_dir": cfg.out_dir, "chi": manifest["chi"],
                          "final_loss": manifest["final_loss"]["total"]}))
        return 0
    try:
        params = NetworkParams.load(args.checkpoint)
        summary = analyze(params, cfg.resolved(), cfg.out_dir)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps({"out_dir": cfg.out_dir, "best": summary["fits"]["best"]}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
