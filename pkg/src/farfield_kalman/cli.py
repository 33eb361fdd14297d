"""Command line: ``forward``, ``reconstruct`` and ``compare``."""
import argparse
import dataclasses
import logging
import sys

from .config import ExperimentConfig, load_config
from .fileio import read_farfield, write_farfield, write_json
from .harness import compare, generate_data, run_experiment

# CLI flag -> config field
_FLAGS = {"k": "k", "shape": "shape", "sigma": "sigma", "rho": "rho",
          "alpha0": "alpha0", "algo": "algo", "iters": "iters", "seed": "seed",
          "fine_grid": "fine_grid", "data_grid": "data_grid"}


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with ExperimentConfig keys")
    common.add_argument("--k", type=float)
    common.add_argument("--shape", choices=["b1", "b2", "B1", "B2"])
    common.add_argument("--sigma", type=float)
    common.add_argument("--rho", type=float)
    common.add_argument("--alpha0", type=float)
    common.add_argument("--iters", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--fine-grid", dest="fine_grid", type=int,
                        help="points per axis of the inversion grid")
    common.add_argument("--data-grid", dest="data_grid", type=int,
                        help="points per axis of the data-generation grid")
    common.add_argument("--inverse-crime", action="store_true",
                        help="generate data on the inversion grid")
    common.add_argument("--out", required=True, help="output directory")
    common.add_argument("--png", action="store_true", help="also write heatmaps")
    common.add_argument("--verbose-trace", action="store_true",
                        help="write per-measurement trace.csv")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="farfield-kalman", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("forward", parents=[common], help="generate far-field data")
    rec = sub.add_parser("reconstruct", parents=[common], help="run one algorithm")
    rec.add_argument("--algo", choices=["flm", "kfl", "ekf"])
    rec.add_argument("--data", help="far-field CSV to invert instead of generating it")
    sub.add_parser("compare", parents=[common], help="FLM, KFL and EKF on shared data")
    return p


def build_config(args):
    base = load_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    for flag, name in _FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            changes[name] = value
    if args.inverse_crime:
        changes["inverse_crime"] = True
    return dataclasses.replace(base, **changes)


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    config = build_config(args)
    if args.command == "forward":
        import pathlib
        out = pathlib.Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        data = generate_data(config)
        write_farfield(data, out / "farfield.csv", out / "farfield_meta.json")
        write_json({"config": config.to_dict()}, out / "meta.json")
        return 0
    if args.command == "reconstruct":
        data = None
        if args.data:
            meta = args.data[:-4] + "_meta.json" if args.data.endswith(".csv") else None
            import os
            data = read_farfield(args.data, meta if meta and os.path.exists(meta) else None)
        report = run_experiment(config, data=data, out=args.out, png=args.png,
                                trace=args.verbose_trace)
        _summary([report])
        return 1 if report.blew_up or report.result.stop_reason == "failure" else 0
    reports = compare(config, out=args.out, png=args.png, trace=args.verbose_trace)
    _summary(reports.values())
    return 1 if any(r.result.stop_reason == "failure" for r in reports.values()) else 0


def _summary(reports):
    for rep in reports:
        r = rep.result
        mse = ", ".join(f"{e:.4g}" for e in r.mse)
        print(f"{r.algo}: stop={r.stop_reason} mse=[{mse}]")


if __name__ == "__main__":
    sys.exit(main())
