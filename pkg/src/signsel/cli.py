"""Command line entry point: ``simulate``, ``bounds`` and ``reduce``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields

import numpy as np

from . import bounds, engine, harness
from .errors import ArgumentError, SignSelError
from .metrics import get_metric, metric_db
from .ofdm import SignalParams, build_constellation, modulate

# CLI flag -> SimConfig field
_SIM_FLAGS = {
    "metric": "metric", "method": "method", "n": "N", "constellation": "constellation",
    "oversample": "L", "trials": "trials", "seed": "seed", "q": "Q", "kappa": "kappa",
    "ne": "N_e", "nf": "N_f", "rule": "rule", "slm_s": "slm_S", "workers": "workers",
    "out": "out",
}


def _add_selection_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--metric", choices=harness.METRICS)
    p.add_argument("--method", choices=harness.METHODS)
    p.add_argument("--constellation", choices=["qpsk", "qam16", "qam64"])
    p.add_argument("--oversample", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--kappa", type=float)
    p.add_argument("--ne", type=int)
    p.add_argument("--nf", type=int)
    p.add_argument("--rule", choices=["normalized", "raw"])
    p.add_argument("--slm-s", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="signsel", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="Monte Carlo CCDF of a selection method")
    _add_selection_flags(sim)
    sim.add_argument("--n", type=int)
    sim.add_argument("--trials", type=int)
    sim.add_argument("--workers", type=int)
    sim.add_argument("--out")
    sim.add_argument("--config", help="JSON file with the same keys as the flags")

    bnd = sub.add_parser("bounds", help="print analytic bounds as JSON")
    bnd.add_argument("--n", type=int, required=True)
    bnd.add_argument("--constellation", default="qam16", choices=["qpsk", "qam16", "qam64"])
    bnd.add_argument("--eps", type=float, default=0.1)
    bnd.add_argument("--q", type=int, default=100)
    bnd.add_argument("--p", type=float, default=0.01)

    red = sub.add_parser("reduce", help="select signs for one symbol vector")
    red.add_argument("--in", dest="infile", required=True,
                     help="JSON array of [re, im] pairs")
    _add_selection_flags(red)
    red.add_argument("--sigma-b", type=float, default=1.0)
    red.add_argument("--trace", action="store_true", help="include the decision trace")
    return parser


def sim_config_from_args(args: argparse.Namespace) -> harness.SimConfig:
    """Merge config file values with command line flags; flags win."""
    values: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            raw = json.load(fh)
        known = {f.name for f in fields(harness.SimConfig)}
        for key, value in raw.items():
            key = key.replace("-", "_")
            name = _SIM_FLAGS.get(key, key)
            if name not in known:
                raise ArgumentError(f"unknown config key {key!r}")
            values[name] = value
    for flag, name in _SIM_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            values[name] = value
    return harness.SimConfig(**values)


def load_symbols(path) -> np.ndarray:
    with open(path) as fh:
        pairs = json.load(fh)
    try:
        arr = np.asarray(pairs, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ArgumentError(f"{path}: expected a JSON array of [re, im] pairs") from exc
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        raise ArgumentError(f"{path}: expected a JSON array of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def symbols_to_json(symbols) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(symbols)]


def _metric_entry(name, value, kappa):
    return {"linear": float(value), "db": float(metric_db(name, value, kappa))}


def reduce_symbols(args: argparse.Namespace) -> dict:
    b = load_symbols(args.infile)
    kw = {k: v for k, v in vars(args).items() if k in _SIM_FLAGS and v is not None}
    kw.setdefault("method", "ce-cf")
    cfg = sim_config_from_args(argparse.Namespace(**kw, n=len(b), trials=1))
    params = SignalParams(len(b), cfg.L, args.sigma_b)
    rng = np.random.default_rng(cfg.seed)
    measure = get_metric(cfg.metric, cfg.kappa)
    trace = None
    if cfg.method in ("ce-cf", "ce-se", "ce-srcm"):
        signs, trace = engine.select_signs(b, cfg.ce_config(), params, rng)
    elif cfg.method == "ce-exact":
        signs, trace = engine.select_signs_exact(b, measure, params, cfg.N_f)
    else:
        signs = harness.select(cfg, b, params, rng)
    before = float(measure(modulate(b, None, params)))
    after = float(measure(modulate(b, signs, params)))
    out = {
        "method": cfg.method,
        "metric": cfg.metric,
        "signs": [int(x) for x in signs],
        "symbols": symbols_to_json(b * signs),
        "before": _metric_entry(cfg.metric, before, cfg.kappa),
        "after": _metric_entry(cfg.metric, after, cfg.kappa),
    }
    if args.trace and trace is not None:
        out["trace"] = trace.to_dict()
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "simulate":
            cfg = sim_config_from_args(args)
            result = harness.run_experiment(cfg)
            if cfg.out:
                harness.emit_results(result, cfg.out)
            json.dump(result.scalars(), sys.stdout, indent=2)
        elif args.command == "bounds":
            const = build_constellation(args.constellation)
            reports = bounds.bound_report(args.n, const, args.eps, args.q, args.p)
            json.dump([r.to_dict() for r in reports], sys.stdout, indent=2)
        else:
            json.dump(reduce_symbols(args), sys.stdout, indent=2)
    except (SignSelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
