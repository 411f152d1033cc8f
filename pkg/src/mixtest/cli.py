"""Command-line front end: ``mixtest <subcommand> ...``.

Exit status is 0 on success.  Failures print a JSON object with ``error``
and ``message`` keys on stderr and exit with status 1 (runtime failure) or
2 (bad arguments or configuration).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigurationError, MixtestError, ParseError
from .experiments import (DESK_MAX_REPLICAS, ExperimentConfig, atomic_write, chain_from_dict,
                          consistency_harness, dataset_to_csv, default_n_grid, ingest_csv,
                          run_experiment, simulate_dataset)
from .pairs import PairKind, pair_bayes_factor
from .samplers import ChainConfig
from .survival import run_survival_test, simulate_survival_cohort

PAIR_NAMES = [k.value for k in PairKind]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise _UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise _UsageError(f"expected comma-separated integers, got {text!r}") from None


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _chain(args) -> ChainConfig:
    prop = {"kind": args.alpha_proposal, "step": args.step}
    return chain_from_dict({"iterations": args.iterations, "alpha_proposal": prop})


def _add_chain_flags(p) -> None:
    p.add_argument("--iterations", type=int, default=10_000)
    p.add_argument("--alpha-proposal", choices=["logit-rw", "prior", "mixed"], default="logit-rw")
    p.add_argument("--step", type=float, default=0.5)


# ----------------------------------------------------------- commands


def cmd_simulate(args) -> int:
    if args.pair:
        source = {"kind": "pair-truth", "pair": args.pair, "component": args.component}
    elif args.family:
        source = {"kind": "family", "family": args.family, "params": _floats(args.params or "")}
    else:
        raise _UsageError("simulate needs --pair or --family")
    text = dataset_to_csv(simulate_dataset(source, args.seed, n=args.n))
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_run(args) -> int:
    try:
        cfg_dict = json.loads(Path(args.config).read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config is not valid JSON: {exc}") from None
    if args.seed is not None:
        cfg_dict["seed"] = args.seed
    if args.out is not None:
        cfg_dict["outputs"] = args.out
    if args.full_scale:
        cfg_dict["full_scale"] = True
    cfg = ExperimentConfig.from_dict(cfg_dict)
    _, digest = run_experiment(cfg, workers=args.workers)
    _emit(digest)
    return 0


def cmd_sweep(args) -> int:
    if args.data_family:
        source = {"kind": "family", "family": args.data_family, "params": _floats(args.data_params or "")}
    else:
        source = {"kind": "pair-truth", "pair": args.pair, "component": args.truth}
    replicas = args.replicas if args.replicas is not None else (100 if args.full_scale else DESK_MAX_REPLICAS)
    n_grid = _ints(args.n) if args.n else (default_n_grid(1, 10_000) if args.full_scale else default_n_grid())
    cfg = ExperimentConfig(test=args.pair, data_source=source, a0_grid=tuple(_floats(args.a0)),
                           n_grid=tuple(n_grid), replicas=replicas, chain=_chain(args),
                           outputs=args.out, seed=args.seed, sampler=args.sampler,
                           full_scale=args.full_scale)
    _, digest = run_experiment(cfg, workers=args.workers)
    _emit(digest)
    return 0


def cmd_oracle(args) -> int:
    data = ingest_csv(args.data, "iid")
    res = pair_bayes_factor(args.pair, data.y)
    _emit({"pair": args.pair, "n": data.n, "log_bf": res.log_bf,
           "posterior_prob_m1": res.posterior_prob_m1})
    return 0


def cmd_consistency(args) -> int:
    rows = consistency_harness(args.pair, args.truth, _ints(args.n), args.replicas, a0=args.a0[0],
                               seed=args.seed, chain=_chain(args), sampler=args.sampler)
    _emit(rows)
    return 0


def cmd_survival(args) -> int:
    if args.data:
        data = ingest_csv(args.data, "survival")
    else:
        data = simulate_survival_cohort(args.n, args.simulate, np.random.default_rng(args.seed),
                                        censor_rate=args.censor_rate)
    cfg = ChainConfig(args.iterations, None, args.seed, record_allocations=False)
    _, summary = run_survival_test(data, args.a0[0], cfg)
    out = {"n": data.n, "censored": int(np.sum(data.censored)) if data.censored is not None else 0}
    for i, name in enumerate(("normal", "gumbel", "logistic")):
        out[f"{name}_weight_median"] = float(summary.median[i])
        out[f"{name}_weight_mean"] = float(summary.mean[i])
    out["phi_median"] = float(summary.median[3])
    out["sigma2_median"] = float(summary.median[4])
    _emit(out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mixtest", description="Hypothesis tests by mixture estimation.")
    p.add_argument("--version", action="version", version=f"mixtest {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("simulate", help="write a simulated i.i.d. dataset as CSV")
    s.add_argument("--pair", choices=PAIR_NAMES)
    s.add_argument("--component", type=int, default=0)
    s.add_argument("--family")
    s.add_argument("--params")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("run", help="run an experiment from a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--out")
    r.add_argument("--full-scale", action="store_true")
    r.add_argument("--workers", type=int, default=1)
    r.set_defaults(func=cmd_run)

    w = sub.add_parser("sweep", help="replica sweep of one pair over a0 and n grids")
    w.add_argument("--pair", choices=PAIR_NAMES, required=True)
    w.add_argument("--truth", type=int, default=0)
    w.add_argument("--data-family")
    w.add_argument("--data-params")
    w.add_argument("--a0", default="0.1,0.2,0.3,0.4,0.5")
    w.add_argument("--n")
    w.add_argument("--replicas", type=int)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--out")
    w.add_argument("--sampler", choices=["mh", "gibbs"], default="mh")
    w.add_argument("--full-scale", action="store_true")
    w.add_argument("--workers", type=int, default=1)
    _add_chain_flags(w)
    w.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle", help="exact Bayes factor for a dataset file")
    o.add_argument("--pair", choices=PAIR_NAMES, required=True)
    o.add_argument("--data", required=True)
    o.set_defaults(func=cmd_oracle)

    c = sub.add_parser("consistency", help="concentration statistics across sample sizes")
    c.add_argument("--pair", choices=PAIR_NAMES, required=True)
    c.add_argument("--truth", type=int, default=0)
    c.add_argument("--n", default="50,100,500")
    c.add_argument("--replicas", type=int, default=10)
    c.add_argument("--a0", type=_floats, default=[0.5])
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--sampler", choices=["mh", "gibbs"], default="mh")
    _add_chain_flags(c)
    c.set_defaults(func=cmd_consistency)

    v = sub.add_parser("survival", help="three-way survival model comparison")
    v.add_argument("--data")
    v.add_argument("--simulate", choices=["normal", "gumbel", "logistic"], default="normal")
    v.add_argument("--n", type=int, default=1000)
    v.add_argument("--censor-rate", type=float, default=0.0)
    v.add_argument("--a0", type=_floats, default=[1.0])
    v.add_argument("--iterations", type=int, default=10_000)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_survival)
    return p


def _fail(kind: str, message: str, status: int, **extra) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}) + "\n")
    return status


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return int(args.func(args))
    except _UsageError as exc:
        return _fail("UsageError", str(exc), 2)
    except ParseError as exc:
        return _fail("ParseError", str(exc), 2, line=exc.line)
    except ConfigurationError as exc:
        return _fail("ConfigurationError", str(exc), 2)
    except (MixtestError, ValueError, ArithmeticError, OSError) as exc:
        return _fail(type(exc).__name__, str(exc), 1)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
