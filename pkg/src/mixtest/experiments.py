"""Dataset simulation, CSV ingestion, replica sweeps and the consistency harness.

Sweep outputs are tidy long-format CSV plus a JSON digest.  Run-times go to a
separate ``timings.csv`` so that ``results.csv`` is byte-identical across
runs with the same configuration.
"""

from __future__ import annotations

import csv
import io
from importlib import resources
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import special

from . import distributions as dist
from .distributions import Family
from .errors import ConfigurationError, MixtestError, ParseError
from .glm import (Case, run_logit_probit, run_regression_gibbs, simulate_binary_regression,
                  simulate_regression_design)
from .mixture import Dataset
from .pairs import PAIR_TRUTH, PairKind, pair_bayes_factor, run_pair
from .samplers import ChainConfig, FromPrior, LogitRandomWalk, MixedAlpha, summarize
from .survival import run_survival_test, simulate_survival_cohort

SCHEMA_VERSION = 1
DESK_MAX_REPLICAS = 20
DESK_MAX_N = 10_000
ESTIMATORS = ("post_median_alpha", "post_mean_alpha", "bf_post_prob")
RESULT_COLUMNS = ("test", "a0", "n", "replica", "estimator", "value", "seed", "error")

#: Tests beyond the four named pairs.
EXTRA_TESTS = ("logit-probit", "survival", "regression-shared", "regression-separate")
#: Component index of intercept + X1 under the bit enumeration of models.
REGRESSION_TRUE_COMPONENT = 2


def default_n_grid(lo: int = 1, hi: int = 1000, points: int = 20) -> tuple:
    """Log-spaced integer sample sizes with duplicates removed."""
    grid = np.unique(np.round(np.geomspace(lo, hi, points)).astype(int))
    return tuple(int(v) for v in grid)


# ------------------------------------------------------------ simulation


def simulate_dataset(source: dict, seed: int, n: int | None = None) -> Dataset:
    """Draw a dataset described by ``source``.

    ``source["kind"]`` selects the generator:

    ``family``
        i.i.d. draws, keys ``family`` and ``params``.
    ``pair-truth``
        the true-model family of a named pair, keys ``pair`` and ``component``.
    ``binary-regression``
        keys ``link`` and ``coefficients``; covariate ``N(0, 1)``.
    ``regression``
        the three-covariate Gaussian design, optional ``beta`` and ``sigma``.
    ``survival``
        keys ``family`` and optional ``censor_rate``, ``location``, ``variance``.

    The sample size comes from ``n`` or else ``source["n"]``.
    """
    if not isinstance(source, dict) or "kind" not in source:
        raise ConfigurationError("data source must be a mapping with a 'kind' key")
    size = source.get("n") if n is None else n
    if size is None or int(size) < 0:
        raise ConfigurationError("data source needs a nonnegative sample size 'n'")
    size = int(size)
    rng = np.random.default_rng(seed)
    kind = source["kind"]
    if kind in ("family", "pair-truth"):
        if kind == "family":
            try:
                family = Family(source["family"])
            except (KeyError, ValueError) as exc:
                raise ConfigurationError(f"unknown family {source.get('family')!r}") from exc
            params = tuple(float(p) for p in source.get("params", ()))
        else:
            comp = int(source.get("component", 0))
            truth = PAIR_TRUTH[PairKind.parse(source["pair"])]
            if comp not in (0, 1):
                raise ConfigurationError("pair-truth component must be 0 or 1")
            family, params = truth[comp]
        if size == 0:
            dist.log_density(family, params, 0.0)  # validates params
            return Dataset(np.zeros(0))
        return Dataset(dist.sample(family, params, size, rng))
    if kind == "binary-regression":
        return simulate_binary_regression(size, source["coefficients"], source.get("link", "logit"), rng)
    if kind == "regression":
        return simulate_regression_design(size, rng, beta=tuple(source.get("beta", (2.0, -3.0, 0.0, 0.0))),
                                          sigma=float(source.get("sigma", 1.0)))
    if kind == "survival":
        return simulate_survival_cohort(size, source["family"], rng,
                                        censor_rate=float(source.get("censor_rate", 0.0)),
                                        location=float(source.get("location", 0.0)),
                                        variance=float(source.get("variance", 1.0)))
    raise ConfigurationError(f"unknown data source kind {kind!r}")


# -------------------------------------------------------------- CSV I/O


def _fmt(v: float) -> str:
    v = float(v)
    if v.is_integer() and abs(v) < 2 ** 53:
        return str(int(v))
    return repr(v)


def dataset_to_csv(data: Dataset, schema: str = "iid") -> str:
    """Serialise ``data`` in the layout read back by :func:`ingest_csv`."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if schema == "iid":
        w.writerow(["x"])
        w.writerows([_fmt(v)] for v in data.y)
    elif schema in ("binary-regression", "linear-regression"):
        if data.X is None:
            raise ConfigurationError(f"schema {schema!r} needs a design matrix")
        k = data.X.shape[1] - 1
        w.writerow(["y", *(f"x{j}" for j in range(1, k + 1))])
        for i in range(data.n):
            w.writerow([_fmt(data.y[i]), *(_fmt(v) for v in data.X[i, 1:])])
    elif schema == "survival":
        cens = np.zeros(data.n, bool) if data.censored is None else data.censored
        w.writerow(["log_time", "censored"])
        for yi, ci in zip(data.y, cens):
            w.writerow([_fmt(-yi), int(ci)])
    else:
        raise ConfigurationError(f"unknown schema {schema!r}")
    return buf.getvalue()


def _number(text: str, line: int, column: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"column {column!r}: cannot parse {text!r} as a number", line) from None
    if not math.isfinite(v):
        raise ParseError(f"column {column!r}: non-finite value {text!r}", line)
    return v


_BINARY = {"1": 1.0, "0": 0.0, "yes": 1.0, "no": 0.0, "true": 1.0, "false": 0.0}


def ingest_csv(path, schema: str) -> Dataset:
    """Read and validate a dataset file.

    Schemas
    -------
    ``iid``
        one numeric column, preferably named ``x``.
    ``binary-regression``
        response ``y`` (or ``type``) in {0, 1, yes, no}; every other column
        is a numeric covariate and an intercept column is prepended.
    ``linear-regression``
        as above with a real-valued response.
    ``survival``
        ``time`` (> 0) or ``log_time``, plus an optional 0/1 ``censored``
        column; responses are stored as ``y = -log(time)``.

    Raises
    ------
    ParseError
        With the 1-based file line of the first malformed row.
    """
    text = Path(path).read_text()
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("empty file", 1) from None
    rows = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(row)}", line_no)
        rows.append((line_no, [c.strip() for c in row]))

    if schema == "iid":
        col = header.index("x") if "x" in header else (0 if len(header) == 1 else None)
        if col is None:
            raise ParseError("iid files need a column named 'x' or a single column", 1)
        return Dataset(np.array([_number(r[col], ln, header[col]) for ln, r in rows]))

    if schema in ("binary-regression", "linear-regression"):
        resp = next((c for c in ("y", "type") if c in header), None)
        if resp is None:
            raise ParseError("regression files need a response column 'y' or 'type'", 1)
        ri = header.index(resp)
        cov = [j for j in range(len(header)) if j != ri]
        y = []
        X = []
        for ln, r in rows:
            if schema == "binary-regression":
                key = r[ri].lower()
                if key not in _BINARY:
                    raise ParseError(f"response {r[ri]!r} is not binary", ln)
                y.append(_BINARY[key])
            else:
                y.append(_number(r[ri], ln, resp))
            X.append([1.0, *(_number(r[j], ln, header[j]) for j in cov)])
        X = np.array(X, dtype=float).reshape(len(rows), len(cov) + 1)
        return Dataset(np.array(y), X=X)

    if schema == "survival":
        if "time" in header:
            ti, log_scale = header.index("time"), False
        elif "log_time" in header:
            ti, log_scale = header.index("log_time"), True
        else:
            raise ParseError("survival files need a 'time' or 'log_time' column", 1)
        ci = header.index("censored") if "censored" in header else None
        y, c = [], []
        for ln, r in rows:
            v = _number(r[ti], ln, header[ti])
            if log_scale:
                y.append(-v)
            else:
                if not v > 0:
                    raise ParseError(f"survival time must be > 0, got {r[ti]!r}", ln)
                y.append(-math.log(v))
            if ci is not None:
                if r[ci] not in ("0", "1"):
                    raise ParseError(f"censored flag must be 0 or 1, got {r[ci]!r}", ln)
                c.append(r[ci] == "1")
            else:
                c.append(False)
        return Dataset(np.array(y), censored=np.array(c, dtype=bool))

    raise ConfigurationError(f"unknown schema {schema!r}")


def pima_dataset() -> Dataset:
    """The bundled 200-row diabetes sample: intercept and ``bmi``, response ``type``."""
    with resources.as_file(resources.files("mixtest") / "data" / "pima_tr.csv") as path:
        return ingest_csv(path, "binary-regression")


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------- config


def chain_to_dict(chain: ChainConfig) -> dict:
    prop = chain.alpha_proposal
    if isinstance(prop, FromPrior):
        p = {"kind": "prior"}
    elif isinstance(prop, MixedAlpha):
        p = {"kind": "mixed", "step": prop.step, "prior_prob": prop.prior_prob}
    else:
        p = {"kind": "logit-rw", "step": prop.step}
    return {"iterations": chain.iterations, "burn_in": chain.burn_in, "alpha_proposal": p,
            "alpha_substeps": chain.alpha_substeps}


def chain_from_dict(d: dict | None) -> ChainConfig:
    d = dict(d or {})
    p = d.get("alpha_proposal", {"kind": "logit-rw"})
    kind = p.get("kind", "logit-rw")
    if kind == "prior":
        prop = FromPrior()
    elif kind == "mixed":
        prop = MixedAlpha(float(p.get("step", 0.5)), float(p.get("prior_prob", 0.5)))
    elif kind == "logit-rw":
        prop = LogitRandomWalk(float(p.get("step", 0.5)))
    else:
        raise ConfigurationError(f"unknown alpha proposal {kind!r}")
    return ChainConfig(int(d.get("iterations", 10_000)), d.get("burn_in"), 0, prop,
                       record_allocations=False, alpha_substeps=int(d.get("alpha_substeps", 1)))


@dataclass(frozen=True)
class ExperimentConfig:
    """A grid of ``(a0, n)`` cells, each run ``replicas`` times."""

    test: str
    data_source: dict
    a0_grid: tuple
    n_grid: tuple
    replicas: int = DESK_MAX_REPLICAS
    chain: ChainConfig = field(default_factory=lambda: ChainConfig(record_allocations=False))
    outputs: str | None = None
    seed: int = 0
    sampler: str = "mh"
    oracle: bool = True
    full_scale: bool = False
    alpha_component: int | None = None
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        object.__setattr__(self, "a0_grid", tuple(float(a) for a in self.a0_grid))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        self.validate()

    def validate(self) -> None:
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigurationError(
                f"unsupported schema_version {self.schema_version}; expected {SCHEMA_VERSION}")
        if not self.a0_grid or not self.n_grid:
            raise ConfigurationError("a0_grid and n_grid must be nonempty")
        if any(not a > 0 for a in self.a0_grid):
            raise ConfigurationError("every a0 must be > 0")
        if any(n < 0 for n in self.n_grid):
            raise ConfigurationError("sample sizes must be nonnegative")
        if self.replicas < 1:
            raise ConfigurationError("replicas must be >= 1")
        if self.sampler not in ("mh", "gibbs"):
            raise ConfigurationError("sampler must be 'mh' or 'gibbs'")
        known = {k.value for k in PairKind} | set(EXTRA_TESTS)
        if self.test not in known:
            raise ConfigurationError(f"unknown test {self.test!r}; expected one of {sorted(known)}")
        if not self.full_scale and (self.replicas > DESK_MAX_REPLICAS or max(self.n_grid) > DESK_MAX_N):
            raise ConfigurationError(
                f"more than {DESK_MAX_REPLICAS} replicas or n > {DESK_MAX_N} needs full_scale")

    @property
    def weight_index(self) -> int:
        if self.alpha_component is not None:
            return int(self.alpha_component)
        if self.test in {k.value for k in PairKind}:
            return PairKind.parse(self.test).alpha_index
        if self.test.startswith("regression"):
            return REGRESSION_TRUE_COMPONENT
        return 0

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version, "test": self.test,
            "data_source": self.data_source, "a0_grid": list(self.a0_grid),
            "n_grid": list(self.n_grid), "replicas": self.replicas,
            "chain": chain_to_dict(self.chain), "outputs": self.outputs, "seed": self.seed,
            "sampler": self.sampler, "oracle": self.oracle, "full_scale": self.full_scale,
            "alpha_component": self.alpha_component,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "schema_version" not in d:
            raise ConfigurationError("config is missing 'schema_version'")
        unknown = set(d) - {"schema_version", "test", "data_source", "a0_grid", "n_grid", "replicas",
                            "chain", "outputs", "seed", "sampler", "oracle", "full_scale",
                            "alpha_component"}
        if unknown:
            raise ConfigurationError(f"unknown config keys {sorted(unknown)}")
        try:
            return cls(test=d["test"], data_source=d["data_source"], a0_grid=d["a0_grid"],
                       n_grid=d["n_grid"], replicas=int(d.get("replicas", DESK_MAX_REPLICAS)),
                       chain=chain_from_dict(d.get("chain")), outputs=d.get("outputs"),
                       seed=int(d.get("seed", 0)), sampler=d.get("sampler", "mh"),
                       oracle=bool(d.get("oracle", True)), full_scale=bool(d.get("full_scale", False)),
                       alpha_component=d.get("alpha_component"),
                       schema_version=int(d["schema_version"]))
        except KeyError as exc:
            raise ConfigurationError(f"config is missing {exc.args[0]!r}") from None

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from None


# ----------------------------------------------------------------- runs


@dataclass(frozen=True)
class ResultRow:
    test: str
    a0: float
    n: int
    replica: int
    estimator: str
    value: float
    runtime_ms: float
    seed: int
    error: str = ""

    def csv_fields(self) -> list:
        value = "" if not math.isfinite(self.value) else repr(float(self.value))
        return [self.test, repr(self.a0), self.n, self.replica, self.estimator, value, self.seed, self.error]


def cell_seeds(seed: int, ia0: int, i_n: int, replica: int) -> tuple[int, int]:
    """Independent data and chain seeds for one grid cell and replica."""
    data_seed, chain_seed = np.random.SeedSequence([seed, ia0, i_n, replica]).generate_state(2)
    return int(data_seed), int(chain_seed)


def _load_data(config: ExperimentConfig, n: int, data_seed: int) -> Dataset:
    src = config.data_source
    if src.get("kind") == "file":
        data = ingest_csv(src["path"], src.get("schema", "iid"))
        return data if n >= data.n else data.subset(np.arange(n))
    return simulate_dataset(src, data_seed, n=n)


def _sample_weights(config: ExperimentConfig, data: Dataset, a0: float, chain: ChainConfig):
    test = config.test
    if test == "logit-probit":
        trace, _ = run_logit_probit(data, a0, chain)
    elif test == "survival":
        trace, _ = run_survival_test(data, a0, chain)
    elif test.startswith("regression"):
        case = Case.SHARED_BETA if test == "regression-shared" else Case.SEPARATE_BETA
        trace = run_regression_gibbs(data, a0, case, chain)
    else:
        trace = run_pair(test, data, a0, chain, config.sampler)
    return trace.weights[:, config.weight_index]


def _oracle_prob(config: ExperimentConfig, data: Dataset) -> float:
    """Posterior probability of the model whose weight is reported."""
    res = pair_bayes_factor(config.test, data.y)
    p0 = res.posterior_prob_m1
    return p0 if config.weight_index == 0 else float(special.expit(-res.log_bf))


def _run_cell(config: ExperimentConfig, ia0: int, i_n: int, replica: int) -> list:
    a0 = config.a0_grid[ia0]
    n = config.n_grid[i_n]
    data_seed, chain_seed = cell_seeds(config.seed, ia0, i_n, replica)
    rows = []

    def row(est, value, ms, err=""):
        rows.append(ResultRow(config.test, a0, n, replica, est, value, ms, chain_seed, err))

    t0 = time.perf_counter()
    try:
        data = _load_data(config, n, data_seed)
        alpha = _sample_weights(config, data, a0, config.chain.with_seed(chain_seed))
        ms = 1e3 * (time.perf_counter() - t0)
        row("post_median_alpha", float(np.median(alpha)), ms)
        row("post_mean_alpha", float(np.mean(alpha)), ms)
    except (MixtestError, ValueError, ArithmeticError) as exc:
        ms = 1e3 * (time.perf_counter() - t0)
        msg = f"{type(exc).__name__}: {exc}"
        row("post_median_alpha", math.nan, ms, msg)
        row("post_mean_alpha", math.nan, ms, msg)
        data = None
    if config.oracle and config.test in {k.value for k in PairKind}:
        t1 = time.perf_counter()
        try:
            if data is None:
                data = _load_data(config, n, data_seed)
            p = _oracle_prob(config, data)
            row("bf_post_prob", p, 1e3 * (time.perf_counter() - t1))
        except (MixtestError, ValueError, ArithmeticError) as exc:
            row("bf_post_prob", math.nan, 1e3 * (time.perf_counter() - t1),
                f"{type(exc).__name__}: {exc}")
    return rows


def _digest(config: ExperimentConfig, rows: Sequence[ResultRow]) -> dict:
    cells = {}
    for r in rows:
        cells.setdefault((r.a0, r.n, r.estimator), []).append(r.value)
    summary = []
    for (a0, n, est), vals in sorted(cells.items()):
        v = np.array([x for x in vals if math.isfinite(x)])
        summary.append({"a0": a0, "n": n, "estimator": est, "count": int(v.size),
                        "errors": len(vals) - int(v.size),
                        "mean": float(v.mean()) if v.size else None,
                        "min": float(v.min()) if v.size else None,
                        "max": float(v.max()) if v.size else None})
    return {"schema_version": SCHEMA_VERSION, "config": config.to_dict(), "cells": summary}


def results_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in rows:
        w.writerow(r.csv_fields())
    return buf.getvalue()


def _sort_key(r: ResultRow):
    return (r.a0, r.n, r.replica, ESTIMATORS.index(r.estimator))


def run_experiment(config: ExperimentConfig, workers: int = 1) -> tuple[list, dict]:
    """Run every grid cell and replica.

    Cells run in a process pool when ``workers > 1``.  Rows are sorted before
    they are returned or written, so output does not depend on scheduling.
    With ``config.outputs`` set, ``results.csv``, ``timings.csv`` and
    ``summary.json`` are written there atomically.
    """
    config.validate()
    jobs = [(ia, i_n, r) for ia in range(len(config.a0_grid))
            for i_n in range(len(config.n_grid)) for r in range(config.replicas)]
    rows = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_cell, config, *job) for job in jobs]
            for f in futures:
                rows.extend(f.result())
    else:
        for job in jobs:
            rows.extend(_run_cell(config, *job))
    rows.sort(key=_sort_key)
    digest = _digest(config, rows)
    if config.outputs:
        out = Path(config.outputs)
        atomic_write(out / "results.csv", results_csv(rows))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["a0", "n", "replica", "estimator", "runtime_ms"])
        for r in rows:
            w.writerow([repr(r.a0), r.n, r.replica, r.estimator, f"{r.runtime_ms:.3f}"])
        atomic_write(out / "timings.csv", buf.getvalue())
        atomic_write(out / "summary.json", json.dumps(digest, indent=2, sort_keys=True) + "\n")
    return rows, digest


# ---------------------------------------------------------- consistency


def consistency_harness(test: str, true_component: int, n_grid: Sequence[int], replicas: int,
                        a0: float = 0.5, seed: int = 0, chain: ChainConfig | None = None,
                        sampler: str = "mh") -> list:
    """Per-``n`` concentration statistics of the weight under a true model.

    The weight ``alpha`` is that of ``true_component``, so its target is 1.
    Each row holds quantiles of ``|median(alpha) - 1|`` over replicas, the
    replica mean of ``log(n) * log(1 - E[alpha | x])`` and of
    ``log(1 - P(M_true | x))`` from the exact Bayes factor.
    """
    kind = PairKind.parse(test)
    if true_component not in (0, 1):
        raise ConfigurationError("true_component must be 0 or 1")
    if replicas < 1 or not len(n_grid):
        raise ConfigurationError("need a nonempty n_grid and replicas >= 1")
    chain = ChainConfig(record_allocations=False) if chain is None else chain
    family, params = PAIR_TRUTH[kind][true_component]
    out = []
    for i_n, n in enumerate(n_grid):
        n = int(n)
        if n < 1:
            raise ConfigurationError("consistency sample sizes must be >= 1")
        dev, mix_stat, bf_stat = [], [], []
        for r in range(replicas):
            data_seed, chain_seed = cell_seeds(seed, true_component, i_n, r)
            data = Dataset(dist.sample(family, params, n, np.random.default_rng(data_seed)))
            trace = run_pair(kind, data, a0, chain.with_seed(chain_seed), sampler)
            alpha = trace.weights[:, true_component]
            dev.append(abs(float(np.median(alpha)) - 1.0))
            with np.errstate(divide="ignore"):
                mix_stat.append(math.log(n) * math.log1p(-float(np.mean(alpha)))
                                if np.mean(alpha) < 1 else -math.inf)
            try:
                lbf = pair_bayes_factor(kind, data.y).log_bf
                # log(1 - P(M_true | x)) = log expit(-log odds of the true model)
                odds = lbf if true_component == 0 else -lbf
                bf_stat.append(float(-np.logaddexp(0.0, odds)))
            except (MixtestError, ValueError):
                bf_stat.append(math.nan)
        dev = np.array(dev)
        out.append({
            "n": n, "replicas": replicas,
            "abs_dev_q25": float(np.quantile(dev, 0.25)),
            "abs_dev_median": float(np.median(dev)),
            "abs_dev_q75": float(np.quantile(dev, 0.75)),
            "abs_dev_mean": float(dev.mean()),
            "log_n_log_1m_mean_alpha": float(np.mean(mix_stat)),
            "log_1m_post_prob": float(np.nanmean(bf_stat)) if np.any(np.isfinite(bf_stat)) else math.nan,
        })
    return out


__all__ = [
    "ExperimentConfig", "ResultRow", "atomic_write", "cell_seeds", "chain_from_dict", "chain_to_dict",
    "consistency_harness", "dataset_to_csv", "default_n_grid", "ingest_csv", "pima_dataset", "results_csv",
    "run_experiment", "simulate_dataset",
]
