"""Experiment harness: estimator-vs-truth error grids over seeded trials.

An experiment runs a grid of (distribution, sample size) cells; each cell
draws ``trials`` independent samples, runs the requested estimators, and
reports the root mean squared error against the analytically known truth.
Trials are seeded as base_seed + trial * 0x9E3779B9, so a spec plus seed
pins every byte of the output.

Non-finite per-trial estimates (the naive KL plugin on disjoint support, or
a refused functional) are excluded from the RMSE and tallied in the
``infCount`` column; a cell with no finite trials reports an infinite RMSE.

The wallClockMs column is written as 0 unless timing is explicitly enabled,
keeping default outputs byte-reproducible.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import apml1d, functionals
from .apml1d import KnownSupport, MinMassSupport, UnknownSupport, apml
from .apmldd import DEFAULT_KNN, apml_dd
from .core import Histogram, fingerprint
from .functionals import FunctionalSpec, mle_plugin
from .synth import GroundTruth, make_distribution, sample

__all__ = [
    "ExperimentSpec",
    "ResultRow",
    "run_experiment",
    "run_divergence_experiment",
    "run",
    "rows_to_csv",
    "parse_support",
    "CSV_HEADER",
]

CSV_HEADER = (
    "distribution,estimator,functional,n,m,trials,"
    "rmse,stderr,meanEstimate,infCount,wallClockMs"
)
_SEED_STRIDE = 0x9E3779B9
_SEED_MOD = 1 << 64


def parse_support(text: str):
    """Parse "known:K", "unknown", or "minmass:K" into a support spec."""
    kind, _, arg = text.partition(":")
    if kind == "known":
        return KnownSupport(k=int(arg))
    if kind == "unknown":
        return UnknownSupport()
    if kind == "minmass":
        return MinMassSupport(k=int(arg))
    raise ValueError(f"unknown support spec: {text}")


@dataclass(frozen=True)
class ExperimentSpec:
    """One estimation experiment over a grid of distributions and sizes.

    ``distributions`` holds family descriptors ({"kind": ..., params}) for
    one-sample functionals, or two-element lists of descriptors for
    divergences.  ``support`` applies to the fitted estimator only.
    """

    distributions: tuple
    functional: str
    sample_sizes: tuple[int, ...]
    trials: int
    base_seed: int
    estimators: tuple[str, ...] = ("apml", "mle")
    support: str = "unknown"
    m_sizes: tuple[int, ...] | None = None
    rho: float = functionals.DEFAULT_RHO
    knn: int = DEFAULT_KNN
    log_base: float = 2.0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if list(self.sample_sizes) != sorted(self.sample_sizes):
            raise ValueError("sample_sizes must be ascending")

    @classmethod
    def from_dict(cls, cfg: dict) -> "ExperimentSpec":
        dists = tuple(
            tuple(d) if isinstance(d, list) and isinstance(d[0], dict) else d
            for d in cfg["distributions"]
        )
        return cls(
            distributions=dists,
            functional=cfg["functional"],
            sample_sizes=tuple(cfg["sample_sizes"]),
            trials=int(cfg["trials"]),
            base_seed=int(cfg["base_seed"]),
            estimators=tuple(cfg.get("estimators", ("apml", "mle"))),
            support=cfg.get("support", "unknown"),
            m_sizes=tuple(cfg["m_sizes"]) if "m_sizes" in cfg else None,
            rho=float(cfg.get("rho", functionals.DEFAULT_RHO)),
            knn=int(cfg.get("knn", DEFAULT_KNN)),
            log_base=float(cfg.get("log_base", 2.0)),
        )

    @classmethod
    def from_json(cls, path: str) -> "ExperimentSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def fspec(self) -> FunctionalSpec:
        return FunctionalSpec.parse(self.functional, base=self.log_base)


@dataclass(frozen=True)
class ResultRow:
    distribution: str
    estimator: str
    functional: str
    n: int
    m: int
    trials: int
    rmse: float
    stderr: float
    mean_estimate: float
    inf_count: int
    wall_clock_ms: int

    def csv(self) -> str:
        return ",".join(
            [
                self.distribution,
                self.estimator,
                self.functional,
                str(self.n),
                str(self.m),
                str(self.trials),
                repr(self.rmse),
                repr(self.stderr),
                repr(self.mean_estimate),
                str(self.inf_count),
                str(self.wall_clock_ms),
            ]
        )


def _trial_seed(base_seed: int, trial: int) -> int:
    return (base_seed + trial * _SEED_STRIDE) % _SEED_MOD


def _worker_count() -> int:
    env = os.environ.get("APML_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def _map_trials(fn: Callable[[int], object], trials: int, serial: bool) -> list:
    workers = 1 if serial else _worker_count()
    if workers == 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials)))


def _truth_1d(fspec: FunctionalSpec, g: GroundTruth) -> float:
    masses = g.masses
    if fspec.kind == "entropy":
        return functionals.entropy(masses, base=fspec.base)
    if fspec.kind == "renyi":
        return functionals.renyi(masses, fspec.alpha, base=fspec.base)
    if fspec.kind == "support":
        return float(g.k)
    if fspec.kind == "l1uniform":
        return functionals.l1_to_uniform(masses, fspec.k)
    if fspec.kind == "sortedl1":
        return 0.0  # the estimate is itself the loss against the truth
    raise ValueError(f"{fspec.kind} is not a one-sample functional")


def _truth_2d(fspec: FunctionalSpec, ga: GroundTruth, gb: GroundTruth) -> float:
    width = max(ga.k, gb.k)
    p = np.pad(ga.masses, (0, width - ga.k))
    q = np.pad(gb.masses, (0, width - gb.k))
    if fspec.kind == "l1":
        return functionals.l1_distance(p, q)
    if fspec.kind == "kl":
        if np.any((p > 0) & (q == 0)):
            return math.inf
        return functionals.kl(p, q, rho=math.inf)
    raise ValueError(f"{fspec.kind} is not a divergence functional")


def _apml_estimate_1d(
    fspec: FunctionalSpec, support, h: Histogram, truth_masses: np.ndarray
) -> float:
    fp = fingerprint(h)
    if fspec.kind == "support":
        spec = support if isinstance(support, MinMassSupport) else MinMassSupport(
            k=fspec.k if fspec.k else h.n
        )
        return float(functionals.support_size(apml(fp, h.n, spec)))
    result = apml(fp, h.n, support)
    if fspec.kind == "entropy":
        return functionals.entropy(result, base=fspec.base)
    if fspec.kind == "renyi":
        return functionals.renyi(result, fspec.alpha, base=fspec.base)
    if fspec.kind == "l1uniform":
        return functionals.l1_to_uniform(result, fspec.k)
    if fspec.kind == "sortedl1":
        if isinstance(result.support, apml1d.ContinuousSupport):
            raise ValueError("cannot expand a continuous-part result")
        return functionals.sorted_l1(result.partition.dense(), truth_masses)
    raise ValueError(f"{fspec.kind} is not a one-sample functional")


def _aggregate(
    label: str,
    estimator: str,
    fspec_label: str,
    n: int,
    m: int,
    truth: float,
    estimates: Sequence[float],
    elapsed_ms: int,
) -> ResultRow:
    arr = np.asarray(estimates, dtype=float)
    finite = arr[np.isfinite(arr)]
    inf_count = int(arr.size - finite.size)
    if finite.size == 0:
        rmse, stderr, mean = math.inf, 0.0, math.inf
    else:
        rmse = float(np.sqrt(np.mean((finite - truth) ** 2)))
        mean = float(np.mean(finite))
        stderr = (
            float(np.std(finite, ddof=1) / math.sqrt(finite.size))
            if finite.size > 1
            else 0.0
        )
    return ResultRow(
        distribution=label,
        estimator=estimator,
        functional=fspec_label,
        n=n,
        m=m,
        trials=len(estimates),
        rmse=rmse,
        stderr=stderr,
        mean_estimate=mean,
        inf_count=inf_count,
        wall_clock_ms=elapsed_ms,
    )


def run_experiment(
    spec: ExperimentSpec,
    serial: bool = False,
    timing: bool = False,
    raw: list | None = None,
) -> list[ResultRow]:
    """Run a one-sample functional experiment; one row per grid cell."""
    fspec = spec.fspec()
    support = parse_support(spec.support)
    rows = []
    for dist_cfg in spec.distributions:
        g = make_distribution(**dist_cfg)
        truth = _truth_1d(fspec, g)
        for n in spec.sample_sizes:

            def one_trial(t: int) -> dict[str, float]:
                h = sample(g, n, _trial_seed(spec.base_seed, t))
                out = {}
                for est in spec.estimators:
                    try:
                        if est == "mle":
                            if fspec.kind == "sortedl1":
                                val = functionals.sorted_l1(
                                    functionals.empirical_masses([h])[0], g.masses
                                )
                            else:
                                val = mle_plugin(fspec, [h])
                        elif est == "apml":
                            val = _apml_estimate_1d(fspec, support, h, g.masses)
                        else:
                            raise ValueError(f"unknown estimator: {est}")
                    except ValueError:
                        val = math.nan  # incompatibility recorded, run continues
                    out[est] = val
                return out

            start = time.perf_counter()
            per_trial = _map_trials(one_trial, spec.trials, serial)
            elapsed = int((time.perf_counter() - start) * 1000) if timing else 0
            for est in spec.estimators:
                estimates = [out[est] for out in per_trial]
                if raw is not None:
                    raw.extend(
                        {
                            "distribution": g.label(),
                            "estimator": est,
                            "functional": fspec.label(),
                            "n": n,
                            "m": 0,
                            "trial": t,
                            "truth": truth,
                            "estimate": estimates[t],
                        }
                        for t in range(spec.trials)
                    )
                rows.append(
                    _aggregate(
                        g.label(), est, fspec.label(), n, 0, truth, estimates, elapsed
                    )
                )
    return rows


def run_divergence_experiment(
    spec: ExperimentSpec,
    serial: bool = False,
    timing: bool = False,
    raw: list | None = None,
) -> list[ResultRow]:
    """Run a two-sample divergence experiment over paired samples."""
    fspec = spec.fspec()
    support = parse_support(spec.support)
    known_k = support.k if isinstance(support, KnownSupport) else None
    m_sizes = spec.m_sizes if spec.m_sizes is not None else spec.sample_sizes
    rows = []
    for pair_cfg in spec.distributions:
        ga = make_distribution(**pair_cfg[0])
        gb = make_distribution(**pair_cfg[1])
        label = f"{ga.label()}|{gb.label()}"
        truth = _truth_2d(fspec, ga, gb)
        for n, m in zip(spec.sample_sizes, m_sizes):

            def one_trial(t: int) -> dict[str, float]:
                s = _trial_seed(spec.base_seed, t)
                hp = sample(ga, n, s)
                hq = sample(gb, m, (s + 1) % _SEED_MOD)
                out = {}
                for est in spec.estimators:
                    try:
                        if est == "mle":
                            val = mle_plugin(fspec, [hp, hq])
                        elif est == "apml":
                            _, part = apml_dd([hp, hq], known_k, k=spec.knn)
                            if fspec.kind == "kl":
                                val = functionals.kl_of_partition(part, rho=spec.rho)
                            else:
                                val = functionals.l1_of_partition(part)
                        else:
                            raise ValueError(f"unknown estimator: {est}")
                    except ValueError:
                        val = math.nan
                    out[est] = val
                return out

            start = time.perf_counter()
            per_trial = _map_trials(one_trial, spec.trials, serial)
            elapsed = int((time.perf_counter() - start) * 1000) if timing else 0
            for est in spec.estimators:
                estimates = [out[est] for out in per_trial]
                if raw is not None:
                    raw.extend(
                        {
                            "distribution": label,
                            "estimator": est,
                            "functional": fspec.label(),
                            "n": n,
                            "m": m,
                            "trial": t,
                            "truth": truth,
                            "estimate": estimates[t],
                        }
                        for t in range(spec.trials)
                    )
                rows.append(
                    _aggregate(
                        label, est, fspec.label(), n, m, truth, estimates, elapsed
                    )
                )
    return rows


def run(
    spec: ExperimentSpec,
    serial: bool = False,
    timing: bool = False,
    raw: list | None = None,
) -> list[ResultRow]:
    """Dispatch on the functional kind to the matching experiment loop."""
    if spec.fspec().kind in ("kl", "l1"):
        return run_divergence_experiment(spec, serial=serial, timing=timing, raw=raw)
    return run_experiment(spec, serial=serial, timing=timing, raw=raw)


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    return "\n".join([CSV_HEADER] + [r.csv() for r in rows]) + "\n"
