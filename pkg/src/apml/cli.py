"""Command-line interface.

Subcommands: ``fit`` (one-sample approximate PML), ``fit2d`` (multi-sample),
``estimate`` (functional plugins), ``oracle`` (exact small-scale reference
computations), ``synth`` (seeded synthetic histograms), ``bench`` (the
experiment harness), and ``report`` (figures from bench output).

Exit codes: 0 on success, 2 on usage errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import bench as bench_mod
from . import formats, functionals, oracle, report, synth
from .apml1d import ContinuousSupport, KnownSupport, MinMassSupport, apml
from .apmldd import apml_dd, greedy_merge_knn, optimize_support_dd
from .bench import ExperimentSpec, parse_support, rows_to_csv
from .core import fingerprint
from .functionals import FunctionalSpec


def _load_histogram(path: str):
    with open(path) as fh:
        return formats.read_histogram(fh)


def _load_input(args):
    """Resolve --hist / --samples / --fingerprint into (fingerprint, n)."""
    if args.fingerprint:
        with open(args.fingerprint) as fh:
            return formats.fingerprint_from_json(fh.read())
    if args.samples:
        with open(args.samples) as fh:
            h = formats.read_samples(fh)
    else:
        h = _load_histogram(args.hist)
    return fingerprint(h), h.n


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _cmd_fit(args) -> int:
    f, n = _load_input(args)
    result = apml(f, n, parse_support(args.support))
    _emit(formats.result_to_json(result), args.out)
    return 0


def _cmd_fit2d(args) -> int:
    if args.fingerprint:
        with open(args.fingerprint) as fh:
            f = formats.fingerprint_dd_from_json(fh.read())
        spec = parse_support(args.support)
        if isinstance(spec, KnownSupport):
            if spec.k < f.k_hat:
                raise ValueError("support smaller than observed")
            part = greedy_merge_knn(f, f0=spec.k - f.k_hat, k=args.k)
        else:
            _, part = optimize_support_dd(f, k=args.k)
    else:
        if len(args.hist) < 2:
            raise ValueError("fit2d needs at least two --hist inputs")
        hs = [_load_histogram(p) for p in args.hist]
        spec = parse_support(args.support)
        known = spec.k if isinstance(spec, KnownSupport) else None
        _, part = apml_dd(hs, known, k=args.k)
    _emit(formats.partition_dd_to_json(part), args.out)
    return 0


def _cmd_estimate(args) -> int:
    fspec = FunctionalSpec.parse(
        args.functional, base=2.0 if args.base == "2" else math.e
    )
    hs = [_load_histogram(p) for p in args.hist]
    if args.estimator == "mle":
        estimate = functionals.mle_plugin(fspec, hs)
    elif fspec.kind in ("kl", "l1"):
        if len(hs) != 2:
            raise ValueError(f"{fspec.kind} requires two --hist inputs")
        spec = parse_support(args.support)
        known = spec.k if isinstance(spec, KnownSupport) else None
        _, part = apml_dd(hs, known, k=args.k)
        if fspec.kind == "kl":
            estimate = functionals.kl_of_partition(part, rho=args.rho)
        else:
            estimate = functionals.l1_of_partition(part)
    elif fspec.kind == "sortedl1":
        if len(hs) != 2:
            raise ValueError("sortedl1 requires two --hist inputs")
        spec = parse_support(args.support)
        dense = []
        for h in hs:
            r = apml(fingerprint(h), h.n, spec)
            if isinstance(r.support, ContinuousSupport):
                raise ValueError("cannot expand a continuous-part result")
            dense.append(r.partition.dense())
        estimate = functionals.sorted_l1(*dense)
    else:
        if len(hs) != 1:
            raise ValueError(f"{fspec.kind} requires exactly one --hist input")
        h = hs[0]
        spec = parse_support(args.support)
        if fspec.kind == "support" and not isinstance(spec, MinMassSupport):
            raise ValueError("support estimation requires --support minmass:K")
        result = apml(fingerprint(h), h.n, spec)
        if fspec.kind == "entropy":
            estimate = functionals.entropy(
                result, base=fspec.base, discrete_only=args.discrete_only
            )
        elif fspec.kind == "renyi":
            estimate = functionals.renyi(
                result, fspec.alpha, base=fspec.base, discrete_only=args.discrete_only
            )
        elif fspec.kind == "support":
            estimate = float(functionals.support_size(result))
        else:
            estimate = functionals.l1_to_uniform(result, fspec.k)
    payload = {
        "functional": fspec.label(),
        "estimator": args.estimator,
        "estimate": estimate,
    }
    _emit(json.dumps(payload), args.out)
    return 0


def _parse_floats(text: str) -> np.ndarray:
    return np.asarray([float(x) for x in text.split(",")], dtype=float)


def _cmd_oracle(args) -> int:
    if args.oracle_cmd == "permanent":
        matrix = np.asarray(json.loads(args.matrix), dtype=float)
        out = {"permanent": oracle.permanent(matrix)}
    elif args.oracle_cmd == "logprob":
        f, n = formats.fingerprint_from_json(args.fingerprint)
        out = {"logProb": oracle.log_prob_fingerprint(_parse_floats(args.p), f, n)}
    elif args.oracle_cmd == "logprob2d":
        f = formats.fingerprint_dd_from_json(args.fingerprint)
        ps = [_parse_floats(args.p), _parse_floats(args.q)]
        out = {"logProb": oracle.log_prob_fingerprint_dd(ps, f)}
    elif args.oracle_cmd == "grid":
        f, n = formats.fingerprint_from_json(args.fingerprint)
        best = oracle.exact_pml_grid(f, n, args.K, args.grid_steps)
        out = {"pml": best.tolist()}
    elif args.oracle_cmd == "em":
        h = _load_histogram(args.hist[0])
        p = oracle.em_pml_1d(h, args.K, tol=args.tol, max_iter=args.max_iter)
        out = {"pml": p.tolist()}
    elif args.oracle_cmd == "em2d":
        if len(args.hist) != 2:
            raise ValueError("em2d requires two --hist inputs")
        hp, hq = (_load_histogram(p) for p in args.hist)
        p, q = oracle.em_pml_2d(hp, hq, args.K, tol=args.tol, max_iter=args.max_iter)
        out = {"p": p.tolist(), "q": q.tolist()}
    elif args.oracle_cmd == "binary-pml":
        p = oracle.binary_exact_pml(args.count, args.n)
        out = {"pml": p.tolist()}
    elif args.oracle_cmd == "certificate":
        fires = oracle.dd_binary_nonuniformity_certificate(
            _parse_floats(args.phat).tolist(),
            [int(x) for x in args.ns.split(",")],
        )
        out = {"nonuniform": bool(fires)}
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(f"unknown oracle command: {args.oracle_cmd}")
    _emit(json.dumps(out), args.out)
    return 0


def _cmd_synth(args) -> int:
    params = {}
    if args.K is not None:
        params["k"] = args.K
    if args.alpha is not None:
        params["alpha"] = args.alpha
    if args.mean is not None:
        params["mean"] = args.mean
    g = synth.make_distribution(args.kind, **params)
    h = synth.sample(g, args.n, args.seed)
    with open(args.out, "w") as fh:
        formats.write_histogram(h, fh)
    return 0


def _cmd_bench(args) -> int:
    spec = ExperimentSpec.from_json(args.config)
    raw: list | None = [] if args.raw else None
    rows = bench_mod.run(spec, serial=args.serial, timing=args.timing, raw=raw)
    csv_text = rows_to_csv(rows)
    if args.out and not args.out.endswith(".json"):
        _emit(csv_text, args.out)
    elif args.out:
        _emit(
            json.dumps([row.__dict__ for row in rows], indent=2), args.out
        )
    else:
        print(csv_text, end="")
    if args.raw:
        with open(args.raw, "w") as fh:
            json.dump(raw, fh)
    if args.plot:
        if not args.out or args.out.endswith(".json"):
            raise ValueError("--plot requires a CSV --out path")
        report.render_figures(args.out, args.plot)
    return 0


def _cmd_report(args) -> int:
    paths = report.render_figures(args.results, args.out_dir)
    for path in paths:
        print(path)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apml",
        description="Approximate profile maximum likelihood toolkit",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    def add_input(p, fingerprint_help: str):
        p.add_argument("--hist", help="histogram file (symbol<TAB>count lines)")
        p.add_argument("--samples", help="sample file (one token per line)")
        p.add_argument("--fingerprint", help=fingerprint_help)

    fit = sub.add_parser("fit", help="fit the 1-D approximate PML")
    add_input(fit, "fingerprint JSON file")
    fit.add_argument("--support", default="unknown", help="known:K|unknown|minmass:K")
    fit.add_argument("--out")
    fit.set_defaults(func=_cmd_fit)

    fit2d = sub.add_parser("fit2d", help="fit the multi-sample approximate PML")
    fit2d.add_argument("--hist", action="append", default=[])
    fit2d.add_argument("--fingerprint", help="D-dimensional fingerprint JSON file")
    fit2d.add_argument("--support", default="unknown", help="known:K|unknown")
    fit2d.add_argument("--k", type=int, default=5, help="nearest-neighbor width")
    fit2d.add_argument("--out")
    fit2d.set_defaults(func=_cmd_fit2d)

    est = sub.add_parser("estimate", help="plugin functional estimates")
    est.add_argument(
        "--functional",
        required=True,
        help="entropy|renyi:A|support|l1uniform:K|sortedl1|kl|l1",
    )
    est.add_argument("--support", default="unknown", help="known:K|unknown|minmass:K")
    est.add_argument("--estimator", choices=("apml", "mle"), default="apml")
    est.add_argument("--hist", action="append", required=True)
    est.add_argument("--rho", type=float, default=functionals.DEFAULT_RHO)
    est.add_argument("--k", type=int, default=5)
    est.add_argument("--base", choices=("2", "e"), default="2")
    est.add_argument("--discrete-only", action="store_true")
    est.add_argument("--out")
    est.set_defaults(func=_cmd_estimate)

    orc = sub.add_parser("oracle", help="exact reference computations")
    osub = orc.add_subparsers(dest="oracle_cmd", required=True)
    perm = osub.add_parser("permanent")
    perm.add_argument("--matrix", required=True, help="JSON matrix literal")
    logprob = osub.add_parser("logprob")
    logprob.add_argument("--fingerprint", required=True, help="fingerprint JSON literal")
    logprob.add_argument("--p", required=True, help="comma-separated masses")
    logprob2d = osub.add_parser("logprob2d")
    logprob2d.add_argument("--fingerprint", required=True)
    logprob2d.add_argument("--p", required=True)
    logprob2d.add_argument("--q", required=True)
    grid = osub.add_parser("grid")
    grid.add_argument("--fingerprint", required=True)
    grid.add_argument("--K", type=int, required=True)
    grid.add_argument("--grid-steps", type=int, default=200)
    em = osub.add_parser("em")
    em2d = osub.add_parser("em2d")
    for p in (em, em2d):
        p.add_argument("--hist", action="append", required=True)
        p.add_argument("--K", type=int, required=True)
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--max-iter", type=int, default=10_000)
    binpml = osub.add_parser("binary-pml")
    binpml.add_argument("--count", type=int, required=True)
    binpml.add_argument("--n", type=int, required=True)
    cert = osub.add_parser("certificate")
    cert.add_argument("--phat", required=True, help="comma-separated first components")
    cert.add_argument("--ns", required=True, help="comma-separated sample sizes")
    for p in (perm, logprob, logprob2d, grid, em, em2d, binpml, cert):
        p.add_argument("--out")
    orc.set_defaults(func=_cmd_oracle)

    syn = sub.add_parser("synth", help="sample a synthetic distribution")
    syn.add_argument(
        "--kind",
        required=True,
        choices=("uniform", "mix2uniform", "zipf", "geometric", "mixgeomzipf"),
    )
    syn.add_argument("--K", type=int)
    syn.add_argument("--alpha", type=float)
    syn.add_argument("--mean", type=float)
    syn.add_argument("--n", type=int, required=True)
    syn.add_argument("--seed", type=int, required=True)
    syn.add_argument("--out", required=True)
    syn.set_defaults(func=_cmd_synth)

    ben = sub.add_parser("bench", help="run an experiment grid")
    ben.add_argument("--config", required=True)
    ben.add_argument("--out")
    ben.add_argument("--raw", help="persist per-trial estimates as JSON")
    ben.add_argument("--serial", action="store_true")
    ben.add_argument(
        "--timing",
        action="store_true",
        help="record wall-clock times (breaks byte-reproducibility)",
    )
    ben.add_argument("--plot", help="render figures into this directory")
    ben.set_defaults(func=_cmd_bench)

    rep = sub.add_parser("report", help="render figures from bench CSV output")
    rep.add_argument("--results", required=True)
    rep.add_argument("--out-dir", required=True)
    rep.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
