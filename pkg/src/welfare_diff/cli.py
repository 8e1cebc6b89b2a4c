"""Command-line interface (``welfare-diff``).

Subcommands: ``estimate``, ``ci``, ``test``, ``simulate``, ``table`` and
``equivalize``. Results go to stdout or ``--output`` as CSV (default) or
JSON. Randomized commands print the seed they used to stderr so every run can
be replayed.
"""

import argparse
import math
import sys

import numpy as np

from . import io as wio
from .indices import IndexKind, estimate, influence
from .inference import METHODS, BootstrapConfig, confidence_interval, test_delta
from .montecarlo import default_workers, dgp, rho_theta_curve, run_coverage, std_increase_table
from .variance import PairedDataset, delta_variance

INDEX_CHOICES = (
    "mean",
    "gini",
    "gini-bc",
    "lorenz",
    "gini-pos-part",
    "gini-neg-part",
    "gini-positive",
    "lorenz-pos-part",
    "lorenz-neg-part",
    "lorenz-signed",
)


class UsageError(ValueError):
    pass


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _rho(text):
    if text.strip().lower() in ("uniform", "u(-1,1)"):
        return "uniform"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"rho must be a number or 'uniform', got {text!r}") from None


def _kind(args):
    return IndexKind.parse(args.index, args.p)


def _seed(args):
    if args.seed is None:
        args.seed = int(np.random.SeedSequence().entropy % (2**63))
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def _bootstrap_config(args):
    return BootstrapConfig(args.B, _seed(args), args.alpha)


def _paired(args):
    return wio.ingest(args.input)


# -- subcommands -----------------------------------------------------------

def cmd_estimate(args, doc):
    kind = _kind(args)
    x1, x2, m = wio.ingest_samples(args.input)
    for label, x in (("x1", x1), ("x2", x2)):
        if x.size == 0:
            continue
        if kind.is_vector:
            est = estimate(x, kind)
            psi = influence(x, kind).values
            var = psi.T @ psi / x.size
            for j, p in enumerate(kind.ps):
                sigma = math.sqrt(var[j, j])
                doc.records.append(
                    {"sample": label, "index": f"lorenz(p={p:g})", "estimate": float(est[j]),
                     "sigma": sigma, "se": sigma / math.sqrt(x.size), "n": int(x.size)}
                )
            continue
        iv = influence(x, kind)
        v = iv.in_domain
        sigma = math.sqrt(float(v @ v) / v.size)
        est = estimate(x, kind)
        doc.records.append(
            {"sample": label, "index": str(kind), "estimate": est, "sigma": sigma,
             "se": sigma / math.sqrt(v.size), "n": int(v.size)}
        )
    if x1.size >= 2 and x2.size >= 2 and not kind.is_vector:
        rep = delta_variance(PairedDataset.from_samples(x1, x2, m), kind)
        doc.records.append(
            {"sample": "x1-x2", "index": str(kind), "estimate": rep.delta,
             "sigma": math.sqrt(rep.sigma_delta_sq), "se": rep.se, "n": rep.m,
             "rho_hat": rep.rho_hat}
        )


def cmd_ci(args, doc):
    kind = _kind(args)
    data = _paired(args)
    cfg = _bootstrap_config(args) if args.method.endswith("boot") else None
    if cfg is not None:
        doc.metadata["seed"] = args.seed
        doc.metadata["B"] = args.B
    ci = confidence_interval(data, kind, args.method, args.alpha, cfg)
    doc.records.append({"index": str(kind), **ci.to_dict(), "width": ci.width, "m": data.m,
                        "n1": data.n1, "n2": data.n2})


def cmd_test(args, doc):
    kind = _kind(args)
    data = _paired(args)
    cfg = None
    if args.method == "boot":
        cfg = _bootstrap_config(args)
        doc.metadata["seed"] = args.seed
        doc.metadata["B"] = args.B
    res = test_delta(data, kind, args.null, args.method, cfg)
    doc.records.append({"index": str(kind), **res.to_dict()})


def cmd_simulate(args, doc):
    kind = _kind(args)
    seed = _seed(args)
    doc.metadata["seed"] = seed
    spec = dgp(args.dgp, args.rho, args.lam, args.n)
    methods = [m.strip().lower() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise UsageError(f"unknown method(s) {', '.join(bad)}; choose from {', '.join(METHODS)}")
    cfg = BootstrapConfig(args.B, None, args.alpha)
    workers = args.workers if args.workers is not None else default_workers()
    for r in run_coverage(spec, kind, methods, args.reps, cfg, seed, workers):
        doc.records.append({"dgp": spec.tag, "index": str(kind), **r.to_dict()})


def cmd_table(args, doc):
    seed = _seed(args)
    doc.metadata["seed"] = seed
    spec = dgp(args.dgp, 0.0, 0.0, args.n)
    names = [s.strip() for s in args.index.split(",") if s.strip()]
    kinds = [IndexKind.parse(s, args.p) for s in names]
    if args.which == "std-increase":
        rows = std_increase_table(spec, kinds, args.rhos, args.lambdas, args.reps, args.n, seed)
        doc.records.extend(rows)
    else:
        m = args.m if args.m is not None else args.n
        for kind in kinds:
            for rho, r in rho_theta_curve(spec, kind, args.rhos, m, args.reps, seed):
                doc.records.append({"kind": str(kind), "rho": rho, "rho_theta": r})


def cmd_equivalize(args, doc):
    values = wio.preprocess_equivalence(args.input)
    doc.records.extend({"equivalized_income": float(v)} for v in values)


# -- parser ----------------------------------------------------------------

def _add_output(p):
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format (default csv)")
    p.add_argument("--output", "-o", help="output file (default stdout)")


def _add_index(p, multiple=False):
    if multiple:
        p.add_argument("--index", default="mean,gini", help="comma-separated index kinds")
    else:
        p.add_argument("--index", required=True, choices=INDEX_CHOICES, type=str.lower)
    p.add_argument("--p", type=float, nargs="+", help="Lorenz ordinate(s) in (0, 1)")


def _add_boot(p):
    p.add_argument("--B", type=int, default=399, help="bootstrap replicates (default 399)")
    p.add_argument("--seed", type=int, help="random seed; generated and printed when omitted")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="welfare-diff",
        description="Inference on differences of welfare indices between overlapping samples.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="point estimates and standard errors")
    p.add_argument("--input", required=True, help="paired CSV with header x1,x2")
    _add_index(p)
    _add_output(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("ci", help="confidence interval for theta1 - theta2")
    p.add_argument("--input", required=True)
    _add_index(p)
    p.add_argument("--method", required=True, choices=METHODS, type=str.lower)
    p.add_argument("--alpha", type=float, default=0.05)
    _add_boot(p)
    _add_output(p)
    p.set_defaults(func=cmd_ci)

    p = sub.add_parser("test", help="two-sided test of theta1 - theta2 = c")
    p.add_argument("--input", required=True)
    _add_index(p)
    p.add_argument("--null", type=float, default=0.0, help="null value c (default 0)")
    p.add_argument("--method", choices=("asym", "boot"), default="asym", type=str.lower)
    p.add_argument("--alpha", type=float, default=0.05, help="only used to validate --B")
    _add_boot(p)
    _add_output(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("simulate", help="Monte Carlo coverage of CI methods")
    p.add_argument("--dgp", required=True, choices=("ia", "ib", "ic", "id", "iia", "iib"), type=str.lower)
    p.add_argument("--rho", type=_rho, default=0.0, help="copula correlation or 'uniform' (iia)")
    p.add_argument("--lambda", dest="lam", type=float, default=0.5, help="overlap portion")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, default=1000)
    _add_index(p)
    p.add_argument("--methods", default="os-asym", help=f"comma-separated subset of {','.join(METHODS)}")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--workers", type=int, help="process count (default $WELFARE_DIFF_WORKERS or 1)")
    _add_boot(p)
    _add_output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("table", help="standard-error increase table or rho_theta curve")
    p.add_argument("--which", required=True, choices=("std-increase", "rho-theta"))
    p.add_argument("--dgp", default="ia", choices=("ia", "ib", "ic", "id"), type=str.lower)
    _add_index(p, multiple=True)
    p.add_argument("--rhos", type=_floats, default=[-0.99, -0.5, 0.0, 0.5, 0.99])
    p.add_argument("--lambdas", type=_floats, default=[0.1, 0.5, 0.9])
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--n", type=int, default=2000, help="observations per replication")
    p.add_argument("--m", type=int, help="pairs per replication for rho-theta (default n)")
    p.add_argument("--seed", type=int)
    _add_output(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("equivalize", help="divide household income by the equivalence scale")
    p.add_argument("--input", required=True, help="CSV with income,adults,ch05,ch614,ch1517,workers")
    _add_output(p)
    p.set_defaults(func=cmd_equivalize)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    doc = wio.ResultDocument.new(args.command, argv=list(sys.argv[1:] if argv is None else argv))
    try:
        args.func(args, doc)
    except (ValueError, ArithmeticError, RuntimeError, TypeError, OSError) as exc:
        print(f"welfare-diff {args.command}: error: {exc}", file=sys.stderr)
        return 1
    text = doc.to_json() if args.format == "json" else doc.to_csv()
    if args.output:
        wio.atomic_write(args.output, text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
