"""Command-line interface.

Subcommands
-----------
deficit hc|lsi|ghc|glsi   print a deficit report for a family member or file
evolve                    apply the inf-convolution flow and write the image
fit-extremizer            derive matching parameters and the model distance
rate                      run an experiment (CSV + figure + summary record)
pl                        hypothesis check / excess / conclusion distances

Functions are given either as --family 'kind:key=val,...' (with n among
the keys) or as --input FILE in the tabular text format.
"""

import argparse
import sys

import numpy as np

from . import deficits, extremizer, families, funcrep, harness, pl, report
from .deficits import HCParams
from .hopflax import (HopfLaxParams, inf_convolve_bruteforce,
                      inf_convolve_fast, radial_inf_convolve)


def _load_input(args):
    if getattr(args, "family", None):
        fam = families.parse_family(args.family)
        kwargs = {}
        if getattr(args, "rmax", None):
            kwargs["rmax"] = args.rmax
            kwargs["span"] = args.rmax
        if getattr(args, "nodes", None):
            kwargs["num"] = args.nodes
        return families.sample(fam, **kwargs), fam
    if getattr(args, "input", None):
        obj, meta = funcrep.load_function(args.input)
        return obj, meta
    raise SystemExit("one of --family or --input is required")


def _cmd_deficit(args):
    obj, _ = _load_input(args)
    if args.which == "hc":
        params = HCParams(p=args.p, t=args.t, alpha=args.alpha, beta=args.beta)
        rep = deficits.hc_deficit(obj, params)
    elif args.which == "lsi":
        rep = deficits.lsi_deficit(obj, args.p)
    elif args.which == "ghc":
        rep = deficits.ghc_deficit(obj, args.alpha, args.t)
    elif args.which == "glsi":
        rep = deficits.glsi_deficit(obj)
    else:
        raise SystemExit(f"unknown deficit kind {args.which!r}")
    print(rep.to_record())
    return 0


def _cmd_evolve(args):
    obj, _ = _load_input(args)
    params = HopfLaxParams(p=args.p, t=args.t)
    if args.method == "brute":
        image = inf_convolve_bruteforce(obj, params)
    elif args.method == "radial":
        image = radial_inf_convolve(obj, params)
    else:
        image = inf_convolve_fast(obj, params)
    funcrep.save_function(args.output, image, p=args.p)
    print(f"wrote {args.output}")
    return 0


def _cmd_fit(args):
    obj, _ = _load_input(args)
    if args.kind == "hc":
        params = HCParams(p=args.p, t=args.t, alpha=args.alpha, beta=args.beta)
        pars = extremizer.hc_params(obj, params)
    elif args.kind == "lsi":
        pars = extremizer.lsi_params(obj, args.p)
    elif args.kind == "ghc":
        pars = extremizer.ghc_params(obj, args.alpha, args.t)
    else:
        raise SystemExit(f"unknown extremizer kind {args.kind!r}")
    fit = extremizer.fit_translation(obj, pars)
    print(pars.to_record())
    print(f"x0 = {' '.join(f'{v:.17g}' for v in np.atleast_1d(fit.x0))}")
    print(f"distance = {fit.distance:.17g}")
    print(f"multimodal = {1 if fit.multimodal else 0}")
    return 0


def _cmd_rate(args):
    config = harness.ExperimentConfig.from_file(args.config, kind=args.experiment,
                                                strict=args.strict)
    rows, summary, ok = harness.run_experiment(config)
    print(report.format_record(summary))
    if args.strict and not ok:
        return 1
    return 0


def _cmd_pl(args):
    obj, _ = _load_input(args)
    if args.gaussian:
        triple = pl.build_gaussian_triple(obj, args.alpha, args.t)
    else:
        params = HCParams(p=args.p, t=args.t, alpha=args.alpha, beta=args.beta)
        triple = pl.build_hc_triple(obj, params)
    out = {}
    if args.which in ("check", "epsilon", "distances"):
        if args.which == "check":
            out["violation"] = pl.check_pl_hypothesis(triple, samples=args.samples,
                                                      seed=args.seed)
        elif args.which == "epsilon":
            out["epsilon"] = pl.pl_epsilon(triple)
        else:
            term1, term2 = pl.pl_conclusion_distances(triple)
            out["term1"] = term1
            out["term2"] = term2
    print(report.format_record(out))
    return 0


def _add_function_args(sub, need_p=True):
    sub.add_argument("--family", help="family spec 'kind:n=1,p=2,eps=0.05'")
    sub.add_argument("--input", help="tabular function file")
    sub.add_argument("--rmax", type=float, default=None)
    sub.add_argument("--nodes", type=int, default=None)
    if need_p:
        sub.add_argument("--p", type=float, default=2.0)
    sub.add_argument("--alpha", type=float, default=1.0)
    sub.add_argument("--beta", type=float, default=2.0)
    sub.add_argument("--t", type=float, default=1.0)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="infconv",
        description="Inf-convolution flow, hypercontractivity and "
                    "log-Sobolev deficits, stability-rate experiments.")
    subs = parser.add_subparsers(dest="command", required=True)

    d = subs.add_parser("deficit", help="compute a deficit report")
    d.add_argument("which", choices=("hc", "lsi", "ghc", "glsi"))
    _add_function_args(d)
    d.set_defaults(fn=_cmd_deficit)

    e = subs.add_parser("evolve", help="apply the flow, write the image")
    _add_function_args(e)
    e.add_argument("--method", choices=("brute", "fast", "radial"), default="fast")
    e.add_argument("--output", required=True)
    e.set_defaults(fn=_cmd_evolve)

    f = subs.add_parser("fit-extremizer", help="matching parameters + distance")
    f.add_argument("--kind", choices=("hc", "lsi", "ghc"), required=True)
    _add_function_args(f)
    f.set_defaults(fn=_cmd_fit)

    r = subs.add_parser("rate", help="run an experiment from a config file")
    r.add_argument("--experiment", choices=("quadratic", "sharpness", "limit",
                                            "equality"), required=True)
    r.add_argument("--config", required=True)
    r.add_argument("--strict", action="store_true")
    r.set_defaults(fn=_cmd_rate)

    q = subs.add_parser("pl", help="Prekopa-Leindler triple diagnostics")
    q.add_argument("which", choices=("check", "epsilon", "distances"))
    _add_function_args(q)
    q.add_argument("--input-g", dest="input", help="alias for --input")
    q.add_argument("--gaussian", action="store_true")
    q.add_argument("--samples", type=int, default=10000)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(fn=_cmd_pl)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
