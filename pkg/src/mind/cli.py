"""Command line interface: ``mind <subcommand> ...``.

Usage errors exit with status 2 and print usage text. Pipeline errors exit
with status 1 and print one JSON line ``{"error": ..., "type": ...}`` on
standard error. Results go to files; standard output gets stable
``key=value`` lines.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .altreps import MilesParams, miles_rep, minimax_rep, training_instances
from .analysis import nef_ner, nmf
from .classifiers import TrainConfig
from .data import dataset_summary, validate_dataset
from .datagen import GENERATORS, GenConfig, generate
from .evaluation import CVConfig, PipelineConfig, cross_validate, learning_curve
from .io import parse_mil_table, read_matrix, write_matrix, write_mil_table, write_report, write_table
from .pointset import symmetrize
from .space import MEASURES, DissimMatrix, Measure, build_representation, compute_matrix

SYM_CHOICES = ("none", "avg", "average", "min", "max")


def _emit(**fields):
    for k, v in fields.items():
        print(f"{k}={v}")


def _threads(args) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("MIND_THREADS")
    return int(env) if env else None


def _sym(name: str) -> str:
    return "average" if name == "avg" else name


def _measure(args) -> Measure:
    return Measure(args.measure, sigma=args.sigma, ridge=args.ridge,
                   max_instances=args.max_instances)


def _load(path):
    data = parse_mil_table(path)
    check = validate_dataset(data)
    if not check.ok:
        raise ValueError("invalid dataset: " + "; ".join(map(str, check.violations)))
    return data


def _pipeline(args) -> PipelineConfig:
    train = TrainConfig(C=args.C, tolerance=args.tolerance,
                        max_iterations=args.max_iterations, seed=args.seed)
    return PipelineConfig(measure=_measure(args), symmetrization=_sym(args.symmetrize),
                          representation=args.representation, classifier=args.classifier,
                          train=train, baseline=args.baseline, miles_sigma=args.miles_sigma,
                          prototypes=args.prototypes, n_prototypes=args.n_prototypes,
                          prototype_seed=args.prototype_seed, threads=_threads(args))


# -- subcommands --------------------------------------------------------------

def cmd_gen(args):
    config = GenConfig(args.bags_per_class, args.instances, args.dim, args.seed)
    data = generate(args.problem, config)
    write_mil_table(args.output, data)
    _emit(bags=len(data), dim=data.dim, output=args.output)


def cmd_dissim(args):
    data = _load(args.input)
    protos = _load(args.prototypes) if args.prototypes else data
    sym = _sym(args.symmetrize)
    mat = compute_matrix(data, protos.bags, _measure(args), sym, args.direction, _threads(args))
    write_matrix(args.output, mat)
    _emit(rows=mat.shape[0], cols=mat.shape[1], output=args.output)


def cmd_represent(args):
    data = _load(args.input)
    if args.baseline == "minimax":
        table = minimax_rep(data)
    elif args.baseline == "miles":
        source = _load(args.prototypes) if args.prototypes else data
        inst, names = training_instances(source)
        table = miles_rep(data, inst, MilesParams(args.miles_sigma), names)
    else:
        protos = _load(args.prototypes) if args.prototypes else data
        measure, threads = _measure(args), _threads(args)
        if args.representation == "to":
            D_to = compute_matrix(data, protos.bags, measure, _sym(args.symmetrize), "to", threads)
            table = build_representation(D_to, None, "to", data.labels)
        else:
            D_to = compute_matrix(data, protos.bags, measure, "none", "to", threads)
            D_from = compute_matrix(data, protos.bags, measure, "none", "from", threads)
            table = build_representation(D_to, D_from, args.representation, data.labels)
    write_table(args.output, table)
    _emit(rows=table.shape[0], features=table.shape[1], output=args.output)


def cmd_cv(args):
    data = _load(args.input)
    config = CVConfig(args.folds, args.repeats, args.seed, _pipeline(args))
    report = cross_validate(data, config)
    body = report.as_dict()
    body["dataset"] = args.input
    write_report(args.output, "cv", body)
    _emit(mean_auc=repr(report.mean_auc), standard_error=repr(report.standard_error),
          folds=len(report.fold_aucs), output=args.output)


def cmd_curve(args):
    data = _load(args.input)
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    if not sizes or min(sizes) < 1:
        raise ValueError("--sizes must list positive integers")
    reports = learning_curve(data, sizes, args.iterations, _pipeline(args), args.seed,
                             args.test_fraction)
    rows = []
    for size, rep in zip(sizes, reports):
        rows.append({"bags_per_class": size, **rep.as_dict()})
        _emit(bags_per_class=size, mean_auc=repr(rep.mean_auc),
              standard_error=repr(rep.standard_error))
    write_report(args.output, "curve",
                 {"dataset": args.input, "sizes": sizes, "iterations": args.iterations,
                  "seed": args.seed, "curve": rows})
    _emit(output=args.output)


def cmd_analyze(args):
    mat = read_matrix(args.input)
    values = mat.values
    dev = float(np.abs(values - values.T).max()) if values.shape[0] == values.shape[1] else None
    if dev is None:
        raise ValueError(f"matrix must be square for analysis, got {values.shape}")
    symmetrized = dev > 0
    if symmetrized:
        values = symmetrize(values, values.T, "average")
    square = DissimMatrix(mat.rows, mat.cols, values, mat.measure,
                          "average" if symmetrized else mat.symmetrization, mat.direction)
    spectrum = nef_ner(square, args.square_first, args.input)
    metric = nmf(mat, seed=args.seed)
    write_report(args.output, "analysis", {
        "config": {"input": args.input, "square_first": args.square_first, "seed": args.seed,
                   "measure": mat.measure, "symmetrized_for_spectrum": symmetrized},
        "spectrum": spectrum.as_dict(),
        "metricity": metric.as_dict(),
    })
    _emit(nef=repr(spectrum.nef), ner=repr(spectrum.ner), nmf=repr(metric.nmf),
          output=args.output)


def cmd_summary(args):
    data = parse_mil_table(args.input)
    check = validate_dataset(data)
    s = dataset_summary(data)
    _emit(positive_bags=s.positive_bags, negative_bags=s.negative_bags, dim=s.dim,
          instances=s.instances, min_size=s.min_size, avg_size=repr(s.avg_size),
          max_size=s.max_size, valid=str(check.ok).lower())
    for v in check.violations:
        _emit(violation=str(v))
    if args.output:
        write_report(args.output, "summary", {"config": {"input": args.input},
                                              "summary": s.__dict__, "valid": check.ok,
                                              "violations": [str(v) for v in check.violations]})


# -- parser -------------------------------------------------------------------

def _add_io(p, output=True, required_output=True):
    p.add_argument("-i", "--input", required=True)
    if output:
        p.add_argument("-o", "--output", required=required_output)


def _add_measure(p):
    p.add_argument("--measure", choices=MEASURES, default="meanmin")
    p.add_argument("--symmetrize", choices=SYM_CHOICES, default="avg")
    p.add_argument("--sigma", type=float, help="Cauchy-Schwarz kernel width (default sqrt(dim))")
    p.add_argument("--ridge", type=float, help="Mahalanobis ridge (default automatic)")
    p.add_argument("--max-instances", type=int, default=512, help="EMD bag size cap")
    p.add_argument("--threads", type=int, help="worker threads (default $MIND_THREADS or 1)")


def _add_pipeline(p):
    _add_measure(p)
    p.add_argument("--classifier", choices=("logistic", "svm"), default="svm")
    p.add_argument("--representation", choices=("to", "from", "extended"), default="to")
    p.add_argument("--baseline", choices=("minimax", "miles"))
    p.add_argument("--miles-sigma", type=float, default=10.0)
    p.add_argument("--prototypes", choices=("all", "random"), default="all")
    p.add_argument("--n-prototypes", type=int)
    p.add_argument("--prototype-seed", type=int, default=0)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--max-iterations", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mind", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mind {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an artificial dataset")
    p.add_argument("--problem", choices=tuple(GENERATORS), required=True)
    p.add_argument("--bags-per-class", type=int, default=50)
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("dissim", help="compute a bag dissimilarity matrix")
    _add_io(p)
    _add_measure(p)
    p.add_argument("--direction", choices=("to", "from"), default="to")
    p.add_argument("--prototypes", help="dataset whose bags are the columns (default: input)")
    p.set_defaults(func=cmd_dissim)

    p = sub.add_parser("represent", help="write the feature table of a dataset")
    _add_io(p)
    _add_measure(p)
    p.add_argument("--representation", choices=("to", "from", "extended"), default="to")
    p.add_argument("--baseline", choices=("minimax", "miles"))
    p.add_argument("--miles-sigma", type=float, default=10.0)
    p.add_argument("--prototypes", help="dataset of prototype bags (default: input)")
    p.set_defaults(func=cmd_represent)

    p = sub.add_parser("cv", help="repeated stratified cross-validation")
    _add_io(p)
    _add_pipeline(p)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--repeats", type=int, default=5)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("curve", help="learning curve over training bags per class")
    _add_io(p)
    _add_pipeline(p)
    p.add_argument("--sizes", default="5,10,20,40")
    p.add_argument("--iterations", type=int, default=20)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("analyze", help="NEF, NER and NMF of a square matrix")
    _add_io(p)
    p.add_argument("--square-first", action="store_true",
                   help="square entries before double centering (distance-scale measures)")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled triples")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("summary", help="bag and instance counts of a dataset")
    _add_io(p, required_output=False)
    p.set_defaults(func=cmd_summary)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except Exception as exc:  # noqa: BLE001
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
