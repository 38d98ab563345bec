"""
The ``pacteach`` command line::

    pacteach evaluate --instance ex.json --set x1,x2 --q 1 --mode id
    pacteach solve --instance ex.json --objective size --q 1 --p 0.8 \\
        --mode id
    pacteach heuristic --instance ex.json --criterion uniqueness \\
        --stop size:1
    pacteach simulate --instance ex.json --set x1,x2 --q 1 --mode id \\
        --trials 100000 --seed 7
    pacteach gen --family multiples --ks 5,7,11,13,17 --x-max 1000 \\
        --out multiples.json
    pacteach simmatrix --instance ex.json --mode em
    pacteach profile --instance multiples.json
    pacteach profile --instance multiples.json --pairs

Reports are JSON (``--format json``, the default) or an aligned table.
Exit codes: 0 on success, including infeasible solves; 2 for usage errors;
3 for malformed instance or data files; 4 when a solve ran out of budget.
The default ``--threads`` is read from ``PACTEACH_THREADS``.
"""

import argparse
import logging
import sys

import numpy as np
from pint.errors import PintError

from . import Q_
from . import generators as gen
from . import heuristics as heu
from . import learners as lrn
from . import optimizers as opt
from .helpers import Budget, default_threads, round_significant
from .instance import TeachingSet, good_partition, similarity_matrix
from .io import (
    InstanceFormatError,
    dump_instance,
    format_report,
    load_instance,
    serialize_instance,
    solve_report,
)
from .probability import success_probability

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FORMAT = 3
EXIT_BUDGET = 4

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"


class UsageError(Exception):
    """Arguments that parse but do not make sense together."""


def _duration(text):
    try:
        return Budget(max_time=Q_(text)).max_time
    except (PintError, ValueError, TypeError) as err:
        raise argparse.ArgumentTypeError(
            f"invalid time {text!r} ({err})"
        ) from None


def _id_list(text):
    ids = [part.strip() for part in text.split(",") if part.strip()]
    if not ids:
        raise argparse.ArgumentTypeError("expected comma separated ids")
    return ids


def _int_list(text):
    try:
        return [int(part) for part in _id_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma separated integers, got {text!r}"
        ) from None


def _gamma_source(text):
    if text == "zero":
        return text
    try:
        return float(text)
    except ValueError:
        return text


def _add_instance(parser):
    parser.add_argument("--instance", required=True, metavar="FILE",
                        help="instance JSON file")


def _add_mode(parser, required=True):
    parser.add_argument("--mode", choices=["id", "em"], required=required,
                        help="identification or employment similarity")


def _add_format(parser):
    parser.add_argument("--format", choices=["json", "table"],
                        default="json", help="report format")


def _add_threads(parser):
    parser.add_argument("--threads", type=int, default=default_threads(),
                        help="worker threads (default: $PACTEACH_THREADS "
                        "or 1)")


def build_parser():
    """
    The argument parser of the ``pacteach`` command.

    Returns
    -------
    :class:`argparse.ArgumentParser`
    """

    parser = argparse.ArgumentParser(
        prog="pacteach",
        description="Teaching sets for learners with deductive errors.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="log progress (-vv for debug output)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="success probability of a set")
    _add_instance(p)
    p.add_argument("--set", type=_id_list, required=True, dest="ids",
                   help="comma separated example ids")
    p.add_argument("--q", type=float, required=True)
    _add_mode(p)
    _add_format(p)

    p = sub.add_parser("solve", help="optimal teaching set")
    _add_instance(p)
    p.add_argument("--objective", required=True,
                   choices=[o.value for o in opt.Objective])
    p.add_argument("--q", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--d", type=int, default=2,
                   help="decimal digits of the q grid (approx)")
    p.add_argument("--exact", action="store_true",
                   help="search exact similarity values (approx, id)")
    _add_mode(p, required=False)
    _add_threads(p)
    p.add_argument("--max-subsets", type=int, default=None)
    p.add_argument("--max-time", type=_duration, default=None,
                   help='wall time limit, e.g. "90 s" or "2 min"')
    _add_format(p)

    p = sub.add_parser("heuristic", help="greedy heuristic teaching set")
    _add_instance(p)
    p.add_argument("--criterion", required=True,
                   choices=sorted(heu.get_criteria_data()))
    p.add_argument("--alpha", type=float, default=heu.DEFAULT_ALPHA)
    p.add_argument("--stop", required=True,
                   help="size:K or prob:P@Q")
    _add_mode(p, required=False)
    _add_format(p)

    p = sub.add_parser("simulate", help="Monte Carlo learner simulation")
    _add_instance(p)
    p.add_argument("--set", type=_id_list, required=True, dest="ids")
    p.add_argument("--q", type=float, required=True)
    _add_mode(p)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--learner", choices=[v.value for v in lrn.Learner],
                   default="prudent")
    p.add_argument("--tie", choices=[v.value for v in lrn.TieRule],
                   default="worst")
    _add_threads(p)
    _add_format(p)

    p = sub.add_parser("gen", help="generate a synthetic instance")
    p.add_argument("--family", required=True,
                   choices=gen.get_generator_names())
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--target", type=int, default=0,
                   help="index of the target concept")
    p.add_argument("--out", metavar="FILE",
                   help="instance file (default: stdout)")
    p.add_argument("--ks", type=_int_list, help="multiples: divisors")
    p.add_argument("--x-max", type=int, help="multiples: largest example")
    p.add_argument("--gamma", type=_gamma_source, default="zero",
                   help="multiples: zero, a constant or a CSV file")
    p.add_argument("--n", type=int, help="concepts (circles, random)")
    p.add_argument("--m", type=int, help="examples (circles, random)")
    p.add_argument("--error-model", choices=gen.ERROR_MODELS,
                   default="zero", help="circles: error model")
    p.add_argument("--width", type=float, default=0.05)
    p.add_argument("--gamma0", type=float, default=0.3)
    p.add_argument("--scale", type=float, default=0.1)
    p.add_argument("--points-csv", metavar="FILE",
                   help="circles: write point coordinates and target errors")
    p.add_argument("--gamma-max", type=float, default=0.3,
                   help="random: largest error")
    p.add_argument("--density", type=float, default=0.5,
                   help="random: label density")

    p = sub.add_parser("simmatrix", help="pairwise similarity CSV")
    _add_instance(p)
    _add_mode(p)
    p.add_argument("--out", metavar="FILE")

    p = sub.add_parser("profile", help="deductive error profile CSV")
    _add_instance(p)
    p.add_argument("--pairs", action="store_true",
                   help="profile identifying pairs of shared examples")
    p.add_argument("--out", metavar="FILE")

    return parser


def _output(path, write):
    if path is None:
        write(sys.stdout)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            write(fh)


def _teaching_set(inst, ids):
    try:
        return TeachingSet.from_ids(inst, ids)
    except ValueError as err:
        raise UsageError(str(err)) from None


def _evaluate(args):
    inst = load_instance(args.instance)
    s = _teaching_set(inst, args.ids)
    partition = good_partition(inst, args.q, args.mode)
    report = {
        "mode": partition.mode.value,
        "q": round_significant(partition.q),
        "teaching_set": [[inst.examples[i], lab]
                         for i, lab in zip(s.indices, s.labels)],
        "success_probability": round_significant(
            success_probability(inst, s, partition)
        ),
        "good": [inst.concepts[c] for c in sorted(partition.good)],
        "bad": [inst.concepts[c] for c in sorted(partition.bad)],
    }
    print(format_report(report, args.format))
    return EXIT_OK


_REQUIRED = {
    "probable": ("q", "k", "mode"),
    "approx": ("p", "k", "mode"),
    "size": ("q", "p", "mode"),
    "classical": (),
}


def _solve(args):
    missing = [f"--{name}" for name in _REQUIRED[args.objective]
               if getattr(args, name) is None]
    if missing:
        raise UsageError(
            f"--objective {args.objective} requires {', '.join(missing)}"
        )
    if args.exact and args.objective != "approx":
        raise UsageError("--exact only applies to --objective approx")

    inst = load_instance(args.instance)
    budget = Budget(max_subsets=args.max_subsets, max_time=args.max_time)
    kwargs = {"budget": budget, "threads": args.threads}
    if args.objective == "probable":
        res = opt.probable_optimize(inst, args.q, args.k, args.mode,
                                    **kwargs)
    elif args.objective == "approx":
        res = opt.approx_optimize(inst, args.p, args.k, args.d, args.mode,
                                  exact=args.exact, **kwargs)
    elif args.objective == "size":
        res = opt.size_optimize(inst, args.q, args.p, args.mode, **kwargs)
    else:
        res = opt.naive_teaching_set(inst, args.k, **kwargs)
    print(format_report(solve_report(inst, res), args.format))
    return EXIT_BUDGET if res.budget_exhausted else EXIT_OK


def _heuristic(args):
    stop = heu.parse_stop_rule(args.stop)
    if isinstance(stop, heu.StopAtSize) and args.mode is not None:
        raise UsageError("--mode only applies to a prob:P@Q stop rule")
    if isinstance(stop, heu.StopAtProbability) and args.mode is not None:
        stop = heu.StopAtProbability(stop.p, stop.q, args.mode)
    inst = load_instance(args.instance)
    res = heu.greedy_teaching_set(inst, args.criterion, args.alpha, stop)
    scores = [
        {
            "example": inst.examples[sc.example_index],
            "uniqueness": round_significant(sc.uniqueness),
            "homogeneity": round_significant(sc.homogeneity),
            "combined": round_significant(sc.combined),
            "rival_uniqueness": round_significant(sc.rival_uniqueness),
        }
        for sc in heu.score_examples(inst, args.alpha)
    ]
    report = {
        "criterion": args.criterion,
        "alpha": args.alpha,
        "stop": args.stop,
        "teaching_set": [[inst.examples[i], lab] for i, lab in
                         zip(res.teaching_set.indices,
                             res.teaching_set.labels)],
        "satisfied": res.satisfied,
        "achieved_p": round_significant(res.achieved_p),
        "scores": scores,
    }
    print(format_report(report, args.format))
    return EXIT_OK


def _simulate(args):
    inst = load_instance(args.instance)
    s = _teaching_set(inst, args.ids)
    partition = good_partition(inst, args.q, args.mode)
    est = lrn.monte_carlo_success(inst, s, partition, args.trials,
                                  args.seed, args.learner, args.tie,
                                  threads=args.threads)
    report = {
        "learner": args.learner,
        "tie": args.tie,
        "trials": est.trials,
        "seed": args.seed,
        "successes": est.successes,
        "estimate": round_significant(est.estimate),
        "standard_error": round_significant(est.standard_error),
        "success_probability": round_significant(
            success_probability(inst, s, partition)
        ),
    }
    print(format_report(report, args.format))
    return EXIT_OK


def _require(args, *names):
    missing = [f"--{name.replace('_', '-')}" for name in names
               if getattr(args, name) is None]
    if missing:
        raise UsageError(
            f"--family {args.family} requires {', '.join(missing)}"
        )


def _gen(args):
    if args.points_csv and args.family != "circles":
        raise UsageError("--points-csv only applies to --family circles")
    layout = None
    if args.family == "multiples":
        _require(args, "ks", "x_max")
        inst = gen.gen_multiples(args.ks, args.x_max, args.gamma,
                                 args.target)
    elif args.family == "circles":
        _require(args, "n", "m")
        layout = gen.sample_circles(args.n, args.m, args.seed)
        inst = gen.circles_instance(
            layout, args.error_model, args.target, width=args.width,
            gamma0=args.gamma0, scale=args.scale,
        )
    elif args.family == "random":
        _require(args, "n", "m")
        inst = gen.gen_random(args.n, args.m, args.gamma_max, args.density,
                              args.seed, args.target)
    else:
        inst = gen.generate(args.family, seed=args.seed)

    if args.out is None:
        sys.stdout.write(serialize_instance(inst))
    else:
        dump_instance(inst, args.out)
    if args.points_csv:
        t = inst.target
        table = np.column_stack(
            [layout.points, inst.consistency[t], inst.gamma[t]]
        )
        _output(args.points_csv, lambda fh: np.savetxt(
            fh, table, fmt="%.12g", delimiter=",",
            header="x,y,label,gamma", comments="",
        ))
    return EXIT_OK


def _simmatrix(args):
    inst = load_instance(args.instance)
    matrix = similarity_matrix(inst, args.mode)
    _output(args.out, lambda fh: np.savetxt(
        fh, matrix, fmt="%.12g", delimiter=",",
        header=",".join(inst.concepts), comments="",
    ))
    return EXIT_OK


def _profile(args):
    inst = load_instance(args.instance)
    if args.pairs:
        rows = heu.pair_error_profile(inst, gen.identifying_pairs(inst))
        header = "positive,negative,concept,mean_error,pair_p"
        records = [
            [inst.examples[r.positive_index], inst.examples[r.negative_index],
             inst.concepts[r.concept_index], f"{r.mean_error:.12g}",
             f"{r.pair_p:.12g}"]
            for r in rows
        ]
    else:
        rows = heu.deductive_error_profile(inst,
                                           gen.unique_divisor_examples(inst))
        header = "example,concept,mean_error,singleton_p"
        records = [
            [inst.examples[r.example_index], inst.concepts[r.concept_index],
             f"{r.mean_error:.12g}", f"{r.singleton_p:.12g}"]
            for r in rows
        ]
    columns = header.count(",") + 1
    table = np.array(records, dtype=object).reshape(-1, columns)
    _output(args.out, lambda fh: np.savetxt(
        fh, table, fmt="%s", delimiter=",", header=header, comments="",
    ))
    return EXIT_OK


_COMMANDS = {
    "evaluate": _evaluate,
    "solve": _solve,
    "heuristic": _heuristic,
    "simulate": _simulate,
    "gen": _gen,
    "simmatrix": _simmatrix,
    "profile": _profile,
}


def main(argv=None):
    """
    Run the ``pacteach`` command.

    Parameters
    ----------
    argv : :class:`list` of :class:`str`, optional
        Arguments without the program name, by default ``sys.argv[1:]``.

    Returns
    -------
    :class:`int`
        The exit code.
    """

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code
    if args.verbose:
        level = logging.DEBUG if args.verbose > 1 else logging.INFO
        logging.basicConfig(level=level, format=LOG_FORMAT)

    try:
        return _COMMANDS[args.command](args)
    except InstanceFormatError as err:
        print(f"pacteach: format error: {err}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as err:
        print(f"pacteach: {err}", file=sys.stderr)
        return EXIT_FORMAT
    except (UsageError, ValueError) as err:
        print(f"pacteach {args.command}: error: {err}", file=sys.stderr)
        return EXIT_USAGE
