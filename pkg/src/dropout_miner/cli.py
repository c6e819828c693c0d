"""
``dropout-miner`` command line.

Subcommands: gen, validate, train, evaluate, predict, report. Human-readable
tables go to stdout followed by the CSV block; ``--out`` also writes the CSV
block to a file. Exit codes: 0 ok, 1 internal error, 2 unreadable or
malformed input, 3 training/evaluation failure, 4 model or schema mismatch.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .arff import ArffError, parse_arff, validate, write_arff
from .evaluation import BadK, EmptyClass, cross_validate, format_metrics_csv, format_metrics_text
from .naive_bayes import (
    ModelFormatError,
    NaiveBayesError,
    TrainConfig,
    UnknownClass,
    deserialize_model,
    serialize_model,
    train,
)
from .report import (
    SchemaMismatch,
    at_risk_list,
    high_potential,
    high_potential_csv,
    high_potential_text,
    risk_list_csv,
    risk_list_text,
)
from .schema import TARGET
from .synth import SpecFormatError, default_spec, describe_spec, dump_spec, generate, load_spec

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_TRAIN = 3
EXIT_MODEL = 4

SEED_ENV = "DROPOUT_MINER_SEED"


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError(EXIT_INPUT, f"cannot read {path}: {exc}") from None


def _write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise CliError(EXIT_INTERNAL, f"cannot write {path}: {exc}") from None


def _load_dataset(path: str):
    try:
        return parse_arff(_read_text(path))
    except ArffError as exc:
        raise CliError(EXIT_INPUT, f"{path}: {exc}") from None


def _load_model(path: str):
    try:
        return deserialize_model(_read_text(path))
    except ModelFormatError as exc:
        raise CliError(EXIT_MODEL, f"{path}: {exc}") from None


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 1
    try:
        return _u64(raw)
    except argparse.ArgumentTypeError as exc:
        raise CliError(EXIT_INPUT, f"{SEED_ENV}: {exc}") from None


def _u64(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _non_negative_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value >= 0 or value == float("inf"):
        raise argparse.ArgumentTypeError("must be a finite number >= 0")
    return value


def _emit(human: str, machine: str, out) -> None:
    sys.stdout.write(human)
    sys.stdout.write("\n")
    sys.stdout.write(machine)
    if out:
        _write_text(out, machine)


# --------------------------------------------------------------------------
# subcommands

def cmd_gen(args) -> int:
    seed = _seed(args)
    if args.spec:
        try:
            spec = load_spec(_read_text(args.spec))
        except (SpecFormatError, ValueError) as exc:
            raise CliError(EXIT_INPUT, f"{args.spec}: {exc}") from None
        overrides = {}
        if args.n is not None:
            overrides["n"] = args.n
        if args.seed is not None or os.environ.get(SEED_ENV) is not None:
            overrides["seed"] = seed
        if overrides:
            spec = type(spec)(overrides.get("n", spec.n), spec.class_prior, spec.conditionals,
                              overrides.get("seed", spec.seed))
    else:
        spec = default_spec(args.n if args.n is not None else 165, seed)

    text = "".join(f"% {line}\n" for line in describe_spec(spec)) + write_arff(generate(spec))
    if args.output:
        _write_text(args.output, text)
    else:
        sys.stdout.write(text)
    if args.dump_spec:
        _write_text(args.dump_spec, dump_spec(spec))
    return EXIT_OK


def cmd_validate(args) -> int:
    d = _load_dataset(args.data)
    problems = validate(d)
    if problems:
        for p in problems:
            print(f"{args.data}: {p}", file=sys.stderr)
        return EXIT_INPUT
    print(f"{args.data}: ok ({len(d.instances)} instances, {len(d.attributes)} attributes)")
    return EXIT_OK


def cmd_train(args) -> int:
    d = _load_dataset(args.data)
    try:
        model = train(d, args.target, TrainConfig(smoothing_alpha=args.alpha))
    except NaiveBayesError as exc:
        raise CliError(EXIT_TRAIN, str(exc)) from None
    output = args.output or str(Path(args.data).with_suffix(".nbmodel"))
    _write_text(output, serialize_model(model))
    print(f"model written to {output}")
    print(f"class priors ({model.target_attribute}, {model.training_total} instances):")
    for c in model.classes:
        print(f"  {c.label}: {c.prior:.6f} ({c.count}/{model.training_total})")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    d = _load_dataset(args.data)
    try:
        cm, _ = cross_validate(d, args.target, args.k, _seed(args), TrainConfig(smoothing_alpha=args.alpha))
    except (NaiveBayesError, BadK, EmptyClass) as exc:
        raise CliError(EXIT_TRAIN, str(exc)) from None
    _emit(format_metrics_text(cm), format_metrics_csv(cm), args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    model = _load_model(args.model)
    if not 0 <= args.threshold < 1:
        raise CliError(EXIT_INPUT, f"--threshold must lie in [0, 1), got {args.threshold}")
    try:
        entries = high_potential(model, args.cls, args.threshold)
    except UnknownClass as exc:
        raise CliError(EXIT_MODEL, str(exc)) from None
    head = f"P(value | {model.target_attribute}={args.cls}) > {args.threshold}\n"
    _emit(head + high_potential_text(entries), high_potential_csv(entries), args.out)
    return EXIT_OK


def cmd_predict(args) -> int:
    model = _load_model(args.model)
    d = _load_dataset(args.data)
    try:
        entries = at_risk_list(model, d, args.risk_class, args.top_n)
    except (SchemaMismatch, UnknownClass) as exc:
        raise CliError(EXIT_MODEL, str(exc)) from None
    except NaiveBayesError as exc:
        raise CliError(EXIT_TRAIN, str(exc)) from None
    head = f"students ranked by P({model.target_attribute}={args.risk_class})\n"
    _emit(head + risk_list_text(entries), risk_list_csv(entries), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dropout-miner", description="Naive Bayes student dropout prediction.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def seed_flag(sp):
        sp.add_argument("--seed", type=_u64, default=None,
                        help=f"PRNG seed (default: ${SEED_ENV} or 1)")

    g = sub.add_parser("gen", help="generate a synthetic cohort as ARFF")
    g.add_argument("--n", type=_positive_int, default=None, help="number of students (default 165)")
    seed_flag(g)
    g.add_argument("--spec", help="cohortspec v1 file (default: built-in cohort)")
    g.add_argument("-o", "--output", help="ARFF output path (default stdout)")
    g.add_argument("--dump-spec", help="also write the cohort spec used")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("validate", help="check an ARFF file")
    v.add_argument("data")
    v.set_defaults(func=cmd_validate)

    t = sub.add_parser("train", help="train a model file")
    t.add_argument("data")
    t.add_argument("--target", default=TARGET)
    t.add_argument("--alpha", type=_non_negative_float, default=1.0, help="additive smoothing")
    t.add_argument("-o", "--output", help="model path (default: DATA with .nbmodel suffix)")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="stratified k-fold cross-validation")
    e.add_argument("data")
    e.add_argument("--target", default=TARGET)
    e.add_argument("--k", type=int, default=10)
    seed_flag(e)
    e.add_argument("--alpha", type=_non_negative_float, default=1.0)
    e.add_argument("--out", help="also write the CSV block here")
    e.set_defaults(func=cmd_evaluate)

    r = sub.add_parser("report", help="high-potential attribute values")
    r.add_argument("model")
    r.add_argument("--class", dest="cls", default="Yes")
    r.add_argument("--threshold", type=float, default=0.5)
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)

    pr = sub.add_parser("predict", help="rank students by risk")
    pr.add_argument("model")
    pr.add_argument("data")
    pr.add_argument("--risk-class", default="Yes")
    pr.add_argument("--top-n", type=int, default=None, help="keep the first N entries (default all)")
    pr.add_argument("--out")
    pr.set_defaults(func=cmd_predict)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"dropout-miner: {exc}", file=sys.stderr)
        return exc.code
    except Exception as exc:  # noqa: BLE001
        print(f"dropout-miner: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
