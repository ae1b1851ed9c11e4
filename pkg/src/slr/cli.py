"""Command-line interface: ``slr <subcommand> [flags]``.

Exit codes: 0 on success, 1 on any domain or I/O error, 2 on usage errors.
Results go to stdout; progress and diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import dataio, gradcheck, nn
from .datagen import GenConfig, generate_dataset
from .evaluation import (HandFilter, ModelConfig, evaluate, filter_hand_mode, format_confusion,
                         run_loocv, to_examples)
from .exceptions import DimensionMismatch, InsufficientClasses, SLRError
from .geometry import NormalizationConfig, normalize_joints
from .skeleton import FEATURES_PER_FRAME
from .training import TrainConfig, train

log = logging.getLogger("slr")


def _err(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def cmd_generate(args) -> int:
    config = GenConfig(num_classes=args.classes, num_signers=args.signers,
                       reps_per_signer=args.reps, frames_per_gesture=args.frames,
                       noise_sigma=args.noise, translation_range=args.translation, seed=args.seed)
    dataset = generate_dataset(config)
    dataio.write_dataset(dataset, args.out)
    print(f"{len(dataset)} sequences written")
    return 0


def cmd_normalize(args) -> int:
    config = NormalizationConfig(strict=args.strict)
    dataset = dataio.read_dataset(args.input)
    out = []
    degenerate = 0
    for seq in dataset:
        joints, _, _, flags = normalize_joints(seq.joints, config)
        degenerate += int(flags.sum())
        out.append(seq.with_joints(joints))
    dataio.write_dataset(out, args.out)
    print(f"{len(out)} sequences normalized, {degenerate} degenerate frames")
    return 0


def _labelled(args):
    dataset = dataio.read_dataset(args.data)
    kept, mapping, names = filter_hand_mode(dataset, args.hand)
    if len(mapping) < 2:
        raise InsufficientClasses(f"{args.hand} subset of {args.data} has {len(mapping)} class(es); need >= 2")
    return to_examples(kept, mapping, normalize=args.normalize), names


def _train_config(args) -> TrainConfig:
    return TrainConfig(epochs=args.epochs, learning_rate=args.lr, seed=args.seed)


def cmd_train(args) -> int:
    examples, names = _labelled(args)
    init = nn.init_params(len(names), FEATURES_PER_FRAME, args.hidden, args.layers, seed=args.seed)

    def report(stats):
        print(f"epoch {stats.epoch} loss {stats.loss:.6f} acc {stats.accuracy:.4f}", flush=True)

    model, _ = train(examples, _train_config(args), init, on_epoch=report)
    dataio.write_model(model, args.out)
    return 0


def cmd_eval(args) -> int:
    model = dataio.read_model(args.model)
    examples, names = _labelled(args)
    if model.num_classes != len(names) or model.input_size != FEATURES_PER_FRAME:
        raise DimensionMismatch(f"model has {model.num_classes} classes and input {model.input_size}; "
                                f"data has {len(names)} classes and input {FEATURES_PER_FRAME}")
    accuracy, confusion = evaluate(model, examples)
    print(f"accuracy {accuracy:.4f}")
    if args.confusion:
        sys.stdout.write(format_confusion(confusion))
    return 0


def cmd_loocv(args) -> int:
    dataset = dataio.read_dataset(args.data)
    report = run_loocv(dataset, args.hand, args.normalize, _train_config(args),
                       ModelConfig(args.hidden, args.layers), jobs=args.jobs)
    sys.stdout.write(report.format_table())
    if args.confusion:
        sys.stdout.write(format_confusion(report.confusion_total()))
    return 0


def cmd_gradcheck(args) -> int:
    result = gradcheck.check_many(args.seed, args.trials)
    if result.passed():
        print(f"max rel err {result.max_error!r} < {gradcheck.TOLERANCE:g}")
        return 0
    print(f"max rel err {result.max_error!r} >= {gradcheck.TOLERANCE:g}; worst parameter {result.worst}")
    return 1


def _hand(value: str) -> HandFilter:
    try:
        return HandFilter.parse(value)
    except ValueError:
        raise argparse.ArgumentTypeError("expected single, double or combined") from None


def _add_training_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, type=Path, help="dataset directory")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--hidden", type=int, default=128)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    _add_data_flags(p)


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--no-normalize", dest="normalize", action="store_false",
                   help="feed raw coordinates instead of normalized ones")
    p.add_argument("--hand", type=_hand, default=HandFilter.Combined,
                   help="single, double or combined (default)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="progress logging to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    defaults = GenConfig()
    p = sub.add_parser("generate", help="write a synthetic gesture dataset")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--classes", type=int, default=defaults.num_classes)
    p.add_argument("--signers", type=int, default=defaults.num_signers)
    p.add_argument("--reps", type=int, default=defaults.reps_per_signer)
    p.add_argument("--frames", type=int, default=defaults.frames_per_gesture)
    p.add_argument("--noise", type=float, default=defaults.noise_sigma)
    p.add_argument("--translation", type=float, default=defaults.translation_range)
    p.add_argument("--seed", type=int, default=defaults.seed)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("normalize", help="normalize every frame of a dataset")
    p.add_argument("--in", dest="input", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--strict", action="store_true", help="fail on the first degenerate frame")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("train", help="train on all data in a dataset")
    _add_training_flags(p)
    p.add_argument("--out", required=True, type=Path, help="model file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--confusion", action="store_true", help="also print the confusion matrix")
    _add_data_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("loocv", help="leave-one-signer-out cross-validation")
    _add_training_flags(p)
    p.add_argument("--jobs", type=int, default=None,
                   help="parallel folds (default: fold count capped at CPU count)")
    p.add_argument("--confusion", action="store_true", help="also print the summed confusion matrix")
    p.set_defaults(func=cmd_loocv)

    p = sub.add_parser("gradcheck", help="verify BPTT gradients by finite differences")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=10, help="consecutive seeds to check")
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except SLRError as exc:
        _err(str(exc))
        return 1
    except OSError as exc:
        _err(str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
