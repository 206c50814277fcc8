"""Command-line workflow: split, select-k, evaluate, rotate, verify.

Exit codes: 0 success, 1 I/O error, 2 usage or validation error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .dataset import Dataset, DatasetError, Disposition, load_csv, write_labeled_csv
from .evaluator import EvaluationError, HoldoutLeak, evaluate_plan, scores_csv_rows
from .kselect import DEFAULT_BOOTSTRAP_B, KSelectError, Strategy, balance_check, select_k
from .manifest import Manifest, canonical_json, read_manifest, selection_to_dict, write_manifest
from .partitioner import HOLDOUT_FOLD, Mode, PartitionError, build_plan, rotate, verify_partition
from .rng import MASK64

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _seed(text: str) -> int:
    try:
        value = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be a decimal integer, got {text!r}") from None
    if not 0 <= value <= MASK64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _candidates(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"candidates must be comma-separated integers: {text!r}") from None


def _fraction(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("holdout fraction must lie in (0, 1)")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holdout-kfold",
        description="Partition records into analysis-naive holdout, test and train groups.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, manifest_required: bool = True) -> None:
        p.add_argument("--in", dest="input", required=True, help="input CSV (header row required)")
        p.add_argument("--manifest", required=manifest_required, help="manifest JSON path")
        p.add_argument("--id-column", default="id")
        p.add_argument("--label-column", default="label")

    p = sub.add_parser("split", help="shuffle, fold and label a fresh dataset")
    common(p)
    p.add_argument("--out", required=True, help="labeled CSV to write")
    p.add_argument("--study", required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--strategy", choices=["loocv"], help="use LOOCV mode instead of --k")
    p.add_argument("--holdout-frac", type=_fraction, default=0.1)
    p.add_argument("--stratify", action="store_true")
    p.add_argument("--positive-class")
    p.add_argument("--force", action="store_true", help="overwrite an existing manifest")

    p = sub.add_parser("select-k", help="choose the fold count")
    common(p, manifest_required=False)
    p.add_argument("--strategy", choices=[s.value for s in Strategy], required=True)
    p.add_argument("--candidates", type=_candidates, default=[])
    p.add_argument("--seed", type=_seed)
    p.add_argument("--bootstrap-b", type=int, default=DEFAULT_BOOTSTRAP_B)
    p.add_argument("--holdout-frac", type=_fraction, default=0.1)
    p.add_argument("--positive-class")
    p.add_argument("--report-json")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("evaluate", help="score the disposable model over every test rotation")
    common(p)
    p.add_argument("--positive-class")
    p.add_argument("--scores-csv")
    p.add_argument("--tolerance", type=float, help="report per-fold F1 balance at this tolerance")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("rotate", help="move the test role to the next non-holdout fold")
    common(p)
    p.add_argument("--out", help="labeled CSV to write (default: overwrite --in)")

    p = sub.add_parser("verify", help="check labels and hash keys against the manifest")
    common(p)
    return parser


def _load(args) -> Dataset:
    return load_csv(args.input, id_column=args.id_column, label_column=args.label_column)


def _load_bound(args) -> tuple[Dataset, Manifest]:
    dataset = _load(args)
    manifest = read_manifest(args.manifest)
    if dataset.fingerprint != manifest.dataset_fingerprint:
        raise UsageError(
            f"{args.input} does not match the manifest fingerprint; run `verify` for details"
        )
    return dataset, manifest


def _summary(plan, labeled: Dataset) -> str:
    counts = {d: 0 for d in Disposition}
    for r in labeled.records:
        counts[r.disposition] += 1
    sizes = ",".join(str(s) for s in plan.fold_sizes)
    return (
        f"n={labeled.n} k={plan.k} mode={plan.mode.value} iteration={plan.iteration}\n"
        f"fold sizes: {sizes}\n"
        f"holdout={counts[Disposition.HOLDOUT]} test={counts[Disposition.TEST]} "
        f"train={counts[Disposition.TRAIN]}"
    )


def cmd_split(args) -> int:
    if args.k is None and args.strategy != "loocv":
        raise UsageError("split needs --k or --strategy loocv")
    if args.k is not None and args.strategy == "loocv":
        raise UsageError("give either --k or --strategy loocv, not both")
    if Path(args.manifest).exists() and not args.force:
        raise UsageError(
            f"{args.manifest} already exists; an established holdout is never re-randomized "
            "without --force"
        )
    dataset = _load(args)
    if any(r.labeled for r in dataset.records) and not args.force:
        raise UsageError(f"{args.input} is already labeled; refusing to re-split without --force")
    mode = Mode.LOOCV if args.strategy == "loocv" else Mode.KFOLD
    plan, labeled = build_plan(
        dataset,
        args.study,
        args.seed,
        args.k,
        mode,
        holdout_frac=args.holdout_frac,
        stratify=args.stratify,
    )
    skill = evaluate_plan(labeled, plan, positive_class=args.positive_class)
    write_labeled_csv(labeled, args.out)
    write_manifest(
        Manifest(
            study_id=args.study,
            dataset_fingerprint=dataset.fingerprint,
            plan=plan,
            skill=skill,
        ),
        args.manifest,
    )
    print(_summary(plan, labeled))
    print(f"initial test-fold F1={skill.mean_f1:.4f}; model discarded")
    return EXIT_OK


def cmd_select_k(args) -> int:
    manifest = None
    exclude: list[str] = []
    if args.manifest:
        dataset, manifest = _load_bound(args)
        exclude = [
            r.record_id
            for r, f in zip(dataset.records, manifest.plan.fold_of_record)
            if f == HOLDOUT_FOLD
        ]
    else:
        dataset = _load(args)
    seed = args.seed if args.seed is not None else (manifest.plan.seed if manifest else None)
    if seed is None:
        raise UsageError("select-k needs --seed (or a --manifest to take it from)")
    report = select_k(
        dataset,
        args.strategy,
        args.candidates,
        B=args.bootstrap_b,
        seed=seed,
        positive_class=args.positive_class,
        exclude=exclude,
        holdout_frac=args.holdout_frac,
        workers=args.workers,
    )
    print(report.table())
    if args.report_json:
        Path(args.report_json).write_text(canonical_json(selection_to_dict(report)), encoding="utf-8")
    if manifest is not None:
        write_manifest(replace(manifest, k_selection=report), args.manifest)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    dataset, manifest = _load_bound(args)
    skill = evaluate_plan(
        dataset,
        manifest.plan,
        positive_class=args.positive_class,
        sweep=True,
        workers=args.workers,
    )
    write_manifest(replace(manifest, skill=skill), args.manifest)
    if args.scores_csv:
        with open(args.scores_csv, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(scores_csv_rows(skill))
    print("fold  iteration      f1  precision  recall  error_rate")
    for f in skill.per_fold:
        print(f"{f.fold:4d}  {f.iteration:9d}  {f.f1:.4f}  {f.precision:9.4f}  {f.recall:.4f}  {f.error_rate:10.4f}")
    print(f"mean F1={skill.mean_f1:.4f} mean error={skill.mean_error:.4f}; model discarded")
    if args.tolerance is not None and len(skill.per_fold) >= 2:
        bal = balance_check(skill, args.tolerance)
        state = "balanced" if bal.balanced else "NOT balanced"
        print(f"F1 spread {bal.f1_spread:.4f} at tolerance {args.tolerance}: {state}")
    return EXIT_OK


def cmd_rotate(args) -> int:
    dataset, manifest = _load_bound(args)
    report = verify_partition(dataset, manifest)
    if not report.passed:
        print("\n".join(report.lines()), file=sys.stderr)
        raise UsageError("labels disagree with the manifest; refusing to rotate")
    plan, labeled = rotate(dataset, manifest.plan)
    write_labeled_csv(labeled, args.out or args.input)
    write_manifest(replace(manifest, plan=plan), args.manifest)
    print(_summary(plan, labeled))
    return EXIT_OK


def cmd_verify(args) -> int:
    dataset = _load(args)
    manifest = read_manifest(args.manifest)
    report = verify_partition(dataset, manifest)
    print("\n".join(report.lines()))
    if not report.passed:
        print(f"{len(report.discrepancies)} discrepancies", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


COMMANDS = {
    "split": cmd_split,
    "select-k": cmd_select_k,
    "evaluate": cmd_evaluate,
    "rotate": cmd_rotate,
    "verify": cmd_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except HoldoutLeak as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, DatasetError, PartitionError, EvaluationError, KSelectError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
