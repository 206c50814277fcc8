"""Disposable baseline model and skill scores.

The one-time model is a one-rule decision stump. It is fit inside
:func:`evaluate_plan` and dropped when the call returns; only aggregate
scores (F1, precision, recall, error rate) survive. No per-feature output
is ever produced.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .dataset import Dataset, Disposition, Record
from .partitioner import HOLDOUT_FOLD, PartitionPlan, make_folds, shuffle


class EvaluationError(ValueError):
    pass


class DegenerateTraining(EvaluationError):
    pass


class SchemaMismatch(EvaluationError):
    pass


class LengthMismatch(EvaluationError):
    pass


class EmptyInput(EvaluationError):
    pass


class HoldoutLeak(AssertionError):
    """A holdout record reached a training or scoring path."""


class Model(Protocol):
    def predict(self, features: Sequence[float | str]) -> str: ...


class Learner(Protocol):
    name: str

    def fit(self, records: Sequence[Record]) -> Model: ...


def _kinds_of(features: Sequence[float | str]) -> tuple[str, ...]:
    return tuple("categorical" if isinstance(v, str) else "numeric" for v in features)


def _majority(counts: Counter) -> str:
    # most frequent; ties go to the lexicographically smallest class
    best = max(counts.values())
    return min(c for c, v in counts.items() if v == best)


@dataclass(frozen=True)
class StumpModel:
    kinds: tuple[str, ...]
    fallback: str
    feature: int | None = None
    threshold: float | None = None
    left: str | None = None
    right: str | None = None
    category_map: dict[str, str] = field(default_factory=dict)
    degenerate: bool = False
    training_error: float = 0.0

    def predict(self, features: Sequence[float | str]) -> str:
        if len(features) != len(self.kinds) or _kinds_of(features) != self.kinds:
            raise SchemaMismatch(
                f"record has kinds {_kinds_of(features)}, model expects {self.kinds}"
            )
        if self.feature is None:
            return self.fallback
        value = features[self.feature]
        if self.kinds[self.feature] == "numeric":
            return self.left if value <= self.threshold else self.right
        return self.category_map.get(value, self.fallback)


def _best_numeric(x: np.ndarray, y: np.ndarray, n_classes: int):
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    onehot = np.zeros((len(ys), n_classes), dtype=np.int64)
    onehot[np.arange(len(ys)), ys] = 1
    cum = np.cumsum(onehot, axis=0)
    total = cum[-1]
    cuts = np.nonzero(xs[:-1] != xs[1:])[0]
    if len(cuts) == 0:
        return None
    left = cum[cuts]
    right = total - left
    correct = left.max(axis=1) + right.max(axis=1)
    best = int(np.argmax(correct))  # first maximum = lowest threshold
    i = cuts[best]
    lo, hi = float(xs[i]), float(xs[i + 1])
    thr = lo + (hi - lo) / 2.0
    if not lo <= thr < hi:
        thr = lo
    errors = len(ys) - int(correct[best])
    return errors, thr, int(np.argmax(left[best])), int(np.argmax(right[best]))


class StumpLearner:
    """One-rule decision stump.

    Per feature the best single rule is found: for a numeric feature a
    midpoint threshold between sorted distinct values with each side voting
    its majority class, for a categorical one a majority class per category.
    The rule with the fewest training errors wins; ties go to the lower
    feature index, then to the lower threshold.
    """

    name = "decision-stump"

    def fit(self, records: Sequence[Record]) -> StumpModel:
        if not records:
            raise DegenerateTraining("cannot train on zero records")
        kinds = _kinds_of(records[0].features)
        labels = [r.label for r in records]
        classes = sorted(set(labels))
        index = {c: i for i, c in enumerate(classes)}
        y = np.fromiter((index[c] for c in labels), dtype=np.int64, count=len(labels))
        fallback = _majority(Counter(labels))
        n = len(records)

        best = None  # (errors, feature, model kwargs)
        for j, kind in enumerate(kinds):
            column = [r.features[j] for r in records]
            if kind == "numeric":
                found = _best_numeric(np.asarray(column, dtype=float), y, len(classes))
                if found is None:
                    continue
                errors, thr, left, right = found
                candidate = (errors, j, dict(threshold=thr, left=classes[left], right=classes[right]))
            else:
                per_cat: dict[str, Counter] = {}
                for value, lab in zip(column, labels):
                    per_cat.setdefault(value, Counter())[lab] += 1
                if len(per_cat) < 2:
                    continue
                mapping = {v: _majority(c) for v, c in per_cat.items()}
                errors = n - sum(c[mapping[v]] for v, c in per_cat.items())
                candidate = (errors, j, dict(category_map=mapping))
            if best is None or candidate[0] < best[0]:
                best = candidate

        if best is None or len(classes) == 1:
            return StumpModel(
                kinds=kinds,
                fallback=fallback,
                degenerate=True,
                training_error=(n - labels.count(fallback)) / n,
            )
        errors, j, params = best
        return StumpModel(kinds=kinds, fallback=fallback, feature=j, training_error=errors / n, **params)


def train_stump(records: Sequence[Record]) -> StumpModel:
    return StumpLearner().fit(records)


def predict(model: Model, record: Record | Sequence[float | str]) -> str:
    features = record.features if isinstance(record, Record) else record
    return model.predict(features)


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: dict[tuple[str, str], int]

    @classmethod
    def from_pairs(cls, truth: Sequence[str], predicted: Sequence[str]) -> ConfusionMatrix:
        return cls(dict(Counter(zip(truth, predicted))))

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def classes(self) -> list[str]:
        return sorted({c for pair in self.counts for c in pair})

    def one_vs_rest(self, positive: str) -> tuple[int, int, int]:
        tp = fp = fn = 0
        for (t, p), c in self.counts.items():
            if t == positive and p == positive:
                tp += c
            elif p == positive:
                fp += c
            elif t == positive:
                fn += c
        return tp, fp, fn


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    # equal to 2PR/(P+R) but exact in integers
    f1 = _ratio(2 * tp, 2 * tp + fp + fn)
    return precision, recall, f1


@dataclass(frozen=True)
class Score:
    confusion: ConfusionMatrix
    f1: float
    precision: float
    recall: float
    error_rate: float


def score(truth: Sequence[str], predicted: Sequence[str], positive_class: str | None = None) -> Score:
    """Confusion-matrix scores; any 0/0 is taken as 0.

    With ``positive_class`` the scores are binary one-vs-rest; without it
    they are macro averages over every class seen in either sequence.
    """
    if len(truth) != len(predicted):
        raise LengthMismatch(f"{len(truth)} truths vs {len(predicted)} predictions")
    if not truth:
        raise EmptyInput("nothing to score")
    cm = ConfusionMatrix.from_pairs(truth, predicted)
    wrong = sum(c for (t, p), c in cm.counts.items() if t != p)
    if positive_class is not None:
        precision, recall, f1 = _prf(*cm.one_vs_rest(positive_class))
    else:
        per_class = [_prf(*cm.one_vs_rest(c)) for c in cm.classes]
        precision, recall, f1 = (math.fsum(v) / len(per_class) for v in zip(*per_class))
    return Score(cm, f1=f1, precision=precision, recall=recall, error_rate=wrong / len(truth))


@dataclass(frozen=True)
class FoldScore:
    fold: int
    iteration: int
    f1: float
    precision: float
    recall: float
    error_rate: float
    n_train: int
    n_test: int


@dataclass(frozen=True)
class SkillReport:
    per_fold: tuple[FoldScore, ...]
    mean_f1: float
    model_descriptor: str
    positive_class: str | None = None

    @classmethod
    def from_folds(
        cls, folds: Sequence[FoldScore], model_descriptor: str, positive_class: str | None = None
    ) -> SkillReport:
        if not folds:
            raise EmptyInput("no folds scored")
        mean_f1 = math.fsum(f.f1 for f in folds) / len(folds)
        return cls(tuple(folds), mean_f1, model_descriptor, positive_class)

    @property
    def mean_error(self) -> float:
        return math.fsum(f.error_rate for f in self.per_fold) / len(self.per_fold)

    @property
    def f1_spread(self) -> float:
        f1s = [f.f1 for f in self.per_fold]
        return max(f1s) - min(f1s)


@dataclass(frozen=True)
class _FoldRun:
    fold: int
    iteration: int
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    truths: tuple[str, ...]
    predictions: tuple[str, ...]


def _plan_test_folds(plan: PartitionPlan, sweep: bool) -> list[tuple[int, int]]:
    """(test fold, iteration) pairs."""
    if not sweep:
        return [(plan.test_fold, plan.iteration)]
    return [(f, f - 1) for f in range(1, plan.n_folds)]


def _run_folds(
    dataset: Dataset,
    plan: PartitionPlan,
    learner: Learner,
    sweep: bool,
    workers: int,
) -> list[_FoldRun]:
    if plan.n != dataset.n:
        raise EvaluationError(f"plan covers {plan.n} records, dataset has {dataset.n}")
    by_fold: dict[int, list[Record]] = {}
    for r, f in zip(dataset.records, plan.fold_of_record):
        by_fold.setdefault(f, []).append(r)
    holdout_ids = {r.record_id for r in by_fold.get(HOLDOUT_FOLD, [])}
    holdout_ids |= {r.record_id for r in dataset.records if r.disposition is Disposition.HOLDOUT}

    def run(job: tuple[int, int]) -> _FoldRun:
        test_fold, iteration = job
        test = by_fold[test_fold]
        train = [r for f in range(1, plan.n_folds) if f != test_fold for r in by_fold[f]]
        train_ids = tuple(r.record_id for r in train)
        test_ids = tuple(r.record_id for r in test)
        if holdout_ids.intersection(train_ids) or holdout_ids.intersection(test_ids):
            raise HoldoutLeak(f"holdout records reached fold {test_fold}")
        model = learner.fit(train)
        preds = tuple(model.predict(r.features) for r in test)
        return _FoldRun(test_fold, iteration, train_ids, test_ids, tuple(r.label for r in test), preds)

    jobs = _plan_test_folds(plan, sweep)
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, jobs))
    return [run(j) for j in jobs]


def evaluate_plan(
    dataset: Dataset,
    plan: PartitionPlan,
    learner: Learner | None = None,
    *,
    positive_class: str | None = None,
    sweep: bool = False,
    workers: int = 1,
    trace: list[str] | None = None,
) -> SkillReport:
    """Train on TRAIN folds, score on the TEST fold, keep only the scores.

    With ``sweep`` every non-holdout fold takes the test role once and one
    score row is reported per fold, in fold order. ``trace`` (if given)
    receives every record id that was used for training or scoring.
    """
    learner = learner or StumpLearner()
    runs = _run_folds(dataset, plan, learner, sweep, workers)
    folds = []
    for run in runs:
        if trace is not None:
            trace.extend(run.train_ids)
            trace.extend(run.test_ids)
        s = score(run.truths, run.predictions, positive_class)
        folds.append(
            FoldScore(
                fold=run.fold,
                iteration=run.iteration,
                f1=s.f1,
                precision=s.precision,
                recall=s.recall,
                error_rate=s.error_rate,
                n_train=len(run.train_ids),
                n_test=len(run.test_ids),
            )
        )
    return SkillReport.from_folds(folds, f"{learner.name} (discarded after scoring)", positive_class)


def plan_predictions(
    dataset: Dataset, plan: PartitionPlan, learner: Learner | None = None, *, sweep: bool = True
) -> dict[str, str]:
    """record_id -> prediction made while that record held the test role."""
    out: dict[str, str] = {}
    for run in _run_folds(dataset, plan, learner or StumpLearner(), sweep, 1):
        out.update(zip(run.test_ids, run.predictions))
    return out


def cross_val_predict(
    dataset: Dataset, k: int, seed: int, learner: Learner | None = None
) -> dict[str, str]:
    """Plain k-fold predictions over every record (no holdout)."""
    learner = learner or StumpLearner()
    order = shuffle(dataset, seed)
    out: dict[str, str] = {}
    for positions in make_folds(dataset.n, k):
        test_idx = {order[p] for p in positions}
        train = [r for i, r in enumerate(dataset.records) if i not in test_idx]
        model = learner.fit(train)
        for i in sorted(test_idx):
            r = dataset.records[i]
            out[r.record_id] = model.predict(r.features)
    return out


def scores_csv_rows(skill: SkillReport) -> list[list[str]]:
    rows = [["fold", "role_iteration", "f1", "precision", "recall", "error_rate"]]
    for f in skill.per_fold:
        rows.append([str(f.fold), str(f.iteration), repr(f.f1), repr(f.precision), repr(f.recall), repr(f.error_rate)])
    return rows
