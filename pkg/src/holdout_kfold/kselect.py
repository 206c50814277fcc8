"""Choosing the fold count k.

Four strategies are available: a representative choice backed by 5x2cv
paired t-tests, a fixed k of 10, leave-one-out over the non-holdout
records, and a balance-driven choice that uses per-fold F1 spread and the
.632+ bootstrap error.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .dataset import Dataset, Record
from .evaluator import (
    FoldScore,
    Learner,
    Model,
    Score,
    SkillReport,
    StumpLearner,
    cross_val_predict,
    evaluate_plan,
    score,
)
from .partitioner import build_plan, loocv_holdout_size
from .rng import SplitMix64, permutation

log = logging.getLogger(__name__)

# two-sided 5% critical value of Student's t with 5 degrees of freedom
T_CRITICAL_5DF = 2.571
DEFAULT_BOOTSTRAP_B = 200


class KSelectError(ValueError):
    pass


class InsufficientData(KSelectError):
    pass


class InvalidCandidate(KSelectError):
    pass


class Strategy(str, enum.Enum):
    REPRESENTATIVE = "representative"
    FIXED_10 = "fixed10"
    LOOCV = "loocv"
    BOOTSTRAP_BALANCED = "bootstrap"


@dataclass(frozen=True)
class Replication:
    p1: float
    p2: float
    pbar: float
    s2: float


@dataclass(frozen=True)
class FiveByTwoResult:
    per_replication: tuple[Replication, ...]
    t_stat: float | None
    significant: bool
    zero_variance: bool = False


def five_by_two_from_differences(p1s: Sequence[float], p2s: Sequence[float]) -> FiveByTwoResult:
    """5x2cv paired t statistic from the two error differences of each replication.

    ``t = p1[0] / sqrt(mean(s2))``. When every variance is zero the
    statistic is 0 if ``p1[0]`` is 0 as well, otherwise undefined and
    reported as ``zero_variance``.
    """
    if len(p1s) != 5 or len(p2s) != 5:
        raise KSelectError("5x2cv needs exactly five replications")
    reps = []
    for a, b in zip(p1s, p2s):
        pbar = (a + b) / 2.0
        reps.append(Replication(a, b, pbar, (a - pbar) ** 2 + (b - pbar) ** 2))
    mean_s2 = math.fsum(r.s2 for r in reps) / 5.0
    numerator = reps[0].p1
    if mean_s2 == 0.0:
        if numerator == 0.0:
            return FiveByTwoResult(tuple(reps), 0.0, False)
        return FiveByTwoResult(tuple(reps), None, False, zero_variance=True)
    t = numerator / math.sqrt(mean_s2)
    return FiveByTwoResult(tuple(reps), t, abs(t) > T_CRITICAL_5DF)


def _error(model: Model, records: Sequence[Record]) -> float:
    wrong = sum(model.predict(r.features) != r.label for r in records)
    return wrong / len(records)


def five_by_two_ttest(
    dataset: Dataset | Sequence[Record],
    learner_a: Learner,
    learner_b: Learner,
    seed: int,
) -> FiveByTwoResult:
    """Five replications of 2-fold CV comparing two learners on error rate.

    Each replication draws a fresh seeded 50/50 split, trains each learner
    on one half and tests on the other, both ways round. Differences are
    ``error(A) - error(B)``.
    """
    records = list(dataset.records if isinstance(dataset, Dataset) else dataset)
    n = len(records)
    if n < 10:
        raise InsufficientData(f"5x2cv needs at least 10 records, got {n}")
    rng = SplitMix64(seed)
    p1s, p2s = [], []
    for _ in range(5):
        order = permutation(n, rng.next_u64())
        half1 = [records[i] for i in order[: n // 2]]
        half2 = [records[i] for i in order[n // 2 :]]
        diffs = []
        for train, test in ((half1, half2), (half2, half1)):
            diffs.append(_error(learner_a.fit(train), test) - _error(learner_b.fit(train), test))
        p1s.append(diffs[0])
        p2s.append(diffs[1])
    return five_by_two_from_differences(p1s, p2s)


class KConfig:
    """A learner trained the way a k-fold-with-holdout run would train it.

    With one holdout and one test fold, training sees ``k - 2`` of the
    ``k - 1`` non-holdout folds, so fitting uses that leading fraction of
    the (already shuffled) training records.
    """

    def __init__(self, k: int, base: Learner | None = None):
        if k < 3:
            raise InvalidCandidate(f"k={k} cannot host holdout, test and train")
        self.k = k
        self.base = base or StumpLearner()
        self.name = f"{self.base.name}@k={k}"

    def fit(self, records: Sequence[Record]) -> Model:
        m = max(1, (len(records) * (self.k - 2)) // (self.k - 1))
        return self.base.fit(records[:m])


@dataclass(frozen=True)
class Bootstrap632Report:
    err_train: float
    err_boot: float
    gamma: float
    R: float
    w: float
    err_632plus: float
    B: int = DEFAULT_BOOTSTRAP_B


def no_information_rate(truths: Sequence[str], predictions: Sequence[str]) -> float:
    """sum over classes of p_c * (1 - q_c); p from truths, q from predictions."""
    n = len(truths)
    if n == 0 or n != len(predictions):
        raise KSelectError("truths and predictions must be equal-length and non-empty")
    classes = sorted(set(truths) | set(predictions))
    gamma = 0.0
    for c in classes:
        p = sum(t == c for t in truths) / n
        q = sum(y == c for y in predictions) / n
        gamma += p * (1.0 - q)
    return gamma


def combine_632_plus(err_train: float, err_boot: float, gamma: float) -> tuple[float, float, float]:
    """Relative overfitting rate, weight and .632+ error."""
    if err_boot > err_train and gamma > err_train:
        R = min(1.0, max(0.0, (err_boot - err_train) / (gamma - err_train)))
    else:
        R = 0.0
    w = 0.632 / (1.0 - 0.368 * R)
    # (1 - w) * err_train + w * err_boot, in a form that is exact when the errors agree
    return R, w, err_train + w * (err_boot - err_train)


def bootstrap_632_plus(
    dataset: Dataset | Sequence[Record],
    learner: Learner | None = None,
    B: int = DEFAULT_BOOTSTRAP_B,
    seed: int = 0,
) -> Bootstrap632Report:
    """.632+ bootstrap error of ``learner`` on the given (non-holdout) records.

    Resamples that leave nothing out of bag are redrawn.
    """
    learner = learner or StumpLearner()
    records = list(dataset.records if isinstance(dataset, Dataset) else dataset)
    n = len(records)
    if n < 2:
        raise InsufficientData("bootstrap needs at least two records")
    if B < 1:
        raise KSelectError("B must be positive")

    model = learner.fit(records)
    truths = [r.label for r in records]
    preds = [model.predict(r.features) for r in records]
    err_train = sum(t != p for t, p in zip(truths, preds)) / n
    gamma = no_information_rate(truths, preds)
    del model

    rng = SplitMix64(seed)
    oob_errors = []
    for _ in range(B):
        while True:
            draw = [rng.below(n) for _ in range(n)]
            drawn = set(draw)
            if len(drawn) < n:
                break
        fitted = learner.fit([records[i] for i in draw])
        oob = [records[i] for i in range(n) if i not in drawn]
        oob_errors.append(_error(fitted, oob))
    err_boot = math.fsum(oob_errors) / B

    R, w, err = combine_632_plus(err_train, err_boot, gamma)
    return Bootstrap632Report(err_train, err_boot, gamma, R, w, err, B)


@dataclass(frozen=True)
class CandidateScore:
    k: int
    mean_error: float
    mean_f1: float
    err_632plus: float | None = None
    t_vs_best: float | None = None
    significant: bool | None = None
    f1_spread: float | None = None


@dataclass(frozen=True)
class KSelectionReport:
    strategy: Strategy
    candidates: tuple[CandidateScore, ...]
    chosen_k: int
    rationale: str

    def __post_init__(self):
        if self.chosen_k not in {c.k for c in self.candidates}:
            raise KSelectError("chosen_k must be one of the candidates")
        if not self.rationale:
            raise KSelectError("rationale must be non-empty")

    def table(self) -> str:
        def fmt(v):
            if v is None:
                return "-"
            if isinstance(v, bool):
                return "yes" if v else "no"
            return f"{v:.4f}" if isinstance(v, float) else str(v)

        header = ["k", "mean_error", "mean_F1", "err_632plus", "t_vs_best", "significant"]
        rows = [
            [fmt(c.k), fmt(c.mean_error), fmt(c.mean_f1), fmt(c.err_632plus), fmt(c.t_vs_best), fmt(c.significant)]
            for c in self.candidates
        ]
        widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(header)]
        lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
        lines += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in rows]
        lines.append(f"chosen k = {self.chosen_k} ({self.strategy.value}): {self.rationale}")
        return "\n".join(lines)


@dataclass(frozen=True)
class BalanceResult:
    balanced: bool
    f1_spread: float
    deviations: tuple[tuple[int, float], ...]
    sizes_balanced: bool


def balance_check(skill: SkillReport, tolerance: float) -> BalanceResult:
    """Per-fold F1 equivalence within ``tolerance`` plus the fold-size rule."""
    if len(skill.per_fold) < 2:
        raise KSelectError("balance check needs at least two scored folds")
    f1s = [f.f1 for f in skill.per_fold]
    spread = max(f1s) - min(f1s)
    sizes = [f.n_test for f in skill.per_fold]
    sizes_ok = max(sizes) - min(sizes) <= 1
    deviations = tuple((f.fold, f.f1 - skill.mean_f1) for f in skill.per_fold)
    return BalanceResult(spread <= tolerance and sizes_ok, spread, deviations, sizes_ok)


def _rotated_cv(
    data: Dataset, k: int, seed: int, learner: Learner, positive_class: str | None, workers: int
) -> tuple[SkillReport, Dataset]:
    plan, _ = build_plan(data, "k-selection", seed, k)
    skill = evaluate_plan(
        data, plan, learner, positive_class=positive_class, sweep=True, workers=workers
    )
    rest = data.subset(r.record_id for r, f in zip(data.records, plan.fold_of_record) if f != 0)
    return skill, rest


def _leave_one_out(
    data: Dataset, seed: int, learner: Learner, positive_class: str | None
) -> tuple[SkillReport, Score]:
    preds = cross_val_predict(data, data.n, seed, learner)
    folds = []
    for i, r in enumerate(data.records, start=1):
        s = score([r.label], [preds[r.record_id]], positive_class)
        folds.append(FoldScore(i, i - 1, s.f1, s.precision, s.recall, s.error_rate, data.n - 1, 1))
    report = SkillReport.from_folds(folds, f"{learner.name} (discarded after scoring)", positive_class)
    pooled = score(data.labels, [preds[r.record_id] for r in data.records], positive_class)
    return report, pooled


def select_k(
    dataset: Dataset,
    strategy: Strategy | str,
    candidates: Iterable[int] = (),
    *,
    B: int = DEFAULT_BOOTSTRAP_B,
    seed: int,
    learner: Learner | None = None,
    positive_class: str | None = None,
    exclude: Iterable[str] = (),
    holdout_frac: float = 0.1,
    workers: int = 1,
) -> KSelectionReport:
    """Pick k for ``dataset`` with one of the four strategies.

    ``exclude`` names records that must stay untouched, normally the
    holdout of an existing plan; they are dropped before anything is fit.
    """
    strategy = Strategy(strategy)
    learner = learner or StumpLearner()
    exclude = set(exclude)
    data = dataset.subset(r.record_id for r in dataset.records if r.record_id not in exclude) if exclude else dataset
    n = data.n
    ks = list(dict.fromkeys(candidates))

    if strategy is Strategy.FIXED_10:
        k = 10
        if n < 10:
            log.warning("only %d records; fixed k=10 clamped to %d", n, n)
            k = n
        if k < 3:
            raise InvalidCandidate(f"{n} records cannot host three folds")
        skill, _ = _rotated_cv(data, k, seed, learner, positive_class, workers)
        row = CandidateScore(k, skill.mean_error, skill.mean_f1, f1_spread=skill.f1_spread)
        why = "k fixed to 10" if k == 10 else f"k fixed to 10, clamped to n={n}"
        return KSelectionReport(strategy, (row,), k, why)

    if strategy is Strategy.LOOCV:
        if exclude:
            remaining, held = data, len(exclude & set(dataset.record_ids))
        else:
            held = loocv_holdout_size(n, holdout_frac)
            plan, _ = build_plan(data, "k-selection", seed, n - held, "loocv")
            remaining = data.subset(
                r.record_id for r, f in zip(data.records, plan.fold_of_record) if f != 0
            )
        if remaining.n < 2:
            raise InsufficientData("LOOCV needs at least two non-holdout records")
        skill, pooled = _leave_one_out(remaining, seed, learner, positive_class)
        k = remaining.n
        # single-record F1 is degenerate, so the row carries F1 over all predictions
        row = CandidateScore(k, skill.mean_error, pooled.f1)
        return KSelectionReport(
            strategy, (row,), k, f"k = n minus holdout = {held + remaining.n} - {held} = {k}"
        )

    if not ks:
        raise InvalidCandidate(f"strategy {strategy.value} needs candidate k values")
    for k in ks:
        if not 3 <= k <= n:
            raise InvalidCandidate(f"candidate k={k} outside [3, {n}]")

    cv = {k: _rotated_cv(data, k, seed, learner, positive_class, workers) for k in ks}

    if strategy is Strategy.REPRESENTATIVE:
        errors = {k: cv[k][0].mean_error for k in ks}
        best = min(ks, key=lambda k: (errors[k], k))
        rows, tied = [], []
        for k in ks:
            skill = cv[k][0]
            if k == best:
                t, sig = 0.0, False
            else:
                res = five_by_two_ttest(data, KConfig(k, learner), KConfig(best, learner), seed)
                t = res.t_stat
                # a constant non-zero difference is a real difference
                sig = res.significant or res.zero_variance
            if not sig:
                tied.append(k)
            rows.append(CandidateScore(k, skill.mean_error, skill.mean_f1, t_vs_best=t, significant=sig, f1_spread=skill.f1_spread))
        chosen = min(tied)
        why = f"lowest mean CV error at k={best} ({errors[best]:.4f})"
        others = sorted(k for k in tied if k != best)
        if others:
            why += f"; statistically indistinguishable: k={others}; smallest tied k wins"
        return KSelectionReport(strategy, tuple(rows), chosen, why)

    rows = []
    for k in ks:
        skill, rest = cv[k]
        boot = bootstrap_632_plus(rest, KConfig(k, learner), B, seed)
        rows.append(
            CandidateScore(k, skill.mean_error, skill.mean_f1, err_632plus=boot.err_632plus, f1_spread=skill.f1_spread)
        )
    chosen_row = min(rows, key=lambda c: (c.f1_spread, c.err_632plus, c.k))
    why = (
        f"smallest per-fold F1 spread ({chosen_row.f1_spread:.4f}), "
        f".632+ error {chosen_row.err_632plus:.4f}"
    )
    return KSelectionReport(strategy, tuple(rows), chosen_row.k, why)
