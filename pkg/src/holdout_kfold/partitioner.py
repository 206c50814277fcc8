"""Shuffle, fold, and label records as holdout, test or train.

Fold 0 of the shuffled order is the holdout, fold 1 starts as the test fold
and the remaining folds train. The holdout never moves: rotation only walks
the test role over the non-holdout folds, and nothing here re-shuffles an
existing plan.
"""

from __future__ import annotations

import enum
import hashlib
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Sequence

from .dataset import Dataset, Disposition
from .rng import MASK64, SplitMix64, permutation, shuffle_in_place

if TYPE_CHECKING:
    from .manifest import Manifest

HOLDOUT_FOLD = 0


class Mode(str, enum.Enum):
    KFOLD = "kfold"
    LOOCV = "loocv"


class PartitionError(ValueError):
    pass


class InvalidK(PartitionError):
    pass


@dataclass(frozen=True)
class PartitionPlan:
    """Reproducible description of a split.

    ``fold_of_record`` is aligned with the dataset's file order. In LOOCV
    mode there are ``k + 1`` folds: the holdout plus one singleton fold per
    remaining record.
    """

    study_id: str
    seed: int
    k: int
    mode: Mode
    fold_of_record: tuple[int, ...]
    role_of_fold: tuple[Disposition, ...]
    iteration: int = 0
    stratified: bool = False

    def __post_init__(self):
        if not self.study_id:
            raise PartitionError("study_id must be non-empty")
        if not 0 <= self.seed <= MASK64:
            raise PartitionError("seed must be an unsigned 64-bit integer")
        n_folds = len(self.role_of_fold)
        if self.mode is Mode.KFOLD:
            if self.k < 3:
                raise InvalidK(f"k={self.k}: three roles need at least three folds")
            if n_folds != self.k:
                raise PartitionError("role_of_fold must have k entries")
        else:
            if self.k < 2 or n_folds != self.k + 1:
                raise PartitionError("LOOCV plan needs k >= 2 and k + 1 folds")
        roles = Counter(self.role_of_fold)
        if roles[Disposition.HOLDOUT] != 1 or roles[Disposition.TEST] != 1:
            raise PartitionError("exactly one holdout fold and one test fold are required")
        if self.role_of_fold[HOLDOUT_FOLD] is not Disposition.HOLDOUT:
            raise PartitionError("fold 0 must be the holdout")
        if self.iteration < 0:
            raise PartitionError("iteration must be non-negative")
        sizes = Counter(self.fold_of_record)
        if set(sizes) != set(range(n_folds)):
            raise PartitionError("every fold must be non-empty and indices must lie in range")
        if self.mode is Mode.KFOLD and max(sizes.values()) - min(sizes.values()) > 1:
            raise PartitionError("fold sizes differ by more than one")

    @property
    def n(self) -> int:
        return len(self.fold_of_record)

    @property
    def n_folds(self) -> int:
        return len(self.role_of_fold)

    @property
    def test_fold(self) -> int:
        return self.role_of_fold.index(Disposition.TEST)

    @property
    def fold_sizes(self) -> list[int]:
        sizes = Counter(self.fold_of_record)
        return [sizes[f] for f in range(self.n_folds)]

    @property
    def holdout_size(self) -> int:
        return self.fold_sizes[HOLDOUT_FOLD]

    def role_of_position(self, i: int) -> Disposition:
        return self.role_of_fold[self.fold_of_record[i]]

    def fold_map(self, dataset: Dataset) -> dict[str, int]:
        """record_id -> fold index."""
        return dict(zip(dataset.record_ids, self.fold_of_record))


@dataclass
class Discrepancy:
    record_id: str
    stored_disposition: str | None
    expected_disposition: str
    stored_hash: str | None
    expected_hash: str


@dataclass
class VerificationReport:
    expected_fingerprint: str
    actual_fingerprint: str
    discrepancies: list[Discrepancy] = field(default_factory=list)
    plan_findings: list[str] = field(default_factory=list)

    @property
    def fingerprint_ok(self) -> bool:
        return self.expected_fingerprint == self.actual_fingerprint

    @property
    def passed(self) -> bool:
        return self.fingerprint_ok and not self.discrepancies and not self.plan_findings

    def lines(self) -> list[str]:
        out = ["PASS" if self.passed else "FAIL"]
        if not self.fingerprint_ok:
            out.append(
                f"fingerprint mismatch: manifest {self.expected_fingerprint}, "
                f"dataset {self.actual_fingerprint}"
            )
        out.extend(f"plan: {msg}" for msg in self.plan_findings)
        for d in self.discrepancies:
            out.append(
                f"record {d.record_id}: stored {d.stored_disposition}/{d.stored_hash}, "
                f"expected {d.expected_disposition}/{d.expected_hash}"
            )
        return out


def shuffle(dataset: Dataset | int, seed: int) -> list[int]:
    """Permutation of record indices; accepts a Dataset or its size."""
    n = dataset if isinstance(dataset, int) else dataset.n
    if n < 1:
        raise PartitionError("cannot shuffle an empty dataset")
    return permutation(n, seed)


def make_folds(n: int, k: int) -> list[range]:
    """Contiguous ranges over shuffled positions; larger folds come first."""
    if k < 2 or k > n:
        raise InvalidK(f"k={k} outside [2, n={n}]")
    base, extra = divmod(n, k)
    folds, start = [], 0
    for f in range(k):
        size = base + (1 if f < extra else 0)
        folds.append(range(start, start + size))
        start += size
    return folds


def assign_dispositions(folds: Sequence | int, mode: Mode = Mode.KFOLD) -> tuple[Disposition, ...]:
    n_folds = folds if isinstance(folds, int) else len(folds)
    if mode is Mode.KFOLD and n_folds < 3:
        raise InvalidK(f"k={n_folds}: holdout, test and train need three folds")
    if n_folds < 3:
        raise InvalidK("LOOCV needs a holdout and at least two remaining records")
    return (Disposition.HOLDOUT, Disposition.TEST) + (Disposition.TRAIN,) * (n_folds - 2)


def hash_key(study_id: str, record_id: str, role: Disposition | str, seed: int) -> str:
    """SHA-256 hex of ``study_id|record_id|role|seed``."""
    if not study_id or not record_id:
        raise PartitionError("study_id and record_id must be non-empty")
    role = Disposition(role).value
    return hashlib.sha256(f"{study_id}|{record_id}|{role}|{seed}".encode("utf-8")).hexdigest()


def loocv_holdout_size(n: int, holdout_frac: float) -> int:
    if not 0.0 < holdout_frac < 1.0:
        raise PartitionError(f"holdout fraction must lie in (0, 1), got {holdout_frac}")
    return max(1, int(round(holdout_frac * n)))


def _stratified_folds(dataset: Dataset, seed: int, k: int) -> list[int]:
    by_class: dict[str, list[int]] = {}
    for i, r in enumerate(dataset.records):
        by_class.setdefault(r.label, []).append(i)
    rng = SplitMix64(seed)
    order: list[int] = []
    for label in sorted(by_class):
        members = by_class[label]
        shuffle_in_place(members, rng)
        order.extend(members)
    # round-robin gives the same size profile as make_folds
    folds = [0] * dataset.n
    for p, i in enumerate(order):
        folds[i] = p % k
    return folds


def _fold_assignment(
    dataset: Dataset, seed: int, k: int, mode: Mode, stratify: bool
) -> list[int]:
    n = dataset.n
    if mode is Mode.KFOLD:
        if k < 3 or k > n:
            raise InvalidK(f"k={k} outside [3, n={n}]")
        if stratify:
            return _stratified_folds(dataset, seed, k)
        order = shuffle(n, seed)
        folds = [0] * n
        for f, positions in enumerate(make_folds(n, k)):
            for p in positions:
                folds[order[p]] = f
        return folds
    if stratify:
        raise PartitionError("stratification is only available in KFOLD mode")
    holdout = n - k
    if k < 2 or holdout < 1:
        raise InvalidK(f"LOOCV k={k} leaves no holdout or fewer than two records (n={n})")
    order = shuffle(n, seed)
    folds = [0] * n
    for p in range(holdout, n):
        folds[order[p]] = p - holdout + 1
    return folds


def label(dataset: Dataset, plan: PartitionPlan) -> Dataset:
    """Stamp every record with its plan role and hash key."""
    if plan.n != dataset.n:
        raise PartitionError(f"plan covers {plan.n} records, dataset has {dataset.n}")
    records = []
    for r, f in zip(dataset.records, plan.fold_of_record):
        role = plan.role_of_fold[f]
        records.append(
            replace(r, disposition=role, hash_key=hash_key(plan.study_id, r.record_id, role, plan.seed))
        )
    return dataset.with_records(records)


def _test_fold_at(iteration: int, n_folds: int) -> int:
    return 1 + iteration % (n_folds - 1)


def _roles_with_test(n_folds: int, test_fold: int) -> tuple[Disposition, ...]:
    roles = [Disposition.TRAIN] * n_folds
    roles[HOLDOUT_FOLD] = Disposition.HOLDOUT
    roles[test_fold] = Disposition.TEST
    return tuple(roles)


def build_plan(
    dataset: Dataset,
    study_id: str,
    seed: int,
    k: int | None = None,
    mode: Mode | str = Mode.KFOLD,
    *,
    holdout_frac: float = 0.1,
    stratify: bool = False,
    iteration: int = 0,
) -> tuple[PartitionPlan, Dataset]:
    """Shuffle, fold, assign roles and label ``dataset``.

    In LOOCV mode ``k`` may be omitted; the holdout is then the first
    ``round(holdout_frac * n)`` shuffled records and ``k`` is what remains.
    Passing ``k`` in LOOCV mode fixes the holdout at ``n - k`` records.
    ``iteration`` rebuilds the plan as it stands after that many rotations.
    """
    mode = Mode(mode)
    if mode is Mode.LOOCV and k is None:
        k = dataset.n - loocv_holdout_size(dataset.n, holdout_frac)
    if k is None:
        raise InvalidK("k is required in KFOLD mode")
    folds = _fold_assignment(dataset, seed, k, mode, stratify)
    n_folds = k if mode is Mode.KFOLD else k + 1
    roles = assign_dispositions(n_folds, mode)
    if iteration:
        roles = _roles_with_test(n_folds, _test_fold_at(iteration, n_folds))
    plan = PartitionPlan(
        study_id=study_id,
        seed=seed,
        k=k,
        mode=mode,
        fold_of_record=tuple(folds),
        role_of_fold=roles,
        iteration=iteration,
        stratified=stratify,
    )
    return plan, label(dataset, plan)


def rotate_test_fold(plan: PartitionPlan) -> PartitionPlan:
    """Move the test role to the next non-holdout fold, cycling over 1..F-1."""
    if plan.mode is Mode.KFOLD and plan.k < 4:
        raise InvalidK(f"k={plan.k}: rotation needs k >= 4 to keep a train fold")
    if plan.mode is Mode.LOOCV and plan.k < 2:
        raise InvalidK("LOOCV rotation needs at least two non-holdout records")
    nxt = plan.test_fold + 1
    if nxt >= plan.n_folds:
        nxt = 1
    return replace(
        plan,
        role_of_fold=_roles_with_test(plan.n_folds, nxt),
        iteration=plan.iteration + 1,
    )


def rotate(dataset: Dataset, plan: PartitionPlan) -> tuple[PartitionPlan, Dataset]:
    new_plan = rotate_test_fold(plan)
    return new_plan, label(dataset, new_plan)


def verify_partition(dataset: Dataset, manifest: Manifest) -> VerificationReport:
    """Recompute roles and hash keys from the manifest and compare.

    Findings are collected, never raised.
    """
    plan = manifest.plan
    report = VerificationReport(
        expected_fingerprint=manifest.dataset_fingerprint,
        actual_fingerprint=dataset.fingerprint,
    )
    try:
        expected, _ = build_plan(
            dataset,
            plan.study_id,
            plan.seed,
            plan.k,
            plan.mode,
            stratify=plan.stratified,
            iteration=plan.iteration,
        )
    except (PartitionError, ValueError) as exc:
        report.plan_findings.append(f"cannot rebuild plan on this dataset: {exc}")
        return report

    if expected.fold_of_record != plan.fold_of_record:
        report.plan_findings.append("manifest fold membership differs from recomputation")
    if expected.role_of_fold != plan.role_of_fold:
        report.plan_findings.append("manifest role map differs from recomputation")

    for i, r in enumerate(dataset.records):
        role = expected.role_of_position(i)
        key = hash_key(plan.study_id, r.record_id, role, plan.seed)
        if r.disposition is not role or r.hash_key != key:
            report.discrepancies.append(
                Discrepancy(
                    record_id=r.record_id,
                    stored_disposition=r.disposition.value if r.disposition else None,
                    expected_disposition=role.value,
                    stored_hash=r.hash_key,
                    expected_hash=key,
                )
            )
    return report
