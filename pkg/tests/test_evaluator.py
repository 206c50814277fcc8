import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from holdout_kfold.dataset import Disposition, from_rows
from holdout_kfold.evaluator import (
    DegenerateTraining,
    EmptyInput,
    HoldoutLeak,
    LengthMismatch,
    SchemaMismatch,
    StumpLearner,
    _run_folds,
    evaluate_plan,
    predict,
    score,
    train_stump,
)
from holdout_kfold.partitioner import build_plan

from conftest import make_dataset


def records(header, rows):
    return from_rows(header, rows).records


def brute_force_stump_error(recs):
    """Fewest training errors over every single-feature rule, by enumeration."""
    labels = [r.label for r in recs]
    n = len(recs)
    best = n - max(labels.count(c) for c in set(labels))
    for j in range(len(recs[0].features)):
        col = [r.features[j] for r in recs]
        if isinstance(col[0], str):
            cats = sorted(set(col))
            err = 0
            for c in cats:
                members = [lab for v, lab in zip(col, labels) if v == c]
                err += len(members) - max(members.count(x) for x in set(members))
            best = min(best, err)
            continue
        vals = sorted(set(col))
        for a, b in zip(vals, vals[1:]):
            thr = (a + b) / 2
            for left, right in itertools.product(set(labels), repeat=2):
                err = sum((left if v <= thr else right) != lab for v, lab in zip(col, labels))
                best = min(best, err)
    return best


def test_single_class_gives_constant_model():
    recs = records(["id", "x", "label"], [["a", "1", "y"], ["b", "2", "y"], ["c", "3", "y"]])
    model = train_stump(recs)
    assert model.degenerate and model.training_error == 0
    assert all(predict(model, r) == "y" for r in recs)


def test_zero_records_is_an_error():
    with pytest.raises(DegenerateTraining):
        train_stump([])


def test_separable_1d():
    recs = records(
        ["id", "x", "label"], [["p1", "1", "a"], ["p2", "2", "a"], ["p3", "8", "b"], ["p4", "9", "b"]]
    )
    model = train_stump(recs)
    assert 2 < model.threshold < 8
    assert model.training_error == 0
    assert [predict(model, r) for r in recs] == ["a", "a", "b", "b"]


def test_crafted_two_feature_set_matches_enumeration():
    rows = [
        ["r1", "1", "u", "a"],
        ["r2", "2", "v", "b"],
        ["r3", "3", "u", "a"],
        ["r4", "4", "v", "b"],
        ["r5", "5", "u", "a"],
        ["r6", "6", "v", "b"],
    ]
    recs = records(["id", "x", "c", "label"], rows)
    model = train_stump(recs)
    # enumeration: every x threshold errs at least twice, c separates exactly
    assert brute_force_stump_error(recs) == 0
    assert model.feature == 1 and model.training_error == 0


def test_tie_breaks_lowest_feature_then_threshold():
    rows = [["r1", "1", "1", "a"], ["r2", "2", "2", "a"], ["r3", "3", "3", "b"], ["r4", "4", "4", "b"]]
    model = train_stump(records(["id", "x", "y", "label"], rows))
    assert model.feature == 0 and model.threshold == 2.5


@settings(max_examples=80, deadline=None)
@given(
    st.lists(
        st.tuples(st.integers(0, 6), st.integers(0, 4), st.sampled_from("uvw"), st.sampled_from("abc")),
        min_size=1,
        max_size=14,
    )
)
def test_stump_training_error_is_optimal(rows):
    recs = records(
        ["id", "x", "y", "c", "label"],
        [[f"i{i}", str(x), str(y), c, lab] for i, (x, y, c, lab) in enumerate(rows)],
    )
    model = train_stump(recs)
    errors = sum(predict(model, r) != r.label for r in recs)
    assert errors == brute_force_stump_error(recs)
    assert model.training_error * len(recs) == pytest.approx(errors)


def test_unseen_category_falls_back_to_majority():
    rows = [["r1", "u", "a"], ["r2", "u", "a"], ["r3", "v", "b"], ["r4", "u", "a"]]
    model = train_stump(records(["id", "c", "label"], rows))
    assert model.predict(("w",)) == "a"
    assert model.predict(("v",)) == "b"


def test_schema_mismatch():
    model = train_stump(make_dataset(20).records)
    with pytest.raises(SchemaMismatch):
        model.predict((1.0,))
    with pytest.raises(SchemaMismatch):
        model.predict(("1.0", "a"))


def oracle_scores(truth, pred, positive):
    """Brute-force confusion counts in exact rationals."""
    def prf(c):
        tp = sum(1 for t, p in zip(truth, pred) if t == c and p == c)
        fp = sum(1 for t, p in zip(truth, pred) if t != c and p == c)
        fn = sum(1 for t, p in zip(truth, pred) if t == c and p != c)
        P = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
        R = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
        F = 2 * P * R / (P + R) if P + R else Fraction(0)
        return P, R, F

    if positive is not None:
        return prf(positive)
    classes = sorted(set(truth) | set(pred))
    per = [prf(c) for c in classes]
    return tuple(sum(v) / len(per) for v in zip(*per))


def test_score_examples():
    s = score(["a", "b", "a"], ["a", "b", "a"], "a")
    assert s.f1 == 1.0 and s.error_rate == 0.0
    # TP=2, FP=1, FN=1
    s = score(["p", "p", "p", "n", "n"], ["p", "p", "n", "p", "n"], "p")
    assert s.precision == pytest.approx(2 / 3, abs=1e-15)
    assert s.recall == pytest.approx(2 / 3, abs=1e-15)
    assert s.f1 == pytest.approx(2 / 3, abs=1e-15)
    s = score(["n", "n"], ["n", "n"], "p")
    assert (s.precision, s.recall, s.f1) == (0.0, 0.0, 0.0)


def test_score_errors():
    with pytest.raises(LengthMismatch):
        score(["a"], ["a", "b"])
    with pytest.raises(EmptyInput):
        score([], [])


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_score_matches_oracle(data):
    classes = data.draw(st.sampled_from(["ab", "abc", "abcd"]))
    n = data.draw(st.integers(1, 50))
    truth = data.draw(st.lists(st.sampled_from(classes), min_size=n, max_size=n))
    pred = data.draw(st.lists(st.sampled_from(classes), min_size=n, max_size=n))
    positive = data.draw(st.one_of(st.none(), st.sampled_from(classes)))
    s = score(truth, pred, positive)
    P, R, F = oracle_scores(truth, pred, positive)
    assert abs(s.precision - float(P)) <= 1e-12
    assert abs(s.recall - float(R)) <= 1e-12
    assert abs(s.f1 - float(F)) <= 1e-12
    assert 0.0 <= s.f1 <= 1.0
    assert s.confusion.total == n


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=40))
def test_f1_is_one_iff_no_errors_with_tp(pairs):
    truth = ["p" if t else "n" for t, _ in pairs]
    pred = ["p" if p else "n" for _, p in pairs]
    s = score(truth, pred, "p")
    tp, fp, fn = s.confusion.one_vs_rest("p")
    assert (s.f1 == 1.0) == (fp == 0 and fn == 0 and tp > 0)


def test_macro_f1_is_mean_of_one_vs_rest():
    rng = random.Random(3)
    truth = [rng.choice("abc") for _ in range(40)]
    pred = [rng.choice("abc") for _ in range(40)]
    macro = score(truth, pred).f1
    per_class = [score(truth, pred, c).f1 for c in "abc"]
    assert macro == pytest.approx(sum(per_class) / 3, abs=1e-15)


def test_evaluate_separable_all_folds_perfect(separable):
    plan, labeled = build_plan(separable, "s", 11, 5)
    skill = evaluate_plan(labeled, plan, positive_class="pos", sweep=True)
    assert [f.f1 for f in skill.per_fold] == [1.0, 1.0, 1.0, 1.0]
    assert skill.mean_f1 == 1.0
    assert [f.fold for f in skill.per_fold] == [1, 2, 3, 4]


def test_evaluate_single_uses_current_test_fold(small):
    plan, labeled = build_plan(small, "s", 11, 5)
    skill = evaluate_plan(labeled, plan)
    assert len(skill.per_fold) == 1
    f = skill.per_fold[0]
    assert (f.fold, f.n_test, f.n_train) == (1, 8, 24)
    assert skill.mean_f1 == f.f1


def test_no_holdout_record_in_trace(small):
    plan, labeled = build_plan(small, "s", 11, 5)
    trace = []
    evaluate_plan(labeled, plan, sweep=True, trace=trace)
    holdout = {r.record_id for r in labeled.records if r.disposition is Disposition.HOLDOUT}
    assert trace and holdout.isdisjoint(trace)


def test_holdout_leak_detected(small):
    plan, labeled = build_plan(small, "s", 11, 5)
    records = list(labeled.records)
    i = next(i for i, r in enumerate(records) if r.disposition is Disposition.TRAIN)
    records[i] = type(records[i])(**{**records[i].__dict__, "disposition": Disposition.HOLDOUT})
    with pytest.raises(HoldoutLeak):
        evaluate_plan(labeled.with_records(records), plan)


def test_parallel_folds_match_serial(small):
    plan, labeled = build_plan(small, "s", 11, 8)
    assert evaluate_plan(labeled, plan, sweep=True, workers=4) == evaluate_plan(labeled, plan, sweep=True)


def test_model_descriptor_names_learner_only(small):
    plan, labeled = build_plan(small, "s", 11, 5)
    skill = evaluate_plan(labeled, plan)
    assert "discarded" in skill.model_descriptor
    assert "x" not in skill.model_descriptor.split()


def _no_skill_f1(truth, rate, rng, reps=20):
    total = 0.0
    for _ in range(reps):
        tp = fp = fn = 0
        for t in truth:
            y = rng.random() < rate
            tp += y and t
            fp += y and not t
            fn += t and not y
        total += 2 * tp / (2 * tp + fp + fn) if tp + fp + fn else 0.0
    return total / reps


def test_random_labels_score_at_no_skill_baseline():
    rng = random.Random(2024)
    rows = [[f"r{i}", f"{rng.random():.6f}", "pos" if rng.random() < 0.5 else "neg"] for i in range(10_000)]
    d = from_rows(["id", "x", "label"], rows)
    plan, labeled = build_plan(d, "mc", 17, 10)
    skill = evaluate_plan(labeled, plan, positive_class="pos", sweep=True)
    # Monte-Carlo oracle: a predictor independent of the truth with the same
    # per-fold positive rate as the stump
    oracle_rng = random.Random(7)
    baseline = []
    for run in _run_folds(labeled, plan, StumpLearner(), True, 1):
        rate = sum(p == "pos" for p in run.predictions) / len(run.predictions)
        baseline.append(_no_skill_f1([t == "pos" for t in run.truths], rate, oracle_rng))
    assert abs(skill.mean_f1 - sum(baseline) / len(baseline)) <= 0.05
