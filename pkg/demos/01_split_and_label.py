"""
Splitting a cohort into holdout, test and train
===============================================

Shuffle once with a pinned seed, cut k folds, and label fold 0 as the
analysis-naive holdout and fold 1 as the test fold. Every record gets a
hash key that anyone can recompute with ``sha256sum``.
"""

import hashlib
from collections import Counter

from holdout_kfold import build_plan

from _data import cohort

data = cohort()
print(f"{data.n} records, fingerprint {data.fingerprint[:16]}...")

plan, labeled = build_plan(data, study_id="demo-study", seed=20260101, k=10)
print("fold sizes:", plan.fold_sizes)
print("roles:", [r.value for r in plan.role_of_fold])
print(Counter(r.disposition.value for r in labeled.records))

###############################################################################
# The hash key is SHA-256 over ``study|record|role|seed``.
first = labeled.records[0]
text = f"demo-study|{first.record_id}|{first.disposition.value}|20260101"
print(first.record_id, first.disposition.value, first.hash_key[:16] + "...")
assert hashlib.sha256(text.encode()).hexdigest() == first.hash_key

###############################################################################
# With 1003 records and k=7 the remainder goes to the first folds.
odd = cohort(1003)
plan7, _ = build_plan(odd, "demo-study", 1, 7)
print("n=1003, k=7 fold sizes:", plan7.fold_sizes)

###############################################################################
# Stratified folds are available but off by default.
strat, _ = build_plan(data, "demo-study", 20260101, 10, stratify=True)
per_fold = Counter((f, r.label) for f, r in zip(strat.fold_of_record, data.records))
print("dx per fold (stratified):", [per_fold[(f, "dx")] for f in range(10)])
