"""
Scoring the one-time model and throwing it away
===============================================

A decision stump is trained on the TRAIN folds and scored on TEST. Only
F1, precision, recall and error rate are kept; the model object never
leaves ``evaluate_plan``.
"""

from holdout_kfold import balance_check, build_plan, evaluate_plan
from holdout_kfold.dataset import Disposition

from _data import cohort

data = cohort()
plan, labeled = build_plan(data, "demo-study", 7, 10)

single = evaluate_plan(labeled, plan, positive_class="dx")
print("current test fold:", single.per_fold[0])

###############################################################################
# Sweep the test role over every non-holdout fold.
trace = []
sweep = evaluate_plan(labeled, plan, positive_class="dx", sweep=True, trace=trace)
for f in sweep.per_fold:
    print(f"fold {f.fold}: F1={f.f1:.3f} error={f.error_rate:.3f}")
print(f"mean F1 {sweep.mean_f1:.3f}; descriptor: {sweep.model_descriptor}")

holdout = {r.record_id for r in labeled.records if r.disposition is Disposition.HOLDOUT}
print("holdout records touched:", len(holdout.intersection(trace)))

###############################################################################
# Are the per-fold skill scores equivalent?
result = balance_check(sweep, tolerance=0.1)
print(f"F1 spread {result.f1_spread:.3f}, balanced at 0.1: {result.balanced}")
