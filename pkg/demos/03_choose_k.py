"""
Choosing k
==========

Four tactics: representative (5x2cv t-tests against the lowest-error
candidate), fixed k=10, leave-one-out over the non-holdout records, and a
balance-driven choice using per-fold F1 spread and the .632+ bootstrap.
"""

from holdout_kfold import bootstrap_632_plus, build_plan, five_by_two_ttest, select_k
from holdout_kfold.kselect import KConfig

from _data import cohort

data = cohort(600)

for strategy in ("representative", "bootstrap"):
    report = select_k(data, strategy, [5, 10, 20], B=50, seed=11)
    print(report.table(), end="\n\n")

print(select_k(data, "fixed10", seed=11).table(), end="\n\n")

###############################################################################
# Once a holdout exists, pass it as ``exclude`` so nothing is ever fit on it.
plan, _ = build_plan(data, "demo-study", 11, 10)
held = [r.record_id for r, f in zip(data.records, plan.fold_of_record) if f == 0]
print(select_k(data, "loocv", seed=11, exclude=held).table(), end="\n\n")

###############################################################################
# The building blocks can be used directly.
res = five_by_two_ttest(data, KConfig(5), KConfig(20), seed=3)
print(f"5x2cv k=5 vs k=20: t={res.t_stat}, significant={res.significant}")
boot = bootstrap_632_plus(data, B=50, seed=3)
print(
    f".632+: err_train={boot.err_train:.3f} err_boot={boot.err_boot:.3f} "
    f"gamma={boot.gamma:.3f} R={boot.R:.3f} w={boot.w:.3f} -> {boot.err_632plus:.3f}"
)
