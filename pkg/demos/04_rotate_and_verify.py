"""
Rotating the test fold and auditing the holdout
===============================================

Subsequent iterations move the TEST role to the next fold. The holdout
stays put, and ``verify_partition`` recomputes every label and hash key
from the manifest to prove it.
"""

import tempfile
from dataclasses import replace
from pathlib import Path

from holdout_kfold import (
    Manifest,
    build_plan,
    evaluate_plan,
    load_csv,
    read_manifest,
    rotate,
    verify_partition,
    write_labeled_csv,
    write_manifest,
)
from holdout_kfold.dataset import Disposition

from _data import cohort

data = cohort(200)
plan, labeled = build_plan(data, "demo-study", 5, 5)
manifest = Manifest("demo-study", data.fingerprint, plan, evaluate_plan(labeled, plan))


def holdout_ids(ds):
    return {r.record_id for r in ds.records if r.disposition is Disposition.HOLDOUT}


before = holdout_ids(labeled)
for _ in range(3):
    plan, labeled = rotate(labeled, plan)
    print(f"iteration {plan.iteration}: test fold {plan.test_fold}, holdout unchanged: {holdout_ids(labeled) == before}")

manifest = replace(manifest, plan=plan)

with tempfile.TemporaryDirectory() as tmp:
    csv_path, man_path = Path(tmp) / "labeled.csv", Path(tmp) / "manifest.json"
    write_labeled_csv(labeled, csv_path)
    write_manifest(manifest, man_path)

    report = verify_partition(load_csv(csv_path), read_manifest(man_path))
    print("\n".join(report.lines()))

    ###########################################################################
    # Flip one record from holdout to train by hand and verify again.
    lines = csv_path.read_text().splitlines()
    i = next(i for i, line in enumerate(lines) if ",holdout," in line)
    lines[i] = lines[i].replace(",holdout,", ",train,")
    csv_path.write_text("\n".join(lines) + "\n")
    report = verify_partition(load_csv(csv_path), read_manifest(man_path))
    print("\n".join(report.lines()))
