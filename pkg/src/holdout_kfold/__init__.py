"""Analysis-naive holdout, test and train partitioning via extended k-fold CV."""

__version__ = "0.1.0"

from .dataset import (  # noqa: E402
    Dataset,
    Disposition,
    Record,
    from_rows,
    load_csv,
    write_labeled_csv,
)
from .evaluator import (  # noqa: E402
    SkillReport,
    StumpLearner,
    evaluate_plan,
    score,
    train_stump,
)
from .kselect import (  # noqa: E402
    KSelectionReport,
    Strategy,
    balance_check,
    bootstrap_632_plus,
    five_by_two_ttest,
    select_k,
)
from .manifest import Manifest, read_manifest, write_manifest  # noqa: E402
from .partitioner import (  # noqa: E402
    Mode,
    PartitionPlan,
    build_plan,
    hash_key,
    rotate,
    rotate_test_fold,
    verify_partition,
)

__all__ = [
    "Dataset",
    "Disposition",
    "Manifest",
    "Mode",
    "PartitionPlan",
    "Record",
    "SkillReport",
    "KSelectionReport",
    "Strategy",
    "StumpLearner",
    "balance_check",
    "bootstrap_632_plus",
    "build_plan",
    "evaluate_plan",
    "five_by_two_ttest",
    "from_rows",
    "hash_key",
    "load_csv",
    "read_manifest",
    "rotate",
    "rotate_test_fold",
    "score",
    "select_k",
    "train_stump",
    "verify_partition",
    "write_labeled_csv",
    "write_manifest",
]
