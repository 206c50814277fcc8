"""The audit manifest: one canonical JSON document per study.

It binds the dataset fingerprint to the partition plan, the retained skill
scores and (optionally) the k-selection report, so a later study can check
that the holdout was never touched.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import jsonschema

from . import __version__
from .dataset import DatasetError, Disposition
from .evaluator import FoldScore, SkillReport
from .kselect import CandidateScore, KSelectionReport, Strategy
from .partitioner import Mode, PartitionPlan


class SchemaViolation(DatasetError):
    pass


_NUM = {"type": "number"}
_OPT_NUM = {"type": ["number", "null"]}

_FOLD_SCORE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["fold", "iteration", "f1", "precision", "recall", "error_rate", "n_train", "n_test"],
    "properties": {
        "fold": {"type": "integer", "minimum": 0},
        "iteration": {"type": "integer", "minimum": 0},
        "f1": {"type": "number", "minimum": 0, "maximum": 1},
        "precision": {"type": "number", "minimum": 0, "maximum": 1},
        "recall": {"type": "number", "minimum": 0, "maximum": 1},
        "error_rate": {"type": "number", "minimum": 0, "maximum": 1},
        "n_train": {"type": "integer", "minimum": 0},
        "n_test": {"type": "integer", "minimum": 1},
    },
}

_CANDIDATE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["k", "mean_error", "mean_f1", "err_632plus", "t_vs_best", "significant", "f1_spread"],
    "properties": {
        "k": {"type": "integer", "minimum": 2},
        "mean_error": _NUM,
        "mean_f1": _NUM,
        "err_632plus": _OPT_NUM,
        "t_vs_best": _OPT_NUM,
        "significant": {"type": ["boolean", "null"]},
        "f1_spread": _OPT_NUM,
    },
}

MANIFEST_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "holdout-kfold manifest",
    "type": "object",
    "additionalProperties": False,
    "required": [
        "study_id",
        "dataset_fingerprint",
        "plan",
        "skill",
        "k_selection",
        "created_at",
        "tool_version",
    ],
    "properties": {
        "study_id": {"type": "string", "minLength": 1},
        "dataset_fingerprint": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
        "created_at": {"type": "string"},
        "tool_version": {"type": "string"},
        "plan": {
            "type": "object",
            "additionalProperties": False,
            "required": [
                "study_id",
                "seed",
                "k",
                "mode",
                "iteration",
                "stratified",
                "role_of_fold",
                "fold_of_record",
            ],
            "properties": {
                "study_id": {"type": "string", "minLength": 1},
                "seed": {"type": "string", "pattern": "^[0-9]+$"},
                "k": {"type": "integer", "minimum": 2},
                "mode": {"enum": [m.value for m in Mode]},
                "iteration": {"type": "integer", "minimum": 0},
                "stratified": {"type": "boolean"},
                "role_of_fold": {"type": "array", "items": {"enum": [d.value for d in Disposition]}},
                "fold_of_record": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            },
        },
        "skill": {
            "type": "object",
            "additionalProperties": False,
            "required": ["per_fold", "mean_f1", "model_descriptor", "positive_class"],
            "properties": {
                "per_fold": {"type": "array", "minItems": 1, "items": _FOLD_SCORE},
                "mean_f1": _NUM,
                "model_descriptor": {"type": "string"},
                "positive_class": {"type": ["string", "null"]},
            },
        },
        "k_selection": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["strategy", "candidates", "chosen_k", "rationale"],
                    "properties": {
                        "strategy": {"enum": [s.value for s in Strategy]},
                        "candidates": {"type": "array", "minItems": 1, "items": _CANDIDATE},
                        "chosen_k": {"type": "integer"},
                        "rationale": {"type": "string", "minLength": 1},
                    },
                },
            ]
        },
    },
}


def utc_now() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z")


@dataclass(frozen=True)
class Manifest:
    study_id: str
    dataset_fingerprint: str
    plan: PartitionPlan
    skill: SkillReport
    k_selection: KSelectionReport | None = None
    created_at: str = ""
    tool_version: str = __version__

    def __post_init__(self):
        if self.plan.study_id != self.study_id:
            raise SchemaViolation("manifest and plan study ids differ")
        if not self.created_at:
            object.__setattr__(self, "created_at", utc_now())

    def same_content(self, other: Manifest) -> bool:
        """Equality ignoring the creation timestamp."""
        return replace(self, created_at=other.created_at) == other


def plan_to_dict(plan: PartitionPlan) -> dict[str, Any]:
    return {
        "study_id": plan.study_id,
        "seed": str(plan.seed),
        "k": plan.k,
        "mode": plan.mode.value,
        "iteration": plan.iteration,
        "stratified": plan.stratified,
        "role_of_fold": [r.value for r in plan.role_of_fold],
        "fold_of_record": list(plan.fold_of_record),
    }


def plan_from_dict(d: dict[str, Any]) -> PartitionPlan:
    return PartitionPlan(
        study_id=d["study_id"],
        seed=int(d["seed"]),
        k=d["k"],
        mode=Mode(d["mode"]),
        fold_of_record=tuple(d["fold_of_record"]),
        role_of_fold=tuple(Disposition(r) for r in d["role_of_fold"]),
        iteration=d["iteration"],
        stratified=d["stratified"],
    )


def skill_to_dict(skill: SkillReport) -> dict[str, Any]:
    return {
        "per_fold": [asdict(f) for f in skill.per_fold],
        "mean_f1": skill.mean_f1,
        "model_descriptor": skill.model_descriptor,
        "positive_class": skill.positive_class,
    }


def skill_from_dict(d: dict[str, Any]) -> SkillReport:
    return SkillReport(
        per_fold=tuple(FoldScore(**f) for f in d["per_fold"]),
        mean_f1=d["mean_f1"],
        model_descriptor=d["model_descriptor"],
        positive_class=d["positive_class"],
    )


def selection_to_dict(report: KSelectionReport) -> dict[str, Any]:
    return {
        "strategy": report.strategy.value,
        "candidates": [asdict(c) for c in report.candidates],
        "chosen_k": report.chosen_k,
        "rationale": report.rationale,
    }


def selection_from_dict(d: dict[str, Any]) -> KSelectionReport:
    return KSelectionReport(
        strategy=Strategy(d["strategy"]),
        candidates=tuple(CandidateScore(**c) for c in d["candidates"]),
        chosen_k=d["chosen_k"],
        rationale=d["rationale"],
    )


def manifest_to_dict(m: Manifest) -> dict[str, Any]:
    return {
        "study_id": m.study_id,
        "dataset_fingerprint": m.dataset_fingerprint,
        "plan": plan_to_dict(m.plan),
        "skill": skill_to_dict(m.skill),
        "k_selection": selection_to_dict(m.k_selection) if m.k_selection else None,
        "created_at": m.created_at,
        "tool_version": m.tool_version,
    }


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def dumps_manifest(m: Manifest) -> str:
    return canonical_json(manifest_to_dict(m))


def loads_manifest(text: str) -> Manifest:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"manifest is not valid JSON: {exc}") from None
    try:
        jsonschema.validate(data, MANIFEST_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaViolation(f"manifest schema violation at {where}: {exc.message}") from None
    try:
        return Manifest(
            study_id=data["study_id"],
            dataset_fingerprint=data["dataset_fingerprint"],
            plan=plan_from_dict(data["plan"]),
            skill=skill_from_dict(data["skill"]),
            k_selection=selection_from_dict(data["k_selection"]) if data["k_selection"] else None,
            created_at=data["created_at"],
            tool_version=data["tool_version"],
        )
    except ValueError as exc:
        raise SchemaViolation(f"manifest content is inconsistent: {exc}") from None


def write_manifest(manifest: Manifest, path: str | Path) -> None:
    Path(path).write_text(dumps_manifest(manifest), encoding="utf-8", newline="")


def read_manifest(path: str | Path) -> Manifest:
    return loads_manifest(Path(path).read_text(encoding="utf-8"))
