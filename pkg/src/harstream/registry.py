"""Pattern/activity registry, retraining, and model snapshot persistence.

The registry is the single mutable store: pattern vocabularies, their
training windows, and activity histogram examples. Retraining produces an
immutable ModelSnapshot (mixture + both forests + calibrated thresholds)
that sessions swap in atomically. Snapshots serialize to a self-describing
JSON document with plain numeric arrays; identical registry content and
seeds serialize to identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DataError,
    SnapshotCompatibilityError,
    SnapshotFormatError,
    TrainingError,
)
from .features import FeatureVector, WindowConfig, feature_matrix, project_density
from .forest import ForestConfig, LabeledSet, RandomForest, TreeNode, fit_forest
from .gmm import EmConfig, GmmModel, assign_component_labels, em_fit
from .novelty import NoveltyConfig, calibrate_thresholds
from .recognizer import VoteConfig

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class PatternInfo:
    name: str
    activities: tuple[str, ...]
    sample_count: int


@dataclass(frozen=True)
class TrainerConfig:
    window: WindowConfig = WindowConfig()
    vote: VoteConfig = VoteConfig()
    em: EmConfig = EmConfig()
    unit_forest: ForestConfig = ForestConfig()
    activity_forest: ForestConfig = ForestConfig()
    match_quantile: float = 0.05
    new_quantile: float = 0.001
    consecutive_n: int = 3
    collect_target: int = 120

    @classmethod
    def with_seed(cls, seed: int, **overrides) -> "TrainerConfig":
        base = cls(
            em=EmConfig(seed=seed),
            unit_forest=ForestConfig(seed=seed),
            activity_forest=ForestConfig(seed=seed + 1),
        )
        return replace(base, **overrides) if overrides else base


@dataclass
class ModelSnapshot:
    """Everything a session needs to classify, score and threshold windows."""

    version: int
    gmm: GmmModel
    unit_forest: RandomForest
    activity_forest: RandomForest | None
    novelty: NoveltyConfig
    window: WindowConfig
    vote: VoteConfig
    pattern_names: list[str]
    activity_names: list[str]


class PatternRegistry:
    """Single-writer store of patterns, their samples, and activity examples."""

    def __init__(self):
        self.version = 0
        self._patterns: dict[str, list[FeatureVector]] = {}
        self._pattern_activities: dict[str, list[str]] = {}
        self._activity_histograms: dict[str, list[np.ndarray]] = {}

    @property
    def pattern_names(self) -> list[str]:
        return list(self._patterns)

    @property
    def activity_names(self) -> list[str]:
        names: list[str] = []
        for acts in self._pattern_activities.values():
            for a in acts:
                if a not in names:
                    names.append(a)
        for a in self._activity_histograms:
            if a not in names:
                names.append(a)
        return names

    def patterns(self) -> list[PatternInfo]:
        return [
            PatternInfo(name, tuple(self._pattern_activities[name]), len(samples))
            for name, samples in self._patterns.items()
        ]

    def samples(self, name: str) -> list[FeatureVector]:
        return list(self._patterns[name])

    def add_pattern(
        self,
        name: str,
        activity: str,
        samples: list[FeatureVector],
        collect_target: int = 120,
    ) -> int:
        """Append a newly collected pattern; returns the new registry version.

        The interactive path always delivers exactly collect_target samples;
        anything else is a caller bug. The registry is untouched on error.
        """
        if name in self._patterns:
            raise DataError(f"pattern {name!r} already exists")
        if len(samples) != collect_target:
            raise ValueError(f"expected {collect_target} samples, got {len(samples)}")
        self._store_pattern(name, activity, samples)
        return self.version

    def add_pattern_bulk(self, name: str, activities: list[str], samples: list[FeatureVector]) -> int:
        """Corpus-bootstrap path: any sample count >= 2 is accepted."""
        if name in self._patterns:
            raise DataError(f"pattern {name!r} already exists")
        if len(samples) < 2:
            raise ValueError(f"pattern {name!r} needs at least 2 samples")
        self._patterns[name] = list(samples)
        self._pattern_activities[name] = list(dict.fromkeys(activities))
        self.version += 1
        return self.version

    def _store_pattern(self, name: str, activity: str, samples: list[FeatureVector]) -> None:
        self._patterns[name] = list(samples)
        self._pattern_activities[name] = [activity]
        self.version += 1

    def add_activity_histograms(self, activity: str, histograms: list[np.ndarray]) -> int:
        """Store labeled count vectors over the current pattern vocabulary."""
        vocab_size = len(self._patterns)
        for h in histograms:
            if len(h) != vocab_size:
                raise ValueError(
                    f"histogram length {len(h)} does not match vocabulary size {vocab_size}"
                )
        self._activity_histograms.setdefault(activity, []).extend(
            np.asarray(h, dtype=float) for h in histograms
        )
        self.version += 1
        return self.version

    def retrain(
        self, configs: TrainerConfig = TrainerConfig(), previous: ModelSnapshot | None = None
    ) -> ModelSnapshot:
        """Refit the mixture and the unit forest on all stored samples and
        recalibrate the novelty thresholds.

        The activity forest is refit only when histogram examples exist;
        otherwise it carries over from the previous snapshot.
        """
        names = self.pattern_names
        if not names:
            raise TrainingError("registry has no patterns to train on")
        for name in names:
            if len(self._patterns[name]) < 2:
                raise TrainingError(f"pattern {name!r} has fewer than 2 samples")
        all_fvs: list[FeatureVector] = []
        labels: list[str] = []
        for name in names:
            all_fvs.extend(self._patterns[name])
            labels.extend([name] * len(self._patterns[name]))
        X36 = feature_matrix(all_fvs)
        X27 = project_density(X36)
        gmm = em_fit(X27, k=len(names), cfg=configs.em)
        gmm = assign_component_labels(gmm, X27, labels)
        scores = gmm.log_pdf_batch(X27)
        per_pattern = {
            name: scores[[i for i, lab in enumerate(labels) if lab == name]].tolist()
            for name in names
        }
        novelty_cfg = calibrate_thresholds(
            gmm,
            per_pattern,
            match_quantile=configs.match_quantile,
            new_quantile=configs.new_quantile,
            consecutive_n=configs.consecutive_n,
            collect_target=configs.collect_target,
        )
        unit_forest = fit_forest(
            LabeledSet.from_labels(X36, labels, label_names=names), configs.unit_forest
        )
        activity_forest = previous.activity_forest if previous is not None else None
        activity_names = self.activity_names
        if self._activity_histograms:
            hx: list[np.ndarray] = []
            hy: list[str] = []
            for activity, hists in self._activity_histograms.items():
                for h in hists:
                    padded = np.zeros(len(names))
                    padded[: len(h)] = h
                    hx.append(padded)
                    hy.append(activity)
            forest_labels = [a for a in activity_names if a in self._activity_histograms]
            activity_forest = fit_forest(
                LabeledSet.from_labels(np.stack(hx), hy, label_names=forest_labels),
                configs.activity_forest,
            )
        return ModelSnapshot(
            version=self.version,
            gmm=gmm,
            unit_forest=unit_forest,
            activity_forest=activity_forest,
            novelty=novelty_cfg,
            window=configs.window,
            vote=configs.vote,
            pattern_names=names,
            activity_names=activity_names,
        )


# ---------------------------------------------------------------------------
# snapshot (de)serialization

def _tree_to_obj(node: TreeNode):
    if node.is_leaf:
        return {"counts": [int(c) for c in node.counts]}
    return {
        "f": node.feature,
        "t": node.threshold,
        "l": _tree_to_obj(node.left),
        "r": _tree_to_obj(node.right),
    }


def _tree_from_obj(obj) -> TreeNode:
    if "counts" in obj:
        return TreeNode(counts=np.asarray(obj["counts"], dtype=float))
    return TreeNode(
        feature=int(obj["f"]),
        threshold=float(obj["t"]),
        left=_tree_from_obj(obj["l"]),
        right=_tree_from_obj(obj["r"]),
    )


def _forest_to_obj(forest: RandomForest):
    return {
        "label_names": forest.label_names,
        "n_features": forest.n_features,
        "config": {
            "n_trees": forest.config.n_trees,
            "max_depth": forest.config.max_depth,
            "min_leaf": forest.config.min_leaf,
            "mtry": forest.config.mtry,
            "seed": forest.config.seed,
        },
        "trees": [_tree_to_obj(t) for t in forest.trees],
    }


def _forest_from_obj(obj) -> RandomForest:
    cfg = obj["config"]
    return RandomForest(
        trees=[_tree_from_obj(t) for t in obj["trees"]],
        label_names=[str(s) for s in obj["label_names"]],
        n_features=int(obj["n_features"]),
        config=ForestConfig(
            n_trees=int(cfg["n_trees"]),
            max_depth=int(cfg["max_depth"]),
            min_leaf=int(cfg["min_leaf"]),
            mtry=cfg["mtry"],
            seed=int(cfg["seed"]),
        ),
    )


def snapshot_to_json(s: ModelSnapshot) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "registry_version": s.version,
        "window": {
            "window_len": s.window.window_len,
            "step": s.window.step,
            "rate_hz": s.window.rate_hz,
        },
        "vote": {"capacity": s.vote.capacity, "disjoint": s.vote.disjoint},
        "novelty": {
            "theta_match": s.novelty.theta_match,
            "theta_new": s.novelty.theta_new,
            "consecutive_n": s.novelty.consecutive_n,
            "collect_target": s.novelty.collect_target,
        },
        "patterns": s.pattern_names,
        "activities": s.activity_names,
        "gmm": {
            "weights": [float(v) for v in s.gmm.weights],
            "means": [[float(v) for v in row] for row in s.gmm.means],
            "variances": [[float(v) for v in row] for row in s.gmm.variances],
            "variance_floor": s.gmm.variance_floor,
            "component_pattern": s.gmm.component_pattern,
        },
        "unit_forest": _forest_to_obj(s.unit_forest),
        "activity_forest": _forest_to_obj(s.activity_forest) if s.activity_forest else None,
    }
    return json.dumps(doc, separators=(",", ":"))


def snapshot_from_json(text: str) -> ModelSnapshot:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SnapshotFormatError(f"snapshot is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise SnapshotFormatError("snapshot is missing its schema_version")
    found = doc["schema_version"]
    if found != SCHEMA_VERSION:
        raise SnapshotCompatibilityError(
            f"snapshot schema version {found} is not supported (this build reads {SCHEMA_VERSION})"
        )
    try:
        g = doc["gmm"]
        gmm = GmmModel(
            weights=np.asarray(g["weights"], dtype=float),
            means=np.asarray(g["means"], dtype=float),
            variances=np.asarray(g["variances"], dtype=float),
            variance_floor=float(g["variance_floor"]),
            component_pattern=g.get("component_pattern"),
        )
        novelty = NoveltyConfig(
            theta_match=float(doc["novelty"]["theta_match"]),
            theta_new=float(doc["novelty"]["theta_new"]),
            consecutive_n=int(doc["novelty"]["consecutive_n"]),
            collect_target=int(doc["novelty"]["collect_target"]),
        )
        window = WindowConfig(
            window_len=int(doc["window"]["window_len"]),
            step=int(doc["window"]["step"]),
            rate_hz=float(doc["window"]["rate_hz"]),
        )
        vote = VoteConfig(
            capacity=int(doc["vote"]["capacity"]), disjoint=bool(doc["vote"]["disjoint"])
        )
        unit_forest = _forest_from_obj(doc["unit_forest"])
        activity_forest = (
            _forest_from_obj(doc["activity_forest"]) if doc.get("activity_forest") else None
        )
        return ModelSnapshot(
            version=int(doc["registry_version"]),
            gmm=gmm,
            unit_forest=unit_forest,
            activity_forest=activity_forest,
            novelty=novelty,
            window=window,
            vote=vote,
            pattern_names=[str(s) for s in doc["patterns"]],
            activity_names=[str(s) for s in doc["activities"]],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotFormatError(f"snapshot is structurally invalid: {exc}") from exc


def save_snapshot(s: ModelSnapshot, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(snapshot_to_json(s))
        fh.write("\n")


def load_snapshot(path) -> ModelSnapshot:
    with open(path, encoding="utf-8") as fh:
        return snapshot_from_json(fh.read())
