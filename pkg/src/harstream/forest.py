"""CART decision trees and random forests, the classifier for both hierarchy levels.

Splits minimize Gini impurity over a random feature subset per node, with
candidate thresholds at midpoints between consecutive distinct sorted
values. Trees never normalize their inputs; any strictly increasing
per-feature transform applied to train and test alike leaves the learned
partition of the training data unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, sqrt
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 16
    min_leaf: int = 2
    mtry: int | None = None  # features tried per split; None means ceil(sqrt(d))
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")

    def resolved_mtry(self, d: int) -> int:
        m = self.mtry if self.mtry is not None else ceil(sqrt(d))
        if not 1 <= m <= d:
            raise ValueError(f"mtry must be in [1, {d}], got {m}")
        return m


@dataclass
class LabeledSet:
    X: np.ndarray
    y: np.ndarray  # integer indices into label_names
    label_names: list[str]

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=int)
        if self.X.ndim != 2:
            raise ValueError("X must be 2-d")
        if len(self.X) != len(self.y):
            raise ValueError(f"{len(self.X)} rows but {len(self.y)} labels")
        if len(self.y) and (self.y.min() < 0 or self.y.max() >= len(self.label_names)):
            raise ValueError("labels must index into label_names")

    @classmethod
    def from_labels(cls, X, labels: Sequence[str], label_names: Sequence[str] | None = None) -> "LabeledSet":
        names = list(label_names) if label_names is not None else sorted(set(labels))
        index = {name: i for i, name in enumerate(names)}
        try:
            y = np.array([index[lab] for lab in labels], dtype=int)
        except KeyError as exc:
            raise ValueError(f"label {exc.args[0]!r} not in label_names") from None
        return cls(X=np.asarray(X, dtype=float), y=y, label_names=names)

    @property
    def n_classes(self) -> int:
        return len(self.label_names)


@dataclass
class TreeNode:
    """Either an internal split (left/right set) or a leaf (counts set)."""

    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    counts: np.ndarray | None = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def _gini(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - np.sum(p * p))


def _best_split(X, y, idx, features, n_classes, min_leaf):
    """Best (feature, threshold) over the given features by Gini decrease,
    or None when no candidate split decreases impurity."""
    n = len(idx)
    parent_counts = np.bincount(y[idx], minlength=n_classes)
    parent_gini = _gini(parent_counts)
    best = None
    best_decrease = 0.0
    for f in features:
        x = X[idx, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        ys = y[idx][order]
        distinct = xs[:-1] < xs[1:]
        if not np.any(distinct):
            continue
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), ys] = 1.0
        left_counts = np.cumsum(onehot, axis=0)[:-1]
        left_n = np.arange(1, n)
        right_n = n - left_n
        valid = distinct & (left_n >= min_leaf) & (right_n >= min_leaf)
        if not np.any(valid):
            continue
        right_counts = parent_counts[None, :] - left_counts
        gl = 1.0 - np.sum((left_counts / left_n[:, None]) ** 2, axis=1)
        gr = 1.0 - np.sum((right_counts / right_n[:, None]) ** 2, axis=1)
        weighted = (left_n * gl + right_n * gr) / n
        decrease = np.where(valid, parent_gini - weighted, -np.inf)
        pos = int(np.argmax(decrease))
        if decrease[pos] > best_decrease:
            best_decrease = float(decrease[pos])
            lo, hi = xs[pos], xs[pos + 1]
            threshold = lo + (hi - lo) / 2.0
            if threshold >= hi:  # adjacent floats: fall back to the left endpoint
                threshold = lo
            best = (int(f), float(threshold))
    return best


def fit_tree(data: LabeledSet, cfg: ForestConfig, rng: np.random.Generator) -> TreeNode:
    """Grow one CART tree; stops at purity, max_depth, min_leaf or zero gain."""
    if len(data.y) == 0:
        raise ValueError("cannot fit a tree on an empty dataset")
    mtry = cfg.resolved_mtry(data.X.shape[1])

    def grow(idx: np.ndarray, depth: int) -> TreeNode:
        counts = np.bincount(data.y[idx], minlength=data.n_classes)
        if (
            depth >= cfg.max_depth
            or len(idx) < 2 * cfg.min_leaf
            or np.count_nonzero(counts) <= 1
        ):
            return TreeNode(counts=counts)
        features = np.sort(rng.choice(data.X.shape[1], size=mtry, replace=False))
        split = _best_split(data.X, data.y, idx, features, data.n_classes, cfg.min_leaf)
        if split is None:
            return TreeNode(counts=counts)
        f, threshold = split
        goes_left = data.X[idx, f] <= threshold
        left_idx = idx[goes_left]
        right_idx = idx[~goes_left]
        node = TreeNode(feature=int(f), threshold=float(threshold))
        node.left = grow(left_idx, depth + 1)
        node.right = grow(right_idx, depth + 1)
        return node

    return grow(np.arange(len(data.y)), 0)


def _tree_leaf(node: TreeNode, x: np.ndarray) -> np.ndarray:
    while not node.is_leaf:
        node = node.left if x[node.feature] <= node.threshold else node.right
    assert node.counts is not None
    return node.counts


def _tree_vote(node: TreeNode, x: np.ndarray) -> int:
    # Leaf majority; np.argmax resolves ties toward the lowest class index.
    return int(np.argmax(_tree_leaf(node, x)))


@dataclass
class RandomForest:
    trees: list[TreeNode]
    label_names: list[str]
    n_features: int
    config: ForestConfig
    oob_error: float | None = field(default=None, compare=False)

    def predict(self, x) -> tuple[str, np.ndarray]:
        """Majority vote over trees; returns (label, per-class vote fractions).

        Vote ties resolve to the lowest index in label_names.
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_features,):
            raise ValueError(f"expected {self.n_features} features, got shape {x.shape}")
        votes = np.zeros(len(self.label_names))
        for tree in self.trees:
            votes[_tree_vote(tree, x)] += 1
        probs = votes / len(self.trees)
        return self.label_names[int(np.argmax(votes))], probs

    def predict_label(self, x) -> str:
        return self.predict(x)[0]

    def predict_batch(self, X) -> list[str]:
        X = np.asarray(X, dtype=float)
        return [self.predict(row)[0] for row in X]


def fit_forest(data: LabeledSet, cfg: ForestConfig = ForestConfig()) -> RandomForest:
    """Fit n_trees trees on bootstrap resamples.

    Each tree's RNG derives from (seed, tree index) so the whole ensemble is
    a deterministic function of the data and config; out-of-bag error is
    recorded when at least one sample is left out of some bootstrap.
    """
    n = len(data.y)
    if n < 2:
        raise ValueError("need at least 2 samples to fit a forest")
    trees: list[TreeNode] = []
    oob_votes = np.zeros((n, data.n_classes))
    for t in range(cfg.n_trees):
        rng = np.random.default_rng([cfg.seed, t])
        boot = rng.integers(0, n, size=n)
        subset = LabeledSet(X=data.X[boot], y=data.y[boot], label_names=data.label_names)
        tree = fit_tree(subset, cfg, rng)
        trees.append(tree)
        out_of_bag = np.setdiff1d(np.arange(n), boot, assume_unique=False)
        for i in out_of_bag:
            oob_votes[i, _tree_vote(tree, data.X[i])] += 1
    covered = oob_votes.sum(axis=1) > 0
    oob_error = None
    if np.any(covered):
        oob_pred = np.argmax(oob_votes[covered], axis=1)
        oob_error = float(np.mean(oob_pred != data.y[covered]))
    return RandomForest(
        trees=trees,
        label_names=list(data.label_names),
        n_features=data.X.shape[1],
        config=cfg,
        oob_error=oob_error,
    )


def cross_validate(
    data: LabeledSet, folds: int = 4, cfg: ForestConfig = ForestConfig()
) -> tuple[list[float], float]:
    """Stratified k-fold cross-validation; returns per-fold accuracies and their mean.

    Folds are dealt round-robin from a seeded shuffle within each class, so
    per-class fold sizes differ by at most one and the folds partition the
    data exactly.
    """
    n = len(data.y)
    if n < folds:
        raise ValueError(f"need at least {folds} samples for {folds} folds")
    rng = np.random.default_rng(cfg.seed)
    fold_of = np.empty(n, dtype=int)
    for c in range(data.n_classes):
        members = np.flatnonzero(data.y == c)
        if 0 < len(members) < folds:
            raise ValueError(
                f"class {data.label_names[c]!r} has {len(members)} samples; "
                f"need at least {folds} to stratify"
            )
        rng.shuffle(members)
        fold_of[members] = np.arange(len(members)) % folds
    accuracies: list[float] = []
    for k in range(folds):
        test = fold_of == k
        train = LabeledSet(X=data.X[~test], y=data.y[~test], label_names=data.label_names)
        forest = fit_forest(train, cfg)
        predicted = np.array(
            [np.argmax(_forest_votes(forest, row)) for row in data.X[test]]
        )
        accuracies.append(float(np.mean(predicted == data.y[test])))
    return accuracies, float(np.mean(accuracies))


def _forest_votes(forest: RandomForest, x: np.ndarray) -> np.ndarray:
    votes = np.zeros(len(forest.label_names))
    for tree in forest.trees:
        votes[_tree_vote(tree, x)] += 1
    return votes
