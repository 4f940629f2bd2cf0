"""Diagonal-covariance Gaussian mixtures fit by EM, seeded with K-means.

The mixture density p(x) = sum_k w_k N(x | mu_k, diag(var_k)) is evaluated
in the log domain throughout; log_pdf is the score the novelty layer
thresholds. Covariances are diagonal with a hard floor: with on the order of
a hundred samples per pattern, full covariances in 27 dimensions are
ill-conditioned, and the floor keeps degenerate (constant) features from
collapsing a component.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import TrainingError

_LOG_2PI = float(np.log(2.0 * np.pi))
# Ascent slack: EM log-likelihood may wobble by rounding noise but never more.
_ASCENT_TOL = 1e-9


@dataclass(frozen=True)
class EmConfig:
    max_iter: int = 200
    tol: float = 1e-6
    variance_floor: float = 1e-6
    restarts: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.variance_floor <= 0:
            raise ValueError("variance_floor must be > 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass(frozen=True)
class GaussianComponent:
    weight: float
    mean: np.ndarray
    variance: np.ndarray  # diagonal of the covariance


@dataclass
class GmmModel:
    weights: np.ndarray          # (K,), positive, sums to 1
    means: np.ndarray            # (K, d)
    variances: np.ndarray        # (K, d), floored diagonals
    variance_floor: float
    component_pattern: list[str] | None = None
    log_likelihoods: list[float] = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.means = np.asarray(self.means, dtype=float)
        self.variances = np.asarray(self.variances, dtype=float)
        if self.means.shape != self.variances.shape:
            raise ValueError("means and variances must have matching shapes")
        if self.weights.shape != (self.means.shape[0],):
            raise ValueError("one weight per component required")
        if self.k < 1:
            raise ValueError("need at least one component")
        if np.any(self.weights <= 0) or abs(self.weights.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be positive and sum to 1")
        if np.any(self.variances < self.variance_floor * (1 - 1e-12)):
            raise ValueError("variances must respect the floor")

    @property
    def k(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def components(self) -> list[GaussianComponent]:
        return [
            GaussianComponent(float(w), m.copy(), v.copy())
            for w, m, v in zip(self.weights, self.means, self.variances)
        ]

    def _check_dim(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.dim:
            raise ValueError(f"expected dimension {self.dim}, got {X.shape[-1]}")
        return np.atleast_2d(X)

    def component_log_density(self, X) -> np.ndarray:
        """(n, K) matrix of log[w_k N(x_n | mu_k, var_k)]."""
        X = self._check_dim(X)
        diff = X[:, None, :] - self.means[None, :, :]
        quad = np.sum(diff * diff / self.variances[None, :, :], axis=2)
        log_norm = -0.5 * (self.dim * _LOG_2PI + np.sum(np.log(self.variances), axis=1))
        return np.log(self.weights)[None, :] + log_norm[None, :] - 0.5 * quad

    def log_pdf_batch(self, X) -> np.ndarray:
        return _logsumexp(self.component_log_density(X), axis=1)

    def log_pdf(self, x) -> float:
        """Log of the mixture density at one point (log-sum-exp over components)."""
        return float(self.log_pdf_batch(np.atleast_2d(np.asarray(x, dtype=float)))[0])

    def responsibilities(self, x) -> np.ndarray:
        """Posterior component probabilities at one point; sums to 1."""
        lp = self.component_log_density(np.atleast_2d(np.asarray(x, dtype=float)))[0]
        lp = lp - _logsumexp(lp, axis=0)
        r = np.exp(lp)
        return r / r.sum()

    def responsibilities_batch(self, X) -> np.ndarray:
        lp = self.component_log_density(X)
        lp = lp - _logsumexp(lp, axis=1)[:, None]
        r = np.exp(lp)
        return r / r.sum(axis=1, keepdims=True)


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    out = np.squeeze(m, axis=axis) + np.log(np.sum(np.exp(a - m), axis=axis))
    return out


def kmeans(
    points, k: int, seed: int, distortions: list | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Lloyd's algorithm from k distinct seeded starting points.

    Runs until assignments stabilize or 100 iterations. Empty clusters are
    reseeded to the point currently farthest from its own centroid. Pass a
    list as `distortions` to record the total squared distance per iteration.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim != 2:
        raise ValueError("points must be a 2-d array")
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n points, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    centroids = X[rng.choice(n, size=k, replace=False)].copy()
    assign = np.full(n, -1)
    for _ in range(100):
        d2 = np.sum((X[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_assign = np.argmin(d2, axis=1)
        # Reseed empty clusters to the worst-fit point so every centroid owns
        # data. A reseed can empty the donor cluster, hence the outer passes;
        # each point is stolen at most once per iteration.
        stolen = np.zeros(n, dtype=bool)
        for _pass in range(k):
            empties = [c for c in range(k) if not np.any(new_assign == c)]
            if not empties:
                break
            for c in empties:
                cand = np.flatnonzero(~stolen)
                worst = int(cand[np.argmax(d2[cand, new_assign[cand]])])
                new_assign[worst] = c
                centroids[c] = X[worst]
                stolen[worst] = True
        if distortions is not None:
            distortions.append(float(np.sum((X - centroids[new_assign]) ** 2)))
        stable = np.array_equal(new_assign, assign)
        assign = new_assign
        for c in range(k):
            centroids[c] = X[assign == c].mean(axis=0)
        if stable:
            break
    return centroids, assign


def _m_step(X: np.ndarray, resp: np.ndarray, floor: float):
    n = X.shape[0]
    nk = resp.sum(axis=0)
    safe_nk = np.maximum(nk, 1e-12)
    weights = np.maximum(nk / n, 1e-300)
    weights = weights / weights.sum()
    means = resp.T @ X / safe_nk[:, None]
    sq = resp.T @ (X * X) / safe_nk[:, None]
    variances = np.maximum(sq - means * means, 0.0)
    variances = np.maximum(variances, floor)
    return weights, means, variances


def _run_em(X: np.ndarray, model: GmmModel, cfg: EmConfig) -> GmmModel:
    history: list[float] = []
    current = GmmModel(model.weights, model.means, model.variances, cfg.variance_floor)
    prev = -np.inf
    for _ in range(cfg.max_iter):
        lp = current.component_log_density(X)
        per_point = _logsumexp(lp, axis=1)
        ll = float(per_point.sum())
        if ll < prev - _ASCENT_TOL:
            raise TrainingError(f"EM log-likelihood decreased: {prev} -> {ll}")
        history.append(ll)
        if np.isfinite(prev) and abs(ll - prev) <= cfg.tol * abs(prev):
            break
        prev = ll
        weights, means, variances = _m_step(X, np.exp(lp - per_point[:, None]), cfg.variance_floor)
        current = GmmModel(weights, means, variances, cfg.variance_floor)
    current.log_likelihoods = history
    return current


def _init_from_kmeans(X: np.ndarray, k: int, seed: int, floor: float) -> GmmModel:
    centroids, assign = kmeans(X, k, seed)
    n, d = X.shape
    weights = np.array([np.count_nonzero(assign == c) for c in range(k)], dtype=float)
    weights = weights / weights.sum()
    variances = np.empty((k, d))
    for c in range(k):
        members = X[assign == c]
        variances[c] = np.maximum(members.var(axis=0), floor)
    return GmmModel(weights, centroids.copy(), variances, floor)


def em_fit(points, k: int, cfg: EmConfig = EmConfig(), init: GmmModel | None = None) -> GmmModel:
    """Fit a k-component mixture by EM; returns the best of cfg.restarts runs.

    Each restart is seeded from a K-means partition (weights from cluster
    fractions, means from centroids, floored per-cluster variances). Passing
    `init` skips the K-means restarts and refines the given model instead.
    The per-iteration training log-likelihood of the returned run is kept on
    the model and checked to be non-decreasing.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim != 2:
        raise ValueError("points must be a 2-d array")
    if not np.all(np.isfinite(X)):
        raise ValueError("points must be finite")
    if X.shape[0] < k:
        raise ValueError(f"need at least k={k} points, got {X.shape[0]}")
    if init is not None:
        return _run_em(X, init, cfg)
    best: GmmModel | None = None
    for r in range(cfg.restarts):
        start = _init_from_kmeans(X, k, seed=cfg.seed + 7919 * r, floor=cfg.variance_floor)
        fitted = _run_em(X, start, cfg)
        if best is None or fitted.log_likelihoods[-1] > best.log_likelihoods[-1]:
            best = fitted
    assert best is not None
    return best


def assign_component_labels(model: GmmModel, X, labels: Sequence[str]) -> GmmModel:
    """Name each component after the majority label of its responsibility mass."""
    X = np.asarray(X, dtype=float)
    labels = list(labels)
    if X.shape[0] != len(labels):
        raise ValueError("one label per training point required")
    resp = model.responsibilities_batch(X)
    names = sorted(set(labels))
    by_name = {name: np.array([lab == name for lab in labels], dtype=float) for name in names}
    assigned = []
    for c in range(model.k):
        mass = {name: float(resp[:, c] @ mask) for name, mask in by_name.items()}
        assigned.append(max(names, key=lambda name: mass[name]))
    return replace(model, component_pattern=assigned)


def add_component(
    model: GmmModel,
    new_points,
    label: str,
    training_points,
    training_labels: Sequence[str],
    cfg: EmConfig = EmConfig(),
) -> GmmModel:
    """Grow the mixture by one component for a newly labeled pattern.

    The union of the stored training data and the new points is refit with
    K+1 components, starting from the existing components plus one component
    placed at the new points' mean/variance; component names are then
    reassigned from the responsibility-weighted labels.
    """
    new_X = np.atleast_2d(np.asarray(new_points, dtype=float))
    if new_X.shape[0] < 2:
        raise ValueError("need at least 2 points for a new component")
    if new_X.shape[1] != model.dim:
        raise ValueError(f"expected dimension {model.dim}, got {new_X.shape[1]}")
    old_X = np.asarray(training_points, dtype=float)
    union = np.vstack([old_X, new_X])
    labels = list(training_labels) + [label] * new_X.shape[0]
    frac_new = new_X.shape[0] / union.shape[0]
    weights = np.concatenate([model.weights * (1.0 - frac_new), [frac_new]])
    means = np.vstack([model.means, new_X.mean(axis=0)])
    variances = np.vstack(
        [model.variances, np.maximum(new_X.var(axis=0), cfg.variance_floor)]
    )
    init = GmmModel(weights, means, variances, cfg.variance_floor)
    fitted = em_fit(union, model.k + 1, cfg, init=init)
    return assign_component_labels(fitted, union, labels)
