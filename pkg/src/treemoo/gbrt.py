"""Gradient-boosted regression trees with native categorical splits.

Squared-error boosting with exact leaf means: each round fits a depth-limited
tree to the current residuals and contributes ``learning_rate * leaf mean``.
Leaf values are stored post-scaling, so a tree's leaf weight is the exact
additive contribution used both in prediction and in the mixed-integer
encoding.

Continuous split thresholds always sit at midpoints of adjacent observed
values; categorical splits order observed labels by mean residual and pick
the best prefix (Fisher grouping), which reduces the subset search to
K - 1 candidates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import CategoricalFeature, ContinuousFeature, DesignSpace, Point


@dataclass(frozen=True)
class GbrtConfig:
    """Boosting hyperparameters.

    ``max_bins`` caps the number of candidate thresholds per feature the
    split search may evaluate (histogram-style subsampling of midpoints);
    255 is effectively unbinned at desk scale. ``seed`` is recorded in run
    metadata; the trainer itself is deterministic and draws nothing.
    """

    num_trees: int = 400
    max_depth: int = 3
    min_data_per_leaf: int = 2
    learning_rate: float = 0.3
    max_bins: int = 255
    seed: int = 0

    def __post_init__(self):
        if self.num_trees < 1:
            raise ValueError("num_trees must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_data_per_leaf < 1:
            raise ValueError("min_data_per_leaf must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if self.max_bins < 2:
            raise ValueError("max_bins must be >= 2")


@dataclass(frozen=True)
class SplitNode:
    """Internal tree node: one split plus child node ids."""

    feature: int
    threshold: float | None  # continuous split: go left iff x <= threshold
    left_labels: frozenset[int] | None  # categorical split: go left iff label in set
    left: int
    right: int


@dataclass(frozen=True)
class Leaf:
    value: float


class Tree:
    """A single regression tree stored as a flat node list (root at 0)."""

    def __init__(self, nodes: Sequence[SplitNode | Leaf]):
        self.nodes = list(nodes)

    @property
    def n_splits(self) -> int:
        return sum(1 for n in self.nodes if isinstance(n, SplitNode))

    def leaves(self) -> list[int]:
        return [i for i, n in enumerate(self.nodes) if isinstance(n, Leaf)]

    def predict_row(self, row: np.ndarray) -> float:
        i = 0
        while True:
            node = self.nodes[i]
            if isinstance(node, Leaf):
                return node.value
            if node.threshold is not None:
                i = node.left if row[node.feature] <= node.threshold else node.right
            else:
                i = node.left if int(row[node.feature]) in node.left_labels else node.right


class TreeEnsemble:
    """Trained additive ensemble plus per-feature sorted threshold lists."""

    def __init__(self, space: DesignSpace, trees: list[Tree], base_score: float):
        self.space = space
        self.trees = trees
        self.base_score = float(base_score)
        self.thresholds: dict[int, np.ndarray] = collect_thresholds(space, trees)

    def predict_encoded(self, row: np.ndarray) -> float:
        value = self.base_score
        for tree in self.trees:
            value += tree.predict_row(row)
        return value

    def predict(self, point: Point) -> float:
        return self.predict_encoded(point.as_vector())

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        return np.array([self.predict_encoded(row) for row in X])

    def to_dict(self) -> dict:
        def node_dict(n):
            if isinstance(n, Leaf):
                return {"leaf": n.value}
            d = {"feature": n.feature, "left": n.left, "right": n.right}
            if n.threshold is not None:
                d["threshold"] = n.threshold
            else:
                d["left_labels"] = sorted(n.left_labels)
            return d

        return {
            "schema": "treemoo.ensemble/1",
            "base_score": self.base_score,
            "features": [
                {"name": f.name, "kind": "continuous", "lower": f.lower, "upper": f.upper}
                if f.is_continuous
                else {"name": f.name, "kind": "categorical", "labels": list(f.labels)}
                for f in self.space.features
            ],
            "trees": [[node_dict(n) for n in t.nodes] for t in self.trees],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "TreeEnsemble":
        feats = []
        for f in d["features"]:
            if f["kind"] == "continuous":
                feats.append(ContinuousFeature(f["name"], f["lower"], f["upper"]))
            else:
                feats.append(CategoricalFeature(f["name"], tuple(f["labels"])))
        space = DesignSpace(tuple(feats))
        trees = []
        for tnodes in d["trees"]:
            nodes: list[SplitNode | Leaf] = []
            for n in tnodes:
                if "leaf" in n:
                    nodes.append(Leaf(float(n["leaf"])))
                elif "threshold" in n:
                    nodes.append(
                        SplitNode(n["feature"], float(n["threshold"]), None, n["left"], n["right"])
                    )
                else:
                    nodes.append(
                        SplitNode(n["feature"], None, frozenset(n["left_labels"]), n["left"], n["right"])
                    )
            trees.append(Tree(nodes))
        return cls(space, trees, d["base_score"])

    @classmethod
    def from_json(cls, s: str) -> "TreeEnsemble":
        return cls.from_dict(json.loads(s))


def collect_thresholds(space: DesignSpace, trees: list[Tree]) -> dict[int, np.ndarray]:
    """Sorted unique threshold list per continuous feature, strictly inside bounds."""
    found: dict[int, set] = {i: set() for i in space.continuous_indices}
    for t in trees:
        for n in t.nodes:
            if isinstance(n, SplitNode) and n.threshold is not None:
                found[n.feature].add(float(n.threshold))
    out = {}
    for i, vals in found.items():
        arr = np.array(sorted(vals))
        f = space.features[i]
        if arr.size and (arr[0] <= f.lower or arr[-1] >= f.upper):
            raise ValueError(f"threshold outside the open bound interval of {f.name}")
        out[i] = arr
    return out


def _sse(total: float, total_sq: float, n: int) -> float:
    if n == 0:
        return 0.0
    return total_sq - total * total / n


def _continuous_candidates(xs: np.ndarray, rs: np.ndarray, min_leaf: int, max_bins: int):
    """Best (gain, threshold, left_mask) for one continuous feature, or None."""
    order = np.argsort(xs, kind="stable")
    x_sorted = xs[order]
    r_sorted = rs[order]
    n = len(xs)
    cut_positions = np.nonzero(x_sorted[1:] > x_sorted[:-1])[0] + 1  # split between k-1 and k
    cut_positions = cut_positions[(cut_positions >= min_leaf) & (cut_positions <= n - min_leaf)]
    if cut_positions.size == 0:
        return None
    if cut_positions.size > max_bins - 1:
        pick = np.unique(np.linspace(0, cut_positions.size - 1, max_bins - 1).round().astype(int))
        cut_positions = cut_positions[pick]
    csum = np.cumsum(r_sorted)
    csq = np.cumsum(r_sorted * r_sorted)
    total, total_sq = csum[-1], csq[-1]
    k = cut_positions
    sse_l = csq[k - 1] - csum[k - 1] ** 2 / k
    sse_r = (total_sq - csq[k - 1]) - (total - csum[k - 1]) ** 2 / (n - k)
    gains = _sse(total, total_sq, n) - sse_l - sse_r
    best = int(np.argmax(gains))  # cut_positions ascending: first max = lowest threshold
    gain = float(gains[best])
    kb = int(cut_positions[best])
    threshold = 0.5 * (x_sorted[kb - 1] + x_sorted[kb])
    return gain, threshold, xs <= threshold


def categorical_split_search(values: np.ndarray, residuals: np.ndarray, min_leaf: int = 1):
    """Best Fisher-prefix split for one categorical feature.

    Observed labels are sorted by mean residual (ties by label index) and the
    K-1 prefix splits are scored by squared-error reduction. Returns
    (gain, left_labels, left_mask) or None when no split with positive gain
    exists (single observed label, all residuals equal, or min_leaf binds).
    """
    values = np.asarray(values, dtype=int)
    residuals = np.asarray(residuals, dtype=float)
    k = int(values.max()) + 1 if values.size else 0
    counts = np.bincount(values, minlength=k)
    observed = np.nonzero(counts)[0]
    if observed.size < 2:
        return None
    sums = np.bincount(values, weights=residuals, minlength=k)
    sqs = np.bincount(values, weights=residuals * residuals, minlength=k)
    means = sums[observed] / counts[observed]
    fisher = observed[np.lexsort((observed, means))]
    c = counts[fisher].astype(float)
    s = sums[fisher]
    q = sqs[fisher]
    n = c.sum()
    total, total_sq = s.sum(), q.sum()
    cc, cs, cq = np.cumsum(c), np.cumsum(s), np.cumsum(q)
    best = None
    for j in range(len(fisher) - 1):
        nl = cc[j]
        if nl < min_leaf or n - nl < min_leaf:
            continue
        gain = _sse(total, total_sq, n) - _sse(cs[j], cq[j], nl) - _sse(
            total - cs[j], total_sq - cq[j], n - nl
        )
        if best is None or gain > best[0]:
            best = (float(gain), frozenset(int(x) for x in fisher[: j + 1]))
    if best is None or best[0] <= 0.0:
        return None
    gain, left_labels = best
    left_mask = np.isin(values, sorted(left_labels))
    return gain, left_labels, left_mask


class _Builder:
    def __init__(self, space: DesignSpace, X: np.ndarray, config: GbrtConfig):
        self.space = space
        self.X = X
        self.config = config
        self.nodes: list[SplitNode | Leaf] = []

    def _best_split(self, idx: np.ndarray, residuals: np.ndarray):
        cfg = self.config
        best = None  # (gain, feature, payload)
        for i, f in enumerate(self.space.features):
            col = self.X[idx, i]
            if f.is_continuous:
                cand = _continuous_candidates(col, residuals, cfg.min_data_per_leaf, cfg.max_bins)
                if cand is None:
                    continue
                gain, threshold, mask = cand
                if gain > 1e-12 and (best is None or gain > best[0] + 1e-15):
                    best = (gain, i, ("cont", threshold, mask))
            else:
                cand = categorical_split_search(col.astype(int), residuals, cfg.min_data_per_leaf)
                if cand is None:
                    continue
                gain, left_labels, mask = cand
                if gain > 1e-12 and (best is None or gain > best[0] + 1e-15):
                    best = (gain, i, ("cat", left_labels, mask))
        return best

    def grow(self, idx: np.ndarray, residuals: np.ndarray, depth: int) -> int:
        cfg = self.config
        node_id = len(self.nodes)
        self.nodes.append(Leaf(0.0))  # placeholder
        if depth >= cfg.max_depth or len(idx) < 2 * cfg.min_data_per_leaf:
            self.nodes[node_id] = Leaf(cfg.learning_rate * float(residuals.mean()))
            return node_id
        best = self._best_split(idx, residuals)
        if best is None:
            self.nodes[node_id] = Leaf(cfg.learning_rate * float(residuals.mean()))
            return node_id
        _, feature, payload = best
        kind, detail, mask = payload
        left = self.grow(idx[mask], residuals[mask], depth + 1)
        right = self.grow(idx[~mask], residuals[~mask], depth + 1)
        if kind == "cont":
            self.nodes[node_id] = SplitNode(feature, float(detail), None, left, right)
        else:
            self.nodes[node_id] = SplitNode(feature, None, detail, left, right)
        return node_id


def train(space: DesignSpace, X: np.ndarray, y: np.ndarray, config: GbrtConfig) -> TreeEnsemble:
    """Fit a boosted ensemble to one target column.

    Boosting stops early when a round finds no split with positive gain
    (residuals are then exactly reproducible by the current ensemble), so a
    constant target yields an ensemble of just the base score.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[1] != space.n:
        raise ValueError("X must be (|D|, n)")
    if len(y) != len(X) or len(y) == 0:
        raise ValueError("empty dataset or row mismatch")
    if not np.all(np.isfinite(y)):
        raise ValueError("targets must be finite")
    if len(X) < config.min_data_per_leaf:
        raise ValueError("fewer data points than min_data_per_leaf")

    base = float(y.mean())
    pred = np.full(len(y), base)
    trees: list[Tree] = []
    idx = np.arange(len(y))
    for _ in range(config.num_trees):
        residuals = y - pred
        builder = _Builder(space, X, config)
        builder.grow(idx, residuals, 0)
        tree = Tree(builder.nodes)
        if tree.n_splits == 0:
            # no split has positive gain; later rounds would see the same
            # residual structure, so boosting has converged
            break
        trees.append(tree)
        pred += np.array([tree.predict_row(row) for row in X])
    return TreeEnsemble(space, trees, base)


def training_curve(space: DesignSpace, X: np.ndarray, y: np.ndarray, config: GbrtConfig) -> np.ndarray:
    """Training MSE after each boosting round (round 0 = base score only)."""
    ensemble = train(space, X, y, config)
    pred = np.full(len(y), ensemble.base_score)
    mses = [float(np.mean((y - pred) ** 2))]
    for tree in ensemble.trees:
        pred += np.array([tree.predict_row(row) for row in np.asarray(X, dtype=float)])
        mses.append(float(np.mean((y - pred) ** 2)))
    return np.array(mses)


def tree_split_entries(tree: Tree):
    """(split node id, feature, threshold or label set, left leaf ids, right leaf ids).

    The leaf id lists are the leaves of the subtree under each branch; they
    drive the split ordering rows of the mixed-integer encoding.
    """
    leaves_under: dict[int, list[int]] = {}

    def walk(i: int) -> list[int]:
        node = tree.nodes[i]
        if isinstance(node, Leaf):
            leaves_under[i] = [i]
            return [i]
        got = walk(node.left) + walk(node.right)
        leaves_under[i] = got
        return got

    walk(0)
    entries = []
    for i, node in enumerate(tree.nodes):
        if isinstance(node, SplitNode):
            entries.append(
                (
                    i,
                    node.feature,
                    node.threshold if node.threshold is not None else node.left_labels,
                    leaves_under[node.left],
                    leaves_under[node.right],
                )
            )
    return entries
