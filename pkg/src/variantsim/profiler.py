"""Execution-time estimation from trace features.

Fits a single CART regression tree: greedy variance-reduction splits over
numeric thresholds and one-vs-rest category subsets, leaf predictions are the
mean training duration. Model quality is scored with R-squared and per-feature
importances come from the summed squared-error reduction each feature
contributed, normalized to one.

Datasets mix categorical features (algorithm, data-asset id) with numeric
ones (parameter values, machine-load samples) and are stored as CSV with a
"name:kind" schema header; kind "target" marks the duration column.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

KIND_NUMERIC = "numeric"
KIND_CATEGORICAL = "categorical"
KIND_TARGET = "target"


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str


@dataclass(frozen=True)
class ProfileDataset:
    """Feature columns plus the duration target, with a fixed schema."""

    schema: tuple[ColumnSpec, ...]
    features: Mapping[str, np.ndarray]  # numeric: float64; categorical: str
    target_us: np.ndarray
    target_name: str = "duration_us"

    @property
    def n(self) -> int:
        return len(self.target_us)

    def kind_of(self, name: str) -> str:
        for col in self.schema:
            if col.name == name:
                return col.kind
        raise KeyError(name)

    def subset(self, indices: np.ndarray) -> "ProfileDataset":
        return ProfileDataset(
            schema=self.schema,
            features={k: v[indices] for k, v in self.features.items()},
            target_us=self.target_us[indices],
            target_name=self.target_name,
        )


def make_dataset(
    features: Mapping[str, Sequence],
    target_us: Sequence[float],
    kinds: Mapping[str, str] | None = None,
    target_name: str = "duration_us",
) -> ProfileDataset:
    """Assemble a dataset; column kinds are inferred unless given explicitly."""
    target = np.asarray(target_us, dtype=float)
    if not np.all(np.isfinite(target)):
        raise ValueError("target contains non-finite values")
    schema = []
    cols: dict[str, np.ndarray] = {}
    for name, values in features.items():
        seq = list(values)
        if len(seq) != len(target):
            raise ValueError(f"feature {name!r} length differs from target")
        kind = (kinds or {}).get(name)
        if kind is None:
            numeric = all(
                isinstance(v, (int, float, np.integer, np.floating))
                and not isinstance(v, bool)
                for v in seq
            )
            kind = KIND_NUMERIC if numeric else KIND_CATEGORICAL
        if kind == KIND_NUMERIC:
            arr = np.asarray(seq, dtype=float)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"feature {name!r} contains non-finite values")
            cols[name] = arr
        elif kind == KIND_CATEGORICAL:
            cols[name] = np.asarray([str(v) for v in seq], dtype=object)
        else:
            raise ValueError(f"unknown kind {kind!r} for feature {name!r}")
        schema.append(ColumnSpec(name, kind))
    return ProfileDataset(
        schema=tuple(schema), features=cols, target_us=target, target_name=target_name
    )


@dataclass(frozen=True)
class Hyperparams:
    max_depth: int = 6
    min_samples_leaf: int = 1

    def __post_init__(self) -> None:
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


@dataclass(frozen=True)
class TreeNode:
    """Internal split or leaf; leaves have feature None."""

    n: int
    value: float
    feature: str | None = None
    threshold: float | None = None  # numeric split: go left when <=
    left_labels: frozenset = frozenset()  # categorical split: go left when in
    right_labels: frozenset = frozenset()
    gain: float = 0.0  # squared-error reduction achieved by the split
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass(frozen=True)
class RegressionTreeModel:
    root: TreeNode
    hyperparams: Hyperparams
    schema: tuple[ColumnSpec, ...]
    n_training_rows: int
    target_min_us: float
    target_max_us: float

    def depth(self) -> int:
        def walk(node: TreeNode) -> int:
            if node.is_leaf:
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(self.root)


def _sse(y: np.ndarray) -> float:
    if len(y) == 0:
        return 0.0
    return float(np.sum((y - y.mean()) ** 2))


def _numeric_candidates(values: np.ndarray, y: np.ndarray, min_leaf: int):
    """Best (gain, threshold) over all boundaries of the sorted feature."""
    order = np.argsort(values, kind="stable")
    v = values[order]
    ys = y[order]
    n = len(ys)
    total = ys.sum()
    sse_parent = float(np.sum((ys - total / n) ** 2))

    prefix = np.cumsum(ys)
    prefix_sq = np.cumsum(ys * ys)
    ks = np.arange(1, n)
    valid = (v[1:] != v[:-1]) & (ks >= min_leaf) & (n - ks >= min_leaf)
    if not np.any(valid):
        return None
    left_n = ks[valid]
    left_sum = prefix[:-1][valid]
    left_sq = prefix_sq[:-1][valid]
    right_n = n - left_n
    right_sum = total - left_sum
    right_sq = prefix_sq[-1] - left_sq
    sse_children = (left_sq - left_sum**2 / left_n) + (right_sq - right_sum**2 / right_n)
    gains = sse_parent - sse_children
    best = int(np.argmax(gains))
    k = int(left_n[best])
    threshold = (v[k - 1] + v[k]) / 2.0
    return float(gains[best]), threshold


def _categorical_candidates(values: np.ndarray, y: np.ndarray, min_leaf: int):
    """Best one-vs-rest category split: (gain, label, labels_present)."""
    labels = sorted(set(values.tolist()))
    if len(labels) < 2:
        return None
    sse_parent = _sse(y)
    best = None
    for label in labels:
        mask = values == label
        nl = int(mask.sum())
        nr = len(y) - nl
        if nl < min_leaf or nr < min_leaf:
            continue
        gain = sse_parent - _sse(y[mask]) - _sse(y[~mask])
        if best is None or gain > best[0]:
            best = (float(gain), label, labels)
    return best


def fit(
    dataset: ProfileDataset,
    hyperparams: Hyperparams = Hyperparams(),
    seed: int = 0,
) -> RegressionTreeModel:
    """Grow a CART tree by greedy variance reduction.

    Splitting stops at max_depth, when min_samples_leaf cannot be honored,
    or when the node target is constant. The tree is a deterministic
    function of (dataset, hyperparams, seed); the seed only breaks exact
    ties between equally good splits.
    """
    if dataset.n < 2 * hyperparams.min_samples_leaf:
        raise ValueError("dataset too small for the requested min_samples_leaf")
    rng = np.random.default_rng(seed)
    feature_names = [c.name for c in dataset.schema]

    def grow(indices: np.ndarray, depth: int) -> TreeNode:
        y = dataset.target_us[indices]
        node_value = float(y.mean())
        n = len(indices)
        if (
            depth >= hyperparams.max_depth
            or n < 2 * hyperparams.min_samples_leaf
            or _sse(y) <= 1e-12
        ):
            return TreeNode(n=n, value=node_value)

        candidates = []
        for name in feature_names:
            column = dataset.features[name][indices]
            if dataset.kind_of(name) == KIND_NUMERIC:
                found = _numeric_candidates(column, y, hyperparams.min_samples_leaf)
                if found is not None and found[0] > 0:
                    candidates.append((found[0], name, "numeric", found[1]))
            else:
                found = _categorical_candidates(column, y, hyperparams.min_samples_leaf)
                if found is not None and found[0] > 0:
                    candidates.append((found[0], name, "categorical", found[1:]))
        if not candidates:
            return TreeNode(n=n, value=node_value)

        best_gain = max(c[0] for c in candidates)
        tied = [c for c in candidates if c[0] == best_gain]
        chosen = tied[0] if len(tied) == 1 else tied[int(rng.integers(len(tied)))]
        gain, name, kind, payload = chosen
        column = dataset.features[name][indices]
        if kind == "numeric":
            threshold = payload
            mask = column <= threshold
            left = grow(indices[mask], depth + 1)
            right = grow(indices[~mask], depth + 1)
            return TreeNode(
                n=n,
                value=node_value,
                feature=name,
                threshold=threshold,
                gain=gain,
                left=left,
                right=right,
            )
        label, labels = payload
        mask = column == label
        left = grow(indices[mask], depth + 1)
        right = grow(indices[~mask], depth + 1)
        return TreeNode(
            n=n,
            value=node_value,
            feature=name,
            left_labels=frozenset([label]),
            right_labels=frozenset(labels) - {label},
            gain=gain,
            left=left,
            right=right,
        )

    root = grow(np.arange(dataset.n), 0)
    return RegressionTreeModel(
        root=root,
        hyperparams=hyperparams,
        schema=dataset.schema,
        n_training_rows=dataset.n,
        target_min_us=float(dataset.target_us.min()),
        target_max_us=float(dataset.target_us.max()),
    )


def predict_one(model: RegressionTreeModel, features: Mapping[str, object]) -> float:
    """Predicted duration for one feature vector.

    A category never seen on a split routes to the child that held more
    training rows (ties go left).
    """
    for col in model.schema:
        if col.name not in features:
            raise ValueError(f"missing feature {col.name!r}")
    node = model.root
    while not node.is_leaf:
        value = features[node.feature]
        if node.threshold is not None:
            if not isinstance(value, (int, float, np.integer, np.floating)) or isinstance(value, bool):
                raise ValueError(f"feature {node.feature!r} must be numeric")
            node = node.left if value <= node.threshold else node.right
        else:
            label = str(value)
            if label in node.left_labels:
                node = node.left
            elif label in node.right_labels:
                node = node.right
            else:
                node = node.left if node.left.n >= node.right.n else node.right
    return node.value


def predict(model: RegressionTreeModel, dataset: ProfileDataset) -> np.ndarray:
    """Vector of predictions for every row of the dataset."""
    names = [c.name for c in model.schema]
    out = np.empty(dataset.n)
    for i in range(dataset.n):
        out[i] = predict_one(model, {n: dataset.features[n][i] for n in names})
    return out


def r2_score(predicted: Sequence[float], actual: Sequence[float]) -> float:
    """1 - SS_res/SS_tot about the mean of actual; NaN for a constant actual."""
    p = np.asarray(predicted, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or p.ndim != 1:
        raise ValueError("series must be one-dimensional and of equal length")
    if len(a) < 2:
        raise ValueError("need at least two observations")
    ss_tot = float(np.sum((a - a.mean()) ** 2))
    if ss_tot == 0.0:
        return float("nan")
    ss_res = float(np.sum((a - p) ** 2))
    return 1.0 - ss_res / ss_tot


def feature_importance(model: RegressionTreeModel) -> list[tuple[str, float]]:
    """Features ranked by normalized squared-error reduction.

    Every schema feature appears (unused ones at 0) except for a single-leaf
    model, which has no splits to attribute and yields an empty ranking.
    """
    totals = {c.name: 0.0 for c in model.schema}

    def walk(node: TreeNode) -> None:
        if node.is_leaf:
            return
        totals[node.feature] += node.gain
        walk(node.left)
        walk(node.right)

    walk(model.root)
    grand = sum(totals.values())
    if grand == 0.0:
        return []
    ranked = [(name, value / grand) for name, value in totals.items()]
    ranked.sort(key=lambda item: (-item[1], item[0]))
    return ranked


@dataclass(frozen=True)
class EvaluationResult:
    model: RegressionTreeModel
    train_r2: float
    test_r2: float
    importance: tuple[tuple[str, float], ...]


def train_test_evaluate(
    dataset: ProfileDataset,
    split_fraction: float,
    hyperparams: Hyperparams = Hyperparams(),
    seed: int = 0,
) -> EvaluationResult:
    """Seeded shuffle split (split_fraction goes to training), fit, score both."""
    if not 0 < split_fraction < 1:
        raise ValueError("split_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(dataset.n)
    n_train = round(dataset.n * split_fraction)
    train_idx, test_idx = perm[:n_train], perm[n_train:]
    if len(train_idx) < max(2, 2 * hyperparams.min_samples_leaf) or len(test_idx) < 2:
        raise ValueError("degenerate split: too few rows on one side")
    train = dataset.subset(train_idx)
    test = dataset.subset(test_idx)
    model = fit(train, hyperparams, seed)
    return EvaluationResult(
        model=model,
        train_r2=r2_score(predict(model, train), train.target_us),
        test_r2=r2_score(predict(model, test), test.target_us),
        importance=tuple(feature_importance(model)),
    )


def write_dataset_csv(dataset: ProfileDataset, destination) -> int:
    """CSV with a name:kind schema header; the target column is kind target."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = [c.name for c in dataset.schema]
    header = [f"{c.name}:{c.kind}" for c in dataset.schema]
    header.append(f"{dataset.target_name}:{KIND_TARGET}")
    writer.writerow(header)
    for i in range(dataset.n):
        row = []
        for col in dataset.schema:
            v = dataset.features[col.name][i]
            row.append(f"{float(v):.6g}" if col.kind == KIND_NUMERIC else str(v))
        row.append(f"{float(dataset.target_us[i]):.6g}")
        writer.writerow(row)
    text = buf.getvalue()
    if hasattr(destination, "write"):
        destination.write(text)
        return len(text.encode("utf-8"))
    try:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {destination}: {exc}") from exc
    return len(text.encode("utf-8"))


def read_dataset_csv(path) -> ProfileDataset:
    """Inverse of write_dataset_csv."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValueError(f"{path}: empty dataset") from None
            rows = list(reader)
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc

    specs = []
    for cell in header:
        name, sep, kind = cell.rpartition(":")
        if not sep:
            raise ValueError(f"{path}: header cell {cell!r} lacks a :kind suffix")
        specs.append(ColumnSpec(name, kind))
    targets = [c for c in specs if c.kind == KIND_TARGET]
    if len(targets) != 1:
        raise ValueError(f"{path}: exactly one target column required")
    target_name = targets[0].name

    columns: dict[str, list] = {c.name: [] for c in specs}
    for row in rows:
        if len(row) != len(specs):
            raise ValueError(f"{path}: row width {len(row)} != header width {len(specs)}")
        for spec, cell in zip(specs, row):
            columns[spec.name].append(cell)

    features = {}
    kinds = {}
    for spec in specs:
        if spec.kind == KIND_TARGET:
            continue
        kinds[spec.name] = spec.kind
        if spec.kind == KIND_NUMERIC:
            features[spec.name] = [float(v) for v in columns[spec.name]]
        else:
            features[spec.name] = columns[spec.name]
    target = [float(v) for v in columns[target_name]]
    return make_dataset(features, target, kinds=kinds, target_name=target_name)
