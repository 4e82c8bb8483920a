"""Dataset parsing, min-max normalization, and split management.

Datasets arrive as sparse text lines "<label> <idx>:<val> ...", 1-based
feature indices, strictly increasing within a line.  Parsing densifies into
an (n, d) matrix with absent entries 0, where d is the largest index seen.
Normalization maps every training feature affinely onto [0, 1] (constant
columns to 0) and clips test data into [0, 1] with the training min/max.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Dataset",
    "parse_libsvm",
    "load_libsvm",
    "write_libsvm",
    "load_pair",
    "map_binary_labels",
    "normalize_minmax",
    "kfold_split",
]


@dataclass
class Dataset:
    """Row-major samples with labels and (post-normalization) range metadata."""

    X: np.ndarray
    y: np.ndarray
    name: str = ""
    feature_min: np.ndarray | None = field(default=None, repr=False)
    feature_max: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]


def parse_libsvm(lines) -> tuple[np.ndarray, np.ndarray]:
    """Parse an iterable of libsvm-format lines into (X, y).

    Raises ValueError with the 1-based line number for malformed lines and
    for feature indices that are not strictly increasing.
    """
    labels = []
    rows = []  # list of (indices, values)
    max_index = 0
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        try:
            labels.append(float(tokens[0]))
        except ValueError:
            raise ValueError(f"line {lineno}: bad label {tokens[0]!r}") from None
        idxs = []
        vals = []
        prev = 0
        for tok in tokens[1:]:
            try:
                idx_str, val_str = tok.split(":", 1)
                idx = int(idx_str)
                val = float(val_str)
            except ValueError:
                raise ValueError(f"line {lineno}: bad feature token {tok!r}") from None
            if idx < 1:
                raise ValueError(f"line {lineno}: feature index {idx} < 1")
            if idx <= prev:
                raise ValueError(
                    f"line {lineno}: feature index {idx} not strictly increasing"
                )
            prev = idx
            idxs.append(idx)
            vals.append(val)
        max_index = max(max_index, prev)
        rows.append((idxs, vals))

    X = np.zeros((len(rows), max_index))
    for i, (idxs, vals) in enumerate(rows):
        if idxs:
            X[i, np.asarray(idxs) - 1] = vals
    y = np.asarray(labels)
    if y.size and np.all(y == np.round(y)):
        y = y.astype(int)
    return X, y


def load_libsvm(path, name: str = "") -> Dataset:
    with open(path) as fh:
        X, y = parse_libsvm(fh)
    return Dataset(X=X, y=y, name=name or str(path))


def write_libsvm(X, y, path) -> None:
    """Write (X, y) in libsvm format; zero entries are omitted."""
    X = np.asarray(X)
    y = np.asarray(y)
    with open(path, "w") as fh:
        for row, label in zip(X, y):
            lab = int(label) if float(label).is_integer() else float(label)
            feats = " ".join(
                f"{j + 1}:{row[j]:.17g}" for j in np.nonzero(row)[0]
            )
            fh.write(f"{lab} {feats}".rstrip() + "\n")


def _pad_to(X, d):
    if X.shape[1] == d:
        return X
    out = np.zeros((X.shape[0], d))
    out[:, : X.shape[1]] = X
    return out


def load_pair(train_path, test_path, name: str = "") -> tuple[Dataset, Dataset]:
    """Load a train/test pair with dimensionality aligned to the max index
    across both files, and binary labels mapped to {-1, +1}."""
    train = load_libsvm(train_path, name=name or "train")
    test = load_libsvm(test_path, name=name or "test")
    d = max(train.dim, test.dim)
    train.X = _pad_to(train.X, d)
    test.X = _pad_to(test.X, d)
    classes = np.unique(train.y)
    if classes.size == 2:
        train.y = map_binary_labels(train.y, classes)
        test.y = map_binary_labels(test.y, classes)
    return train, test


def map_binary_labels(y, classes=None) -> np.ndarray:
    """Map a two-valued label set onto {-1, +1} (smaller value -> -1)."""
    y = np.asarray(y)
    if classes is None:
        classes = np.unique(y)
    if classes.size != 2:
        raise ValueError(f"expected 2 classes, got {classes.size}")
    if not np.all(np.isin(y, classes)):
        raise ValueError("labels outside the training class set")
    return np.where(y == classes[0], -1, 1)


def normalize_minmax(train: Dataset, test: Dataset) -> tuple[Dataset, Dataset]:
    """Affine per-feature map from the training min/max onto [0, 1].

    Constant training columns become identically 0; test values are clipped
    into [0, 1].  Both returned datasets carry the training min/max.
    """
    if train.dim != test.dim:
        raise ValueError(f"dimension mismatch: {train.dim} vs {test.dim}")
    lo = train.X.min(axis=0)
    hi = train.X.max(axis=0)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)

    def apply(X, clip):
        out = (X - lo) / safe
        out[:, span == 0] = 0.0
        if clip:
            out = np.clip(out, 0.0, 1.0)
        return out

    return (
        Dataset(apply(train.X, False), train.y.copy(), train.name, lo.copy(), hi.copy()),
        Dataset(apply(test.X, True), test.y.copy(), test.name, lo.copy(), hi.copy()),
    )


def kfold_split(n: int, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic shuffled k-fold partition of range(n).

    Returns k (train_indices, validation_indices) pairs; fold sizes differ
    by at most one and the validation folds partition range(n).
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    folds = np.array_split(perm, k)
    out = []
    for i in range(k):
        val = np.sort(folds[i])
        train = np.sort(np.concatenate([folds[j] for j in range(k) if j != i]))
        out.append((train, val))
    return out
