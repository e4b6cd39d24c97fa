"""Dataset ingestion: LIBSVM text, IDX binary, splits and synthetic data.

No downloading happens here; loaders read local files (optionally
gzip-compressed).  Datasets are value objects: loaders return fresh instances
and never mutate existing ones.
"""
from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


class LibsvmParseError(ValueError):
    """Malformed LIBSVM text; the message carries the offending line number."""


class IdxFormatError(ValueError):
    """Bad magic number or truncated IDX stream."""


@dataclass(frozen=True)
class Dataset:
    """Sparse feature rows with integer labels and a train/test partition."""

    features: sp.csr_matrix
    labels: np.ndarray
    train_idx: np.ndarray = field(default=None)
    test_idx: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.train_idx is None:
            object.__setattr__(self, "train_idx", np.arange(self.n))
        if self.test_idx is None:
            object.__setattr__(self, "test_idx", np.empty(0, dtype=int))
        self.labels.setflags(write=False)
        self.train_idx.setflags(write=False)
        self.test_idx.setflags(write=False)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def n_train(self) -> int:
        return len(self.train_idx)

    @property
    def n_test(self) -> int:
        return len(self.test_idx)

    @property
    def train_features(self) -> sp.csr_matrix:
        return self.features[self.train_idx]

    @property
    def train_labels(self) -> np.ndarray:
        return self.labels[self.train_idx]

    @property
    def test_features(self) -> sp.csr_matrix:
        return self.features[self.test_idx]

    @property
    def test_labels(self) -> np.ndarray:
        return self.labels[self.test_idx]


def _open_text(source):
    """Text handle from a path (gzip-aware) or an open stream."""
    if hasattr(source, "read"):
        return source, False
    path = str(source)
    if path.endswith(".gz"):
        return gzip.open(path, "rt"), True
    return open(path, "r"), True


def _open_binary(source):
    if hasattr(source, "read"):
        return source, False
    path = str(source)
    if path.endswith(".gz"):
        return gzip.open(path, "rb"), True
    return open(path, "rb"), True


def parse_libsvm(source, n_features: int | None = None) -> Dataset:
    """Parse LIBSVM text: one ``label idx:val idx:val ...`` row per line.

    Indices are 1-based and strictly increasing within a row; they are mapped
    to 0-based columns.  The feature count is the largest index seen unless
    ``n_features`` overrides it (it may only extend, never truncate).
    Anything outside plain text of this grammar raises
    :class:`LibsvmParseError` with the line number.
    """
    fh, close = _open_text(source)
    data, indices, indptr, labels = [], [], [0], []
    max_index = 0
    try:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            tokens = line.split()
            try:
                label = int(float(tokens[0]))
                if float(tokens[0]) != label:
                    raise ValueError
            except ValueError:
                raise LibsvmParseError(
                    f"line {lineno}: label {tokens[0]!r} is not an integer"
                ) from None
            labels.append(label)
            prev = 0
            for token in tokens[1:]:
                parts = token.split(":")
                if len(parts) != 2:
                    raise LibsvmParseError(f"line {lineno}: malformed entry {token!r}")
                try:
                    idx = int(parts[0])
                    val = float(parts[1])
                except ValueError:
                    raise LibsvmParseError(
                        f"line {lineno}: malformed entry {token!r}"
                    ) from None
                if idx <= prev:
                    raise LibsvmParseError(
                        f"line {lineno}: index {idx} not strictly increasing"
                    )
                prev = idx
                indices.append(idx - 1)
                data.append(val)
            indptr.append(len(data))
            max_index = max(max_index, prev)
    finally:
        if close:
            fh.close()

    d = max_index if n_features is None else int(n_features)
    if d < max_index:
        raise LibsvmParseError(
            f"n_features={d} is smaller than the largest observed index {max_index}"
        )
    features = sp.csr_matrix(
        (np.array(data), np.array(indices, dtype=int), np.array(indptr, dtype=int)),
        shape=(len(labels), d),
    )
    return Dataset(features=features, labels=np.array(labels, dtype=int))


def dump_libsvm(features, labels, target) -> None:
    """Write rows in LIBSVM text form (1-based indices, ``%.17g`` values)."""
    x = features.tocsr() if sp.issparse(features) else sp.csr_matrix(np.asarray(features))
    fh, close = (target, False) if hasattr(target, "write") else (open(target, "w"), True)
    try:
        for i, label in enumerate(np.asarray(labels)):
            row = x.getrow(i)
            entries = " ".join(
                f"{j + 1}:{v:.17g}" for j, v in zip(row.indices, row.data)
            )
            fh.write(f"{int(label)} {entries}".rstrip() + "\n")
    finally:
        if close:
            fh.close()


def _read_exact(fh, count: int, what: str) -> bytes:
    buf = fh.read(count)
    if len(buf) != count:
        raise IdxFormatError(f"truncated IDX stream while reading {what}")
    return buf


def load_idx(images_source, labels_source, mapping: str = "digits") -> Dataset:
    """Load an IDX image/label file pair (the MNIST container format).

    Pixel bytes are scaled to [0, 1].  ``mapping="digits"`` keeps the class
    indices; ``mapping="odd_even"`` maps digit parity to labels -1 (even) and
    +1 (odd).
    """
    if mapping not in ("digits", "odd_even"):
        raise ValueError(f"unknown label mapping {mapping!r}")

    fh, close = _open_binary(images_source)
    try:
        magic, n, rows, cols = struct.unpack(">IIII", _read_exact(fh, 16, "image header"))
        if magic != IDX_IMAGES_MAGIC:
            raise IdxFormatError(f"bad image magic 0x{magic:08x}")
        pixels = np.frombuffer(
            _read_exact(fh, n * rows * cols, "pixels"), dtype=np.uint8
        )
    finally:
        if close:
            fh.close()

    fh, close = _open_binary(labels_source)
    try:
        magic, n_labels = struct.unpack(">II", _read_exact(fh, 8, "label header"))
        if magic != IDX_LABELS_MAGIC:
            raise IdxFormatError(f"bad label magic 0x{magic:08x}")
        digits = np.frombuffer(_read_exact(fh, n_labels, "labels"), dtype=np.uint8)
    finally:
        if close:
            fh.close()

    if n != n_labels:
        raise IdxFormatError(f"image count {n} does not match label count {n_labels}")

    features = sp.csr_matrix(pixels.reshape(n, rows * cols).astype(float) / 255.0)
    if mapping == "odd_even":
        labels = np.where(digits % 2 == 1, 1, -1)
    else:
        labels = digits.astype(int)
    return Dataset(features=features, labels=labels)


def random_split(dataset: Dataset, test_fraction: float = 0.1, seed: int = 0) -> Dataset:
    """Partition rows into ceil(test_fraction * n) test and the rest train."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(dataset.n)
    n_test = int(np.ceil(test_fraction * dataset.n))
    return replace(
        dataset,
        train_idx=np.sort(perm[n_test:]),
        test_idx=np.sort(perm[:n_test]),
    )


def synth_logistic(n: int, d: int, seed: int = 0) -> Dataset:
    """Synthetic binary classification from a planted logistic model.

    Gaussian features, Gaussian planted weights, labels drawn from the
    logistic likelihood.  Uses numpy's PCG64 generator so equal arguments
    reproduce identical bytes.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, d))
    planted = rng.standard_normal(d)
    prob_pos = expit(z @ planted)
    labels = np.where(rng.random(n) < prob_pos, 1, -1)
    return Dataset(features=sp.csr_matrix(z), labels=labels)


def scale_features_maxabs(dataset: Dataset) -> Dataset:
    """Scale each feature column by its maximum absolute value (opt-in)."""
    x = dataset.features.tocsc(copy=True)
    scale = np.maximum(np.abs(x).max(axis=0).toarray().ravel(), 1e-300)
    x = x.multiply(1.0 / scale).tocsr()
    return replace(dataset, features=sp.csr_matrix(x))
