"""Finite-sum objective families with analytic gradients and HVPs.

All objectives are means over the selected sample, ``F_S(x) = (1/|S|)
sum_{i in S} f_i(x)``, evaluated through a common interface so the optimizers
never see the concrete family.  ``sample=None`` selects the full data set
(avoiding a row-slice copy and keeping full-set evaluations bit-identical
regardless of the calling path).
"""
from __future__ import annotations

import hashlib

import numpy as np
import scipy.sparse as sp
from scipy.special import expit, logsumexp

from .trs import NumericsError


class FiniteSumObjective:
    """Interface for sampled evaluation of ``F(x) = (1/n) sum_i f_i(x)``.

    Concrete problems provide ``n``, ``dim``, ``value``, ``gradient`` and
    ``hvp``; ``value_full`` is always the full-set value.
    """

    n: int
    dim: int

    def value(self, x: np.ndarray, sample=None) -> float:
        raise NotImplementedError

    def gradient(self, x: np.ndarray, sample=None) -> np.ndarray:
        raise NotImplementedError

    def hvp(self, x: np.ndarray, sample, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hvp_operator(self, x: np.ndarray, sample):
        """``v -> hvp(x, sample, v)`` with anchor-dependent work done once.

        Subclasses override this to prefactor quantities that depend only on
        ``x`` and the sample, which matters when CG applies the operator many
        times at the same anchor.
        """
        return lambda v: self.hvp(x, sample, v)

    def value_full(self, x: np.ndarray) -> float:
        return self.value(x, None)

    def fingerprint(self) -> str:
        raise NotImplementedError


def _hash_parts(*parts) -> str:
    h = hashlib.sha256()
    for part in parts:
        if isinstance(part, np.ndarray):
            h.update(np.ascontiguousarray(part).tobytes())
        else:
            h.update(str(part).encode())
    return h.hexdigest()


def labels_to_pm1(labels) -> np.ndarray:
    """Map {0,1} or {-1,+1} labels to {-1,+1} floats."""
    y = np.asarray(labels, dtype=float)
    vals = set(np.unique(y).tolist())
    if vals <= {-1.0, 1.0}:
        return y
    if vals <= {0.0, 1.0}:
        return 2.0 * y - 1.0
    raise ValueError(f"cannot map labels with values {sorted(vals)} to -1/+1")


def labels_to_01(labels) -> np.ndarray:
    """Map {-1,+1} or {0,1} labels to {0,1} floats."""
    y = np.asarray(labels, dtype=float)
    vals = set(np.unique(y).tolist())
    if vals <= {0.0, 1.0}:
        return y
    if vals <= {-1.0, 1.0}:
        return (y + 1.0) / 2.0
    raise ValueError(f"cannot map labels with values {sorted(vals)} to 0/1")


#: Below this sample size, row gathers beat scipy's submatrix slicing.
_SMALL_SAMPLE = 32


class _LinearModelProblem(FiniteSumObjective):
    """Shared machinery for problems of the form f_i(x) = loss(y_i, x.z_i).

    Margins ``Z_S x`` and weighted row sums ``Z_S^T c`` go through scipy for
    large samples and through direct CSR-array gathers for small ones (the
    hot path of single-point SGD/SVRG steps).
    """

    def __init__(self, features, labels):
        if sp.issparse(features):
            self.features = features.tocsr()
        else:
            self.features = sp.csr_matrix(np.asarray(features, dtype=float))
        self.labels = np.asarray(labels, dtype=float)
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("feature rows and labels disagree in length")
        self.n = self.features.shape[0]
        self.dim = self.features.shape[1]

    def _sample_labels(self, sample):
        return self.labels if sample is None else self.labels[sample]

    def _margins(self, x, sample):
        """Z_S @ x."""
        if sample is None:
            return self.features @ x
        if len(sample) > _SMALL_SAMPLE:
            return self.features[sample] @ x
        a = self.features
        out = np.empty(len(sample))
        for k, i in enumerate(sample):
            lo, hi = a.indptr[i], a.indptr[i + 1]
            out[k] = np.dot(a.data[lo:hi], x[a.indices[lo:hi]])
        return out

    def _row_combination(self, coeff, sample):
        """Z_S^T @ coeff as a dense vector."""
        if sample is None:
            return np.asarray(self.features.T @ coeff)
        if len(sample) > _SMALL_SAMPLE:
            return np.asarray(self.features[sample].T @ coeff)
        a = self.features
        out = np.zeros(self.dim)
        for k, i in enumerate(sample):
            lo, hi = a.indptr[i], a.indptr[i + 1]
            out[a.indices[lo:hi]] += coeff[k] * a.data[lo:hi]
        return out


class LogisticRegressionProblem(_LinearModelProblem):
    """L2-regularized logistic regression with labels in {-1,+1}.

    Per-point loss ``log(1 + exp(-y_i x.z_i)) + lam * ||x||^2``; with
    ``lam = 1/n`` (the default) the objective is strongly convex.
    """

    def __init__(self, features, labels, lam: float | None = None):
        super().__init__(features, labels)
        if not set(np.unique(self.labels).tolist()) <= {-1.0, 1.0}:
            raise ValueError("logistic regression expects -1/+1 labels")
        self.lam = 1.0 / self.n if lam is None else float(lam)

    def value(self, x, sample=None):
        y = self._sample_labels(sample)
        margins = y * self._margins(x, sample)
        # log(1 + exp(-m)) via logaddexp: stable for large |m|
        return float(np.mean(np.logaddexp(0.0, -margins)) + self.lam * (x @ x))

    def gradient(self, x, sample=None):
        y = self._sample_labels(sample)
        margins = y * self._margins(x, sample)
        coeff = -y * expit(-margins) / len(y)
        return self._row_combination(coeff, sample) + 2.0 * self.lam * x

    def hvp(self, x, sample, v):
        y = self._sample_labels(sample)
        sig = expit(self._margins(x, sample))
        w = sig * (1.0 - sig) / len(y)
        return self._row_combination(w * self._margins(v, sample), sample) + 2.0 * self.lam * v

    def hvp_operator(self, x, sample):
        y = self._sample_labels(sample)
        sig = expit(self._margins(x, sample))
        w = sig * (1.0 - sig) / len(y)
        if sample is None or len(sample) > _SMALL_SAMPLE:
            z = self.features if sample is None else self.features[sample]
            return lambda v: np.asarray(z.T @ (w * (z @ v))) + 2.0 * self.lam * v
        return lambda v: (
            self._row_combination(w * self._margins(v, sample), sample)
            + 2.0 * self.lam * v
        )

    def accuracy(self, x, features, labels) -> float:
        z = features.tocsr() if sp.issparse(features) else sp.csr_matrix(np.asarray(features, float))
        preds = np.where(z @ x >= 0.0, 1.0, -1.0)
        return float(np.mean(preds == np.asarray(labels, float)))

    def fingerprint(self) -> str:
        return _hash_parts(
            "logistic", self.lam, self.labels,
            self.features.data, self.features.indices, self.features.indptr,
        )


class SigmoidLeastSquaresProblem(_LinearModelProblem):
    """Nonconvex least squares ``(y_i - sigmoid(x.z_i))^2`` with y in {0,1}."""

    def __init__(self, features, labels):
        super().__init__(features, labels)
        if not set(np.unique(self.labels).tolist()) <= {0.0, 1.0}:
            raise ValueError("sigmoid least squares expects 0/1 labels")

    def value(self, x, sample=None):
        y = self._sample_labels(sample)
        p = expit(self._margins(x, sample))
        return float(np.mean((y - p) ** 2))

    def gradient(self, x, sample=None):
        y = self._sample_labels(sample)
        p = expit(self._margins(x, sample))
        dloss = -2.0 * (y - p) * p * (1.0 - p) / len(y)
        return self._row_combination(dloss, sample)

    def _curvature_weights(self, x, sample):
        y = self._sample_labels(sample)
        p = expit(self._margins(x, sample))
        pp = p * (1.0 - p)
        # d2/dt2 of (y - sigmoid(t))^2; indefinite in general
        return (2.0 * pp * pp - 2.0 * (y - p) * pp * (1.0 - 2.0 * p)) / len(y)

    def hvp(self, x, sample, v):
        d2loss = self._curvature_weights(x, sample)
        return self._row_combination(d2loss * self._margins(v, sample), sample)

    def hvp_operator(self, x, sample):
        d2loss = self._curvature_weights(x, sample)
        if sample is None or len(sample) > _SMALL_SAMPLE:
            z = self.features if sample is None else self.features[sample]
            return lambda v: np.asarray(z.T @ (d2loss * (z @ v)))
        return lambda v: self._row_combination(
            d2loss * self._margins(v, sample), sample
        )

    def accuracy(self, x, features, labels) -> float:
        z = features.tocsr() if sp.issparse(features) else sp.csr_matrix(np.asarray(features, float))
        preds = (z @ x >= 0.0).astype(float)  # sigmoid(t) >= 0.5 iff t >= 0
        return float(np.mean(preds == np.asarray(labels, float)))

    def fingerprint(self) -> str:
        return _hash_parts(
            "sigmoid_ls", self.labels,
            self.features.data, self.features.indices, self.features.indptr,
        )


class TwoLayerNetProblem(FiniteSumObjective):
    """Fully connected two-layer classifier with softmax cross-entropy loss.

    Logistic hidden activations, softmax outputs, loss averaged over the
    sample.  The flat weight layout is (W1, b1, W2, b2); with the default
    architecture (784 inputs, 100 hidden units, 10 classes) the dimension is
    784*100 + 100 + 100*10 + 10 = 79510.  Hessian-vector products are exact,
    computed by forward-over-reverse directional differentiation at the cost
    of roughly one extra gradient evaluation.
    """

    def __init__(self, features, digit_labels, hidden: int = 100, n_classes: int = 10):
        self.features = np.asarray(
            features.toarray() if sp.issparse(features) else features, dtype=float
        )
        self.digits = np.asarray(digit_labels, dtype=int)
        if self.features.shape[0] != self.digits.shape[0]:
            raise ValueError("feature rows and labels disagree in length")
        if self.digits.min() < 0 or self.digits.max() >= n_classes:
            raise ValueError("labels must be class indices below n_classes")
        self.n = self.features.shape[0]
        self.in_dim = self.features.shape[1]
        self.hidden = hidden
        self.n_classes = n_classes
        self.onehot = np.zeros((self.n, n_classes))
        self.onehot[np.arange(self.n), self.digits] = 1.0
        self.dim = self.in_dim * hidden + hidden + hidden * n_classes + n_classes

    # -- weight layout -----------------------------------------------------
    def _unpack(self, x):
        i, h, c = self.in_dim, self.hidden, self.n_classes
        o = 0
        w1 = x[o:o + i * h].reshape(i, h); o += i * h
        b1 = x[o:o + h]; o += h
        w2 = x[o:o + h * c].reshape(h, c); o += h * c
        b2 = x[o:o + c]
        return w1, b1, w2, b2

    @staticmethod
    def _pack(w1, b1, w2, b2):
        return np.concatenate([w1.ravel(), b1, w2.ravel(), b2])

    def init_point(self, rng: np.random.Generator, scale: float = 0.1) -> np.ndarray:
        """Small random weights; zero weights leave the hidden layer symmetric."""
        return rng.standard_normal(self.dim) * scale

    def _batch(self, sample):
        if sample is None:
            return self.features, self.onehot, self.digits
        sample = np.asarray(sample)
        return self.features[sample], self.onehot[sample], self.digits[sample]

    def forward_activations(self, x, sample=None):
        """(hidden activations, class probabilities) for the given sample."""
        w1, b1, w2, b2 = self._unpack(x)
        z, _, _ = self._batch(sample)
        hid = expit(z @ w1 + b1)
        logits = hid @ w2 + b2
        shifted = logits - logits.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        probs = e / e.sum(axis=1, keepdims=True)
        return hid, probs

    def value(self, x, sample=None):
        w1, b1, w2, b2 = self._unpack(x)
        z, y, _ = self._batch(sample)
        hid = expit(z @ w1 + b1)
        logits = hid @ w2 + b2
        ce = logsumexp(logits, axis=1) - np.sum(logits * y, axis=1)
        out = float(np.mean(ce))
        if not np.isfinite(out):
            raise NumericsError("non-finite activations in network forward pass")
        return out

    def gradient(self, x, sample=None):
        w1, b1, w2, b2 = self._unpack(x)
        z, y, _ = self._batch(sample)
        m = z.shape[0]
        hid = expit(z @ w1 + b1)
        logits = hid @ w2 + b2
        shifted = logits - logits.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        probs = e / e.sum(axis=1, keepdims=True)
        d2 = (probs - y) / m
        d1 = (d2 @ w2.T) * hid * (1.0 - hid)
        return self._pack(z.T @ d1, d1.sum(axis=0), hid.T @ d2, d2.sum(axis=0))

    def hvp(self, x, sample, v):
        return self.hvp_operator(x, sample)(v)

    def hvp_operator(self, x, sample):
        w1, b1, w2, b2 = self._unpack(x)
        z, y, _ = self._batch(sample)
        m = z.shape[0]
        hid = expit(z @ w1 + b1)
        sprime = hid * (1.0 - hid)
        logits = hid @ w2 + b2
        shifted = logits - logits.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        probs = e / e.sum(axis=1, keepdims=True)
        d2 = (probs - y) / m
        g1 = d2 @ w2.T

        def apply(v):
            # forward-over-reverse directional derivative along v
            v1, c1, v2, c2 = self._unpack(np.asarray(v, dtype=float))
            r_hid = sprime * (z @ v1 + c1)
            r_logits = r_hid @ w2 + hid @ v2 + c2
            r_probs = probs * (r_logits - np.sum(probs * r_logits, axis=1, keepdims=True))
            r_d2 = r_probs / m
            r_g1 = r_d2 @ w2.T + d2 @ v2.T
            r_d1 = r_g1 * sprime + g1 * (1.0 - 2.0 * hid) * r_hid
            return self._pack(
                z.T @ r_d1,
                r_d1.sum(axis=0),
                r_hid.T @ d2 + hid.T @ r_d2,
                r_d2.sum(axis=0),
            )

        return apply

    def accuracy(self, x, features, labels) -> float:
        z = np.asarray(features.toarray() if sp.issparse(features) else features, dtype=float)
        w1, b1, w2, b2 = self._unpack(x)
        hid = expit(z @ w1 + b1)
        logits = hid @ w2 + b2
        return float(np.mean(logits.argmax(axis=1) == np.asarray(labels, dtype=int)))

    def fingerprint(self) -> str:
        return _hash_parts("two_layer_net", self.hidden, self.n_classes,
                           self.digits, self.features)
