"""Multinomial Naive Bayes with Laplace smoothing.

Feature values must be nonnegative (counts or [0,1] scaled counts). Class
order is fixed as [negative, positive] so parameter arrays serialize
unambiguously.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.special import logsumexp

__all__ = ["MultinomialNB"]


class MultinomialNB:
    def __init__(self, alpha: float = 1.0):
        if alpha <= 0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        self.alpha = alpha
        self.class_log_prior_: np.ndarray | None = None
        self.feature_log_prob_: np.ndarray | None = None

    def fit(self, X, y: np.ndarray, sample_weight: np.ndarray | None = None) -> "MultinomialNB":
        y = np.asarray(y, dtype=np.int64)
        n, d = X.shape
        if y.shape[0] != n:
            raise ValueError(f"X has {n} rows but y has {y.shape[0]} labels")
        min_val = X.data.min() if sparse.issparse(X) and X.nnz else (
            0.0 if sparse.issparse(X) else float(np.min(X)) if X.size else 0.0
        )
        if min_val < 0:
            raise ValueError("multinomial NB requires nonnegative feature values")
        w = np.ones(n, dtype=np.float64) if sample_weight is None else np.asarray(
            sample_weight, dtype=np.float64
        )

        log_priors = np.empty(2, dtype=np.float64)
        log_probs = np.empty((2, d), dtype=np.float64)
        total_w = w.sum()
        for c in (0, 1):
            wc = w * (y == c)
            class_w = wc.sum()
            if class_w <= 0:
                raise ValueError("fit requires samples of both classes")
            log_priors[c] = np.log(class_w / total_w)
            if sparse.issparse(X):
                counts = np.asarray(X.T.dot(wc)).ravel()
            else:
                counts = np.asarray(X, dtype=np.float64).T.dot(wc)
            smoothed = counts + self.alpha
            log_probs[c] = np.log(smoothed) - np.log(smoothed.sum())
        self.class_log_prior_ = log_priors
        self.feature_log_prob_ = log_probs
        return self

    def joint_log_likelihood(self, X) -> np.ndarray:
        """(n, 2) array of log P(class) + Σ x_j log θ_cj."""
        if self.feature_log_prob_ is None:
            raise ValueError("model is not fitted")
        jll = X.dot(self.feature_log_prob_.T)
        if sparse.issparse(jll):
            jll = np.asarray(jll.todense())
        return np.asarray(jll) + self.class_log_prior_

    def predict01(self, X) -> np.ndarray:
        """0/1 predictions; ties go to the positive class."""
        jll = self.joint_log_likelihood(X)
        return (jll[:, 1] >= jll[:, 0]).astype(np.int64)

    def positive_proba(self, X) -> np.ndarray:
        """Posterior probability of the positive class per row."""
        jll = self.joint_log_likelihood(X)
        return np.exp(jll[:, 1] - logsumexp(jll, axis=1))
