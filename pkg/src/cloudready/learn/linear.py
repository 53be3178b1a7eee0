"""Linear classifiers: L2-regularized logistic regression and linear SVM.

Both minimize

    J(w, b) = (1/W) * sum_i s_i * loss_i  +  ||w||^2 / (2C)

with per-sample weights s_i (W = sum s_i) and the bias left unregularized.
Keeping the regularizer outside the 1/W average makes class balancing a
pure reweighting of the data term: duplicating samples and compensating
with balanced weights leaves the objective, and hence the optimum,
unchanged.

Logistic regression uses a deterministic full-batch quasi-Newton solve to
tight gradient tolerance; the SVM is a seeded primal subgradient descent
(decreasing step 1/(lambda*(t+1)), lambda = 1/C) with a fixed epoch budget.
"""

from __future__ import annotations

import numpy as np
from scipy import optimize, sparse
from scipy.special import expit

__all__ = [
    "LogisticRegression",
    "LinearSVM",
    "lr_objective",
    "svm_objective",
]


def _signs(y01: np.ndarray) -> np.ndarray:
    return np.where(np.asarray(y01) == 1, 1.0, -1.0)


def _weights(y01: np.ndarray, sample_weight) -> np.ndarray:
    if sample_weight is None:
        return np.ones(len(y01), dtype=np.float64)
    return np.asarray(sample_weight, dtype=np.float64)


def lr_objective(theta: np.ndarray, X, y01, C: float, sample_weight=None):
    """Regularized logistic loss and its gradient at theta = [w..., b].

    The loss is the weighted mean logistic loss plus ||w||^2 / (2*C*W),
    W being the total sample weight. Scaling the penalty by W keeps C on
    the familiar convention where it trades off against the per-sample
    loss *sum*, so a given C means the same thing at any corpus size.

    Exposed as a plain function so the solver's optimum can be checked
    against finite differences of the very same objective.
    """
    d = X.shape[1]
    w = theta[:d]
    b = theta[d]
    t = _signs(y01)
    s = _weights(y01, sample_weight)
    W = s.sum()

    z = X.dot(w) + b
    if sparse.issparse(z):  # defensive; X.dot(dense) is dense for CSR
        z = np.asarray(z.todense()).ravel()
    tz = t * z
    loss = float(np.dot(s, np.logaddexp(0.0, -tz)) / W + np.dot(w, w) / (2.0 * C * W))

    r = s * (-t) * expit(-tz)
    if sparse.issparse(X):
        grad_w = np.asarray(X.T.dot(r)).ravel() / W + w / (C * W)
    else:
        grad_w = X.T.dot(r) / W + w / (C * W)
    grad_b = r.sum() / W
    return loss, np.concatenate([grad_w, [grad_b]])


class LogisticRegression:
    def __init__(
        self,
        C: float = 1.0,
        max_iter: int = 1000,
        gtol: float = 1e-9,
        ftol: float = 1e-14,
    ):
        if C <= 0:
            raise ValueError(f"C must be positive, got {C}")
        self.C = C
        self.max_iter = max_iter
        self.gtol = gtol
        self.ftol = ftol
        self.coef_: np.ndarray | None = None
        self.intercept_: float = 0.0
        self.n_iter_: int = 0
        self.converged_: bool = False

    def fit(self, X, y01, sample_weight=None) -> "LogisticRegression":
        y01 = np.asarray(y01, dtype=np.int64)
        if X.shape[0] != y01.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y01.shape[0]} labels")
        d = X.shape[1]
        result = optimize.minimize(
            lr_objective,
            np.zeros(d + 1, dtype=np.float64),
            args=(X, y01, self.C, sample_weight),
            jac=True,
            method="L-BFGS-B",
            options={
                "maxiter": self.max_iter,
                "gtol": self.gtol,
                "ftol": self.ftol,
                "maxcor": 20,
            },
        )
        self.coef_ = result.x[:d]
        self.intercept_ = float(result.x[d])
        self.n_iter_ = int(result.nit)
        self.converged_ = bool(result.success)
        return self

    def decision_function(self, X) -> np.ndarray:
        z = X.dot(self.coef_) + self.intercept_
        return np.asarray(z).ravel()

    def positive_proba(self, X) -> np.ndarray:
        return expit(self.decision_function(X))

    def predict01(self, X) -> np.ndarray:
        return (self.decision_function(X) >= 0.0).astype(np.int64)


def svm_objective(w: np.ndarray, b: float, X, y01, C: float, sample_weight=None) -> float:
    """Regularized mean hinge loss (for tests and convergence reporting).

    As with the logistic objective, the ||w||^2 penalty is scaled by the
    total sample weight so C keeps the per-sample-loss-sum convention.
    """
    t = _signs(y01)
    s = _weights(y01, sample_weight)
    z = X.dot(w) + b
    margins = np.maximum(0.0, 1.0 - t * np.asarray(z).ravel())
    return float(np.dot(s, margins) / s.sum() + np.dot(w, w) / (2.0 * C * s.sum()))


class LinearSVM:
    """Primal subgradient linear SVM with hinge loss.

    One seeded permutation per epoch; step size 1/(lambda*(t+1)) with a
    global step counter t, lambda = 1/(C * total sample weight). The
    returned model is the final iterate. Deterministic given
    (data, C, epochs, seed).
    """

    def __init__(self, C: float = 1.0, epochs: int = 30, seed: int = 0):
        if C <= 0:
            raise ValueError(f"C must be positive, got {C}")
        if epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {epochs}")
        self.C = C
        self.epochs = epochs
        self.seed = seed
        self.coef_: np.ndarray | None = None
        self.intercept_: float = 0.0

    def fit(self, X, y01, sample_weight=None) -> "LinearSVM":
        y01 = np.asarray(y01, dtype=np.int64)
        n, d = X.shape
        if y01.shape[0] != n:
            raise ValueError(f"X has {n} rows but y has {y01.shape[0]} labels")
        t_signs = _signs(y01)
        s = _weights(y01, sample_weight)
        # Uniform index draws with multiplier c_i keep the expected
        # subgradient equal to the weighted-average objective's.
        c_mult = s * (n / s.sum())
        lam = 1.0 / (self.C * s.sum())

        if sparse.issparse(X):
            csr = sparse.csr_matrix(X)
            rows = [
                (
                    csr.indices[csr.indptr[i] : csr.indptr[i + 1]],
                    csr.data[csr.indptr[i] : csr.indptr[i + 1]],
                )
                for i in range(n)
            ]
        else:
            dense = np.asarray(X, dtype=np.float64)
            rows = None

        w = np.zeros(d, dtype=np.float64)
        b = 0.0
        scale = 1.0  # w is stored as scale * w to make shrinkage O(1)
        rng = np.random.default_rng(self.seed)
        step = 0
        for _ in range(self.epochs):
            for i in rng.permutation(n):
                step += 1
                eta = 1.0 / (lam * (step + 1))
                if rows is not None:
                    idx, vals = rows[i]
                    margin = t_signs[i] * (scale * float(w[idx].dot(vals)) + b)
                else:
                    margin = t_signs[i] * (scale * float(dense[i].dot(w)) + b)
                scale *= 1.0 - eta * lam
                if margin < 1.0:
                    coef = eta * c_mult[i] * t_signs[i] / scale
                    if rows is not None:
                        w[idx] += coef * vals
                    else:
                        w += coef * dense[i]
                    b += eta * c_mult[i] * t_signs[i]
                if scale < 1e-9:
                    w *= scale
                    scale = 1.0
        self.coef_ = w * scale
        self.intercept_ = b
        return self

    def decision_function(self, X) -> np.ndarray:
        z = X.dot(self.coef_) + self.intercept_
        return np.asarray(z).ravel()

    def predict01(self, X) -> np.ndarray:
        return (self.decision_function(X) >= 0.0).astype(np.int64)
