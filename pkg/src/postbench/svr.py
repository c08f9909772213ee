"""Epsilon-insensitive support vector regression with an RBF kernel.

The dual problem over the reduced coefficients beta_i = alpha_i - alpha_i*

    maximize  -1/2 sum_ij beta_i beta_j K_ij - eps sum_i |beta_i|
              + sum_i y_i beta_i
    subject to sum_i beta_i = 0,  |beta_i| <= C

is solved by SMO-style pairwise coordinate updates: the first-order
max-violating pair is selected from the per-point feasible bias
intervals, and the pair subproblem (a piecewise quadratic in one scalar)
is minimized exactly.  One pass is a round of up to n pairwise updates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

_PRUNE_TOL = 1e-12


def rbf_kernel(x, z, gamma: float) -> float:
    """exp(-gamma * ||x - z||^2) for a single pair of points."""
    x = np.asarray(x, dtype=np.float64).ravel()
    z = np.asarray(z, dtype=np.float64).ravel()
    if x.shape != z.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {z.shape}")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    diff = x - z
    return float(np.exp(-gamma * (diff @ diff)))


def rbf_gram(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    """Kernel matrix K[i, j] = exp(-gamma * ||a_i - b_j||^2)."""
    sq = ((a * a).sum(axis=1)[:, None] + (b * b).sum(axis=1)[None, :]
          - 2.0 * a @ b.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


@dataclass(frozen=True)
class KktReport:
    max_violation: float
    n_violations: int
    kkt_tol: float


def _bias_intervals(beta, resid_free, eps, C):
    # allowed bias range [lo_i, hi_i] per point, given F_i = y_i - (K beta)_i
    at_tol = 1e-12 * C
    lo = np.where(beta < -at_tol, resid_free + eps, resid_free - eps)
    hi = np.where(beta > at_tol, resid_free - eps, resid_free + eps)
    lo[beta >= C - at_tol] = -np.inf
    hi[beta <= -C + at_tol] = np.inf
    return lo, hi


def _pair_step(beta_i, beta_j, lin, eta, eps, C):
    # minimize 0.5*eta*t^2 + lin*t + eps*(|beta_i + t| + |beta_j - t|) over
    # the box; the kinks at t = -beta_i and t = beta_j split the range into
    # smooth quadratic pieces, so checking each piece minimizer and every
    # breakpoint is exact
    t_lo = max(-C - beta_i, beta_j - C)
    t_hi = min(C - beta_i, beta_j + C)
    cands = [t_lo, t_hi]
    for brk in (-beta_i, beta_j):
        if t_lo < brk < t_hi:
            cands.append(brk)
    if eta > 1e-14:
        for s_i in (-1.0, 1.0):
            for s_j in (-1.0, 1.0):
                t = (-lin - eps * s_i + eps * s_j) / eta
                cands.append(min(max(t, t_lo), t_hi))

    def gain(t):
        return (0.5 * eta * t * t + lin * t
                + eps * (abs(beta_i + t) - abs(beta_i)
                         + abs(beta_j - t) - abs(beta_j)))

    return min(cands, key=gain)


class SupportVectorRegressor(BaseEstimator, RegressorMixin):
    """RBF-kernel epsilon-SVR trained by SMO, for unit-scaled targets.

    Parameters
    ----------
    C : float, box constraint on |beta_i|.
    epsilon : float, half-width of the insensitive tube.
    gamma : float, RBF kernel width.
    kkt_tol : float, maximum tolerated KKT violation at convergence.
    max_passes : int, cap on solver passes (one pass = up to n updates).
    """

    def __init__(self, C=1000.0, epsilon=0.1, gamma=0.1, kkt_tol=1e-3,
                 max_passes=10000):
        self.C = C
        self.epsilon = epsilon
        self.gamma = gamma
        self.kkt_tol = kkt_tol
        self.max_passes = max_passes

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        n = X.shape[0]
        if n < 2:
            raise ValueError("training needs at least 2 rows")
        if self.C <= 0 or self.epsilon < 0 or self.gamma <= 0:
            raise ValueError("require C > 0, epsilon >= 0, gamma > 0")
        C, eps = float(self.C), float(self.epsilon)
        gram = rbf_gram(X, X, self.gamma)
        beta = np.zeros(n)
        g = np.zeros(n)  # K @ beta, maintained incrementally

        def dual_objective():
            return float(-0.5 * beta @ g - eps * np.abs(beta).sum() + y @ beta)

        objective_by_pass = [dual_objective()]
        converged = False
        violation = np.inf
        updates = 0
        for _ in range(self.max_passes):
            for _ in range(n):
                resid_free = y - g
                lo, hi = _bias_intervals(beta, resid_free, eps, C)
                i = int(np.argmax(lo))
                j = int(np.argmin(hi))
                violation = float(lo[i] - hi[j])
                if violation <= self.kkt_tol:
                    converged = True
                    break
                eta = gram[i, i] + gram[j, j] - 2.0 * gram[i, j]
                t = _pair_step(beta[i], beta[j], resid_free[j] - resid_free[i],
                               eta, eps, C)
                beta[i] += t
                beta[j] -= t
                g += t * (gram[:, i] - gram[:, j])
                updates += 1
            objective = dual_objective()
            # exact line searches cannot decrease the dual; guard against
            # an update bug rather than tolerate silent divergence
            if objective < objective_by_pass[-1] - 1e-9 * (1.0 + abs(objective)):
                raise AssertionError(
                    f"dual objective decreased across a pass: "
                    f"{objective_by_pass[-1]} -> {objective}"
                )
            objective_by_pass.append(objective)
            if converged:
                break

        resid_free = y - g
        lo, hi = _bias_intervals(beta, resid_free, eps, C)
        interior = (np.abs(beta) > 1e-8) & (np.abs(beta) < C - 1e-8 * C)
        if interior.any():
            b0 = float(np.mean(resid_free[interior] - eps * np.sign(beta[interior])))
        else:
            b0 = float((np.max(lo) + np.min(hi)) / 2.0)
            if not np.isfinite(b0):  # all coefficients pinned at one bound
                b0 = float(np.median(resid_free))

        fitted = np.clip(g + b0, 0.0, 1.0)
        keep = np.abs(beta) > _PRUNE_TOL
        self.train_mse_ = float(np.mean((fitted - y) ** 2))
        self.n_features_in_ = X.shape[1]
        self.support_idx_ = np.flatnonzero(keep)
        self.support_vectors_ = X[keep].copy()
        self.dual_coef_ = beta[keep].copy()
        self.intercept_ = b0
        self.n_support_ = int(keep.sum())
        self.converged_ = converged
        self.max_violation_ = violation
        self.n_updates_ = updates
        self.objective_by_pass_ = np.asarray(objective_by_pass)
        return self

    def decision_function(self, X):
        """Unclipped regression values beta0 + sum_i beta_i K(x_i, x)."""
        check_is_fitted(self, "dual_coef_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, model was fitted with "
                f"{self.n_features_in_}"
            )
        if self.n_support_ == 0:
            return np.full(X.shape[0], self.intercept_)
        k = rbf_gram(X, self.support_vectors_, self.gamma)
        return k @ self.dual_coef_ + self.intercept_

    def predict(self, X):
        return np.clip(self.decision_function(X), 0.0, 1.0)

    def to_json(self) -> str:
        check_is_fitted(self, "dual_coef_")
        payload = {
            "model": "svr",
            "params": self.get_params(),
            "n_features_in": int(self.n_features_in_),
            "support_vectors": [[format(v, ".9g") for v in row]
                                for row in self.support_vectors_],
            "support_idx": [int(i) for i in self.support_idx_],
            "dual_coef": [format(v, ".9g") for v in self.dual_coef_],
            "intercept": format(self.intercept_, ".9g"),
            "converged": bool(self.converged_),
            "max_violation": format(self.max_violation_, ".9g"),
        }
        return json.dumps(payload, indent=1, sort_keys=True)

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json() + "\n")
        return path

    @classmethod
    def from_json(cls, text: str) -> "SupportVectorRegressor":
        payload = json.loads(text)
        if payload.get("model") != "svr":
            raise ValueError("not a support-vector model dump")
        model = cls(**payload["params"])
        model.n_features_in_ = payload["n_features_in"]
        model.support_vectors_ = np.asarray(payload["support_vectors"],
                                            dtype=np.float64).reshape(
            len(payload["support_vectors"]), -1)
        model.support_idx_ = np.asarray(payload["support_idx"], dtype=np.intp)
        model.dual_coef_ = np.asarray(payload["dual_coef"], dtype=np.float64)
        model.intercept_ = float(payload["intercept"])
        model.n_support_ = model.dual_coef_.shape[0]
        model.converged_ = payload["converged"]
        model.max_violation_ = float(payload["max_violation"])
        return model

    @classmethod
    def load(cls, path) -> "SupportVectorRegressor":
        return cls.from_json(Path(path).read_text())


def check_kkt(model: SupportVectorRegressor, X, y) -> KktReport:
    """Verify the epsilon-insensitive KKT conditions on training data.

    Interior coefficients must sit on the tube boundary, bounded ones on
    the correct side of it, and zero ones inside it.  Returns the largest
    violation and how many points exceed the model's tolerance.
    """
    check_is_fitted(model, "dual_coef_")
    X = check_array(X)
    y = np.asarray(y, dtype=np.float64).ravel()
    beta = np.zeros(X.shape[0])
    beta[model.support_idx_] = model.dual_coef_
    resid = model.decision_function(X) - y
    C, eps = float(model.C), float(model.epsilon)
    at_tol = 1e-9 * C
    viol = np.empty(X.shape[0])
    zero = np.abs(beta) <= _PRUNE_TOL
    upper = beta >= C - at_tol
    lower = beta <= -C + at_tol
    pos_in = (~zero) & (~upper) & (beta > 0)
    neg_in = (~zero) & (~lower) & (beta < 0)
    viol[zero] = np.maximum(np.abs(resid[zero]) - eps, 0.0)
    viol[pos_in] = np.abs(resid[pos_in] + eps)   # f = y - eps expected
    viol[neg_in] = np.abs(resid[neg_in] - eps)   # f = y + eps expected
    viol[upper] = np.maximum(eps + resid[upper], 0.0)
    viol[lower] = np.maximum(eps - resid[lower], 0.0)
    return KktReport(
        max_violation=float(viol.max()) if viol.size else 0.0,
        n_violations=int(np.sum(viol > model.kkt_tol)),
        kkt_tol=model.kkt_tol,
    )
