"""Zero-order Sugeno neuro-fuzzy regressor with hybrid training.

Architecture, for p inputs with m Gaussian membership functions each:

    layer 1   memberships          mu[j,k](x_j) = exp(-(x_j-c)^2 / (2 s^2))
    layer 2   firing strengths     w_r = prod_j mu[j, rule_r[j]]   (product t-norm)
    layer 3   normalization        wbar_r = w_r / sum w
    layer 4   rule outputs         wbar_r * f_r     (constant consequents)
    layer 5   aggregation          yhat = sum_r wbar_r * f_r

The rule base is the full grid partition: every combination of one
membership function per input, in lexicographic order (m^p rules; the
benchmark's 7 inputs x 3 functions give 2187).  Hybrid training
alternates a ridge least-squares estimate of the consequents with one
full-batch gradient-descent step on the membership centers and widths.

Shapes used throughout:

    X            (n, p)      inputs in [0, 1]
    centers, sigmas  (p, m)  premise parameters
    rules        (R, p)      membership index per input, R = m^p
    memberships  (n, p, m)
    firing       (n, R)
    consequents  (R,)
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .linalg import ridge_solve

SIGMA_FLOOR = 1e-3


class GaussianMf(NamedTuple):
    center: float
    width: float


def gaussian_mf(x: float, mf: GaussianMf) -> float:
    """Membership degree exp(-(x - c)^2 / (2 sigma^2))."""
    return float(np.exp(-((x - mf.center) ** 2) / (2.0 * mf.width ** 2)))


def rule_table(n_inputs: int, n_mfs: int) -> np.ndarray:
    """Full grid partition, lexicographic: every MF combination once."""
    combos = itertools.product(range(n_mfs), repeat=n_inputs)
    return np.array(list(combos), dtype=np.int64)


def init_mf_grid(input_ranges, n_mfs: int):
    """Evenly spaced centers over each range, widths at 50% overlap.

    For n_mfs > 1 the width is (hi - lo) / (2 (n_mfs - 1)); a single
    function sits at the midpoint with width (hi - lo) / 2.
    """
    ranges = [(float(lo), float(hi)) for lo, hi in input_ranges]
    for lo, hi in ranges:
        if not lo < hi:
            raise ValueError(f"invalid input range [{lo}, {hi}]")
    centers = np.empty((len(ranges), n_mfs))
    sigmas = np.empty((len(ranges), n_mfs))
    for j, (lo, hi) in enumerate(ranges):
        if n_mfs == 1:
            centers[j, 0] = (lo + hi) / 2.0
            sigmas[j, 0] = (hi - lo) / 2.0
        else:
            centers[j] = np.linspace(lo, hi, n_mfs)
            sigmas[j] = (hi - lo) / (2.0 * (n_mfs - 1))
    return centers, np.maximum(sigmas, SIGMA_FLOOR)


@dataclass(frozen=True)
class AnfisParams:
    """Immutable parameter bundle; training steps return new bundles."""

    centers: np.ndarray
    sigmas: np.ndarray
    rules: np.ndarray
    consequents: np.ndarray

    @classmethod
    def from_ranges(cls, input_ranges, n_mfs: int) -> "AnfisParams":
        centers, sigmas = init_mf_grid(input_ranges, n_mfs)
        rules = rule_table(centers.shape[0], n_mfs)
        return cls(centers=centers, sigmas=sigmas, rules=rules,
                   consequents=np.zeros(rules.shape[0]))

    @property
    def n_inputs(self) -> int:
        return self.centers.shape[0]

    @property
    def n_rules(self) -> int:
        return self.rules.shape[0]


@dataclass(frozen=True)
class ForwardTrace:
    """Layer-by-layer values of a single forward pass."""

    memberships: np.ndarray    # (p, m)
    firing: np.ndarray         # (R,)
    normalized: np.ndarray     # (R,)
    rule_outputs: np.ndarray   # (R,)
    output: float


def _forward_batch(params: AnfisParams, x: np.ndarray):
    mem = np.exp(-((x[:, :, None] - params.centers[None]) ** 2)
                 / (2.0 * params.sigmas[None] ** 2))
    firing = np.ones((x.shape[0], params.n_rules))
    for j in range(params.n_inputs):
        firing *= mem[:, j, :][:, params.rules[:, j]]
    total = firing.sum(axis=1, keepdims=True)
    if not (total > 0.0).all():
        raise FloatingPointError(
            "all rule firing strengths vanished; membership widths collapsed"
        )
    wbar = firing / total
    yhat = wbar @ params.consequents
    return mem, firing, wbar, yhat


def forward(params: AnfisParams, x) -> ForwardTrace:
    """Single-input forward pass returning every layer."""
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    if x.shape[1] != params.n_inputs:
        raise ValueError(
            f"input has {x.shape[1]} values, model expects {params.n_inputs}"
        )
    mem, firing, wbar, yhat = _forward_batch(params, x)
    return ForwardTrace(
        memberships=mem[0],
        firing=firing[0],
        normalized=wbar[0],
        rule_outputs=wbar[0] * params.consequents,
        output=float(yhat[0]),
    )


def batch_mse(params: AnfisParams, x: np.ndarray, y: np.ndarray) -> float:
    """Unclipped training loss, the quantity hybrid training optimizes."""
    _, _, _, yhat = _forward_batch(params, x)
    return float(np.mean((yhat - y) ** 2))


def lse_consequents(params: AnfisParams, x: np.ndarray, y: np.ndarray,
                    lam: float) -> AnfisParams:
    """Refit the constant consequents by ridge on the normalized firings.

    Premise parameters are untouched.  The ridge term is needed because
    the benchmark trains 2187 consequents from 400 rows.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape[0] == 0:
        raise ValueError("batch must be nonempty")
    _, _, wbar, _ = _forward_batch(params, x)
    return replace(params, consequents=ridge_solve(wbar, y, lam))


def premise_gradients(params: AnfisParams, x: np.ndarray, y: np.ndarray):
    """Analytic d(MSE)/d(center) and d(MSE)/d(width), both shaped (p, m).

    Backpropagates through layers 5..1: with e_i = yhat_i - y_i and
    W_i = sum_r w_ir,

        dMSE/dmu[j,k] = sum_{i, r uses (j,k)} (2/n) e_i (f_r - yhat_i)
                          w_ir / (W_i mu[i,j,k])

    and mu cancels against dmu/dc = mu (x-c)/s^2, so no small-membership
    division appears.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    n = x.shape[0]
    _, _, wbar, yhat = _forward_batch(params, x)
    err = yhat - y
    # per-sample, per-rule sensitivity of the loss to log-membership
    sens = (2.0 / n) * err[:, None] * (params.consequents[None, :]
                                       - yhat[:, None]) * wbar
    n_mfs = params.centers.shape[1]
    grad_c = np.zeros_like(params.centers)
    grad_s = np.zeros_like(params.sigmas)
    for j in range(params.n_inputs):
        onehot = np.zeros((params.n_rules, n_mfs))
        onehot[np.arange(params.n_rules), params.rules[:, j]] = 1.0
        per_mf = sens @ onehot                       # (n, m)
        dx = x[:, j][:, None] - params.centers[j][None, :]
        grad_c[j] = (per_mf * dx / params.sigmas[j][None, :] ** 2).sum(axis=0)
        grad_s[j] = (per_mf * dx ** 2 / params.sigmas[j][None, :] ** 3).sum(axis=0)
    return grad_c, grad_s


def _first_bad(name: str, grad: np.ndarray) -> str:
    j, k = np.argwhere(~np.isfinite(grad))[0]
    return f"{name}[{j},{k}]"


def premise_step(params: AnfisParams, x: np.ndarray, y: np.ndarray,
                 lr: float) -> AnfisParams:
    """One full-batch gradient-descent step on centers and widths.

    Widths are floored at SIGMA_FLOOR afterwards so memberships cannot
    collapse to zero.
    """
    grad_c, grad_s = premise_gradients(params, x, y)
    if not np.isfinite(grad_c).all():
        raise FloatingPointError(
            f"non-finite gradient for {_first_bad('center', grad_c)}"
        )
    if not np.isfinite(grad_s).all():
        raise FloatingPointError(
            f"non-finite gradient for {_first_bad('width', grad_s)}"
        )
    return replace(
        params,
        centers=params.centers - lr * grad_c,
        sigmas=np.maximum(params.sigmas - lr * grad_s, SIGMA_FLOOR),
    )


def train_hybrid(params: AnfisParams, x: np.ndarray, y: np.ndarray,
                 epochs: int, lr: float, lse_lambda: float):
    """Alternate consequent LSE and one premise gradient step per epoch.

    Returns the trained parameters and the per-epoch training MSE
    (measured after the epoch's gradient step).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape[0] == 0:
        raise ValueError("training batch must be nonempty")
    mse_log = []
    for _ in range(epochs):
        params = lse_consequents(params, x, y, lse_lambda)
        params = premise_step(params, x, y, lr)
        mse_log.append(batch_mse(params, x, y))
    return params, mse_log


class AnfisRegressor(BaseEstimator, RegressorMixin):
    """Grid-partition Sugeno fuzzy regressor for unit-scaled inputs.

    Parameters
    ----------
    n_mfs : int, membership functions per input (rule count is n_mfs^p).
    lr : float, premise learning rate.
    lse_lambda : float, ridge penalty of the consequent estimation.
    epochs : int, hybrid training epochs.
    input_range : (lo, hi) pair assumed for every input column.
    """

    def __init__(self, n_mfs=3, lr=0.01, lse_lambda=1e-6, epochs=2,
                 input_range=(0.0, 1.0)):
        self.n_mfs = n_mfs
        self.lr = lr
        self.lse_lambda = lse_lambda
        self.epochs = epochs
        self.input_range = input_range

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        params = AnfisParams.from_ranges(
            [self.input_range] * X.shape[1], self.n_mfs)
        params, mse_log = train_hybrid(
            params, X, y, self.epochs, self.lr, self.lse_lambda)
        self.n_features_in_ = X.shape[1]
        self.params_ = params
        self.train_mse_log_ = mse_log
        fitted = np.clip(_forward_batch(params, X)[3], 0.0, 1.0)
        self.train_mse_ = float(np.mean((fitted - y) ** 2))
        return self

    def predict(self, X):
        check_is_fitted(self, "params_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, model was fitted with "
                f"{self.n_features_in_}"
            )
        _, _, _, yhat = _forward_batch(self.params_, X)
        return np.clip(yhat, 0.0, 1.0)

    def to_json(self) -> str:
        # rule indices are implicit (lexicographic) and never serialized
        check_is_fitted(self, "params_")
        def grid(a):
            return [[format(v, ".9g") for v in row] for row in a]
        payload = {
            "model": "anfis",
            "params": self.get_params(),
            "n_features_in": int(self.n_features_in_),
            "centers": grid(self.params_.centers),
            "sigmas": grid(self.params_.sigmas),
            "consequents": [format(v, ".9g") for v in self.params_.consequents],
        }
        return json.dumps(payload, indent=1, sort_keys=True)

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json() + "\n")
        return path

    @classmethod
    def from_json(cls, text: str) -> "AnfisRegressor":
        payload = json.loads(text)
        if payload.get("model") != "anfis":
            raise ValueError("not a fuzzy-system model dump")
        init = dict(payload["params"])
        if isinstance(init.get("input_range"), list):
            init["input_range"] = tuple(init["input_range"])
        model = cls(**init)
        centers = np.asarray(payload["centers"], dtype=np.float64)
        sigmas = np.asarray(payload["sigmas"], dtype=np.float64)
        model.n_features_in_ = payload["n_features_in"]
        model.params_ = AnfisParams(
            centers=centers,
            sigmas=sigmas,
            rules=rule_table(centers.shape[0], centers.shape[1]),
            consequents=np.asarray(payload["consequents"], dtype=np.float64),
        )
        return model

    @classmethod
    def load(cls, path) -> "AnfisRegressor":
        return cls.from_json(Path(path).read_text())
