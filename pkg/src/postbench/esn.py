"""Echo state network regressor.

A fixed random reservoir expands the input sequence into a
``reservoir_size``-dimensional state via s(t) = tanh(W_r s(t-1) + W_in x(t));
only the linear readout on [1, s(t)] is trained, by ridge regression.
Rows are treated as a pseudo-time series in split order, and prediction
continues the reservoir state from where training ended.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .linalg import ridge_solve, spectral_radius
from .rng import Rng

_REDRAW_LIMIT = 8


def init_reservoir(n_inputs: int, reservoir_size: int, rho: float,
                   input_scale: float, seed: int):
    """Draw the fixed weight matrices.

    W_in is uniform in [-input_scale, input_scale]; W_r starts uniform in
    [-1, 1] and is rescaled so its spectral radius equals ``rho``.  A
    degenerate draw (spectral radius below 1e-12) is redrawn a bounded
    number of times.
    """
    if n_inputs < 1 or reservoir_size < 1:
        raise ValueError("n_inputs and reservoir_size must be >= 1")
    if rho <= 0:
        raise ValueError("spectral radius must be positive")
    rng = Rng(seed)
    w_in = rng.uniform_array((reservoir_size, n_inputs), -input_scale, input_scale)
    for _ in range(_REDRAW_LIMIT):
        w_raw = rng.uniform_array((reservoir_size, reservoir_size), -1.0, 1.0)
        # tight tolerance here so the rescaled radius is good to ~1e-9
        raw_radius = spectral_radius(w_raw, tol=1e-13, max_iter=200000)
        if raw_radius > 1e-12:
            return w_in, w_raw * (rho / raw_radius)
    raise RuntimeError(
        f"reservoir draw degenerate {_REDRAW_LIMIT} times (spectral radius ~ 0)"
    )


def run_reservoir(w_r: np.ndarray, w_in: np.ndarray, inputs: np.ndarray,
                  s0: np.ndarray | None = None) -> np.ndarray:
    """Apply the state recursion over ``inputs``; returns all states.

    ``inputs`` is (T, p) in sequence order, the result is (T, d).  The
    initial state defaults to zeros.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[0] == 0:
        raise ValueError("inputs must be a nonempty (T, p) array")
    d = w_r.shape[0]
    if w_in.shape != (d, inputs.shape[1]):
        raise ValueError(
            f"W_in shape {w_in.shape} does not match reservoir size {d} "
            f"and input dimension {inputs.shape[1]}"
        )
    s = np.zeros(d) if s0 is None else np.asarray(s0, dtype=np.float64).copy()
    if s.shape != (d,):
        raise ValueError(f"s0 must have shape ({d},)")
    states = np.empty((inputs.shape[0], d))
    for t in range(inputs.shape[0]):
        s = np.tanh(w_r @ s + w_in @ inputs[t])
        states[t] = s
    return states


class EchoStateRegressor(BaseEstimator, RegressorMixin):
    """Reservoir-computing regressor for unit-scaled targets.

    Parameters
    ----------
    reservoir_size : int, number of reservoir neurons.
    spectral_radius : float, radius the recurrent weights are rescaled to.
    input_scale : float, half-width of the uniform input-weight range.
    washout : int, initial states discarded before readout training.
    ridge_lambda : float, readout ridge penalty.
    seed : int, seed for the weight draws.
    """

    def __init__(self, reservoir_size=25, spectral_radius=0.5, input_scale=1.0,
                 washout=10, ridge_lambda=1e-6, seed=0):
        self.reservoir_size = reservoir_size
        self.spectral_radius = spectral_radius
        self.input_scale = input_scale
        self.washout = washout
        self.ridge_lambda = ridge_lambda
        self.seed = seed

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        if not 0 <= self.washout < X.shape[0]:
            raise ValueError(
                f"washout ({self.washout}) must be smaller than the number "
                f"of training rows ({X.shape[0]})"
            )
        self.n_features_in_ = X.shape[1]
        self.w_in_, self.w_r_ = init_reservoir(
            X.shape[1], self.reservoir_size, self.spectral_radius,
            self.input_scale, self.seed,
        )
        states = run_reservoir(self.w_r_, self.w_in_, X)
        design = np.hstack([
            np.ones((X.shape[0] - self.washout, 1)),
            states[self.washout:],
        ])
        self.w_out_ = ridge_solve(design, y[self.washout:], self.ridge_lambda)
        self.final_state_ = states[-1].copy()
        fitted = np.clip(design @ self.w_out_, 0.0, 1.0)
        self.train_mse_ = float(np.mean((fitted - y[self.washout:]) ** 2))
        return self

    def predict(self, X):
        check_is_fitted(self, "w_out_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, model was fitted with "
                f"{self.n_features_in_}"
            )
        states = run_reservoir(self.w_r_, self.w_in_, X, self.final_state_)
        design = np.hstack([np.ones((X.shape[0], 1)), states])
        return np.clip(design @ self.w_out_, 0.0, 1.0)

    def to_json(self) -> str:
        check_is_fitted(self, "w_out_")
        def grid(a):
            return [[format(v, ".9g") for v in row] for row in np.atleast_2d(a)]
        payload = {
            "model": "esn",
            "params": self.get_params(),
            "n_features_in": int(self.n_features_in_),
            "w_in": grid(self.w_in_),
            "w_r": grid(self.w_r_),
            "w_out": grid(self.w_out_)[0],
            "final_state": grid(self.final_state_)[0],
        }
        return json.dumps(payload, indent=1, sort_keys=True)

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json() + "\n")
        return path

    @classmethod
    def from_json(cls, text: str) -> "EchoStateRegressor":
        payload = json.loads(text)
        if payload.get("model") != "esn":
            raise ValueError("not an echo-state model dump")
        model = cls(**payload["params"])
        model.n_features_in_ = payload["n_features_in"]
        model.w_in_ = np.asarray(payload["w_in"], dtype=np.float64)
        model.w_r_ = np.asarray(payload["w_r"], dtype=np.float64)
        model.w_out_ = np.asarray(payload["w_out"], dtype=np.float64)
        model.final_state_ = np.asarray(payload["final_state"], dtype=np.float64)
        return model

    @classmethod
    def load(cls, path) -> "EchoStateRegressor":
        return cls.from_json(Path(path).read_text())
