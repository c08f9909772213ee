"""Dense linear algebra shared by the regressors.

Two operations live here: a ridge solver on the normal equations (used by
the reservoir readout and the fuzzy-consequent estimation, whose largest
system is 2187 x 2187) and a spectral-radius estimator used to rescale
reservoir weight matrices.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .rng import Rng

# fixed seed for the power-iteration start vector so repeated calls on the
# same matrix return the same value
_POWER_SEED = 0x5EEDBA5E


class SingularSystemError(np.linalg.LinAlgError):
    pass


class PowerIterationError(RuntimeError):
    """Raised when the spectral-radius estimate fails to settle.

    Carries the last estimate so callers can decide whether it is usable.
    """

    def __init__(self, message: str, last_estimate: float):
        super().__init__(message)
        self.last_estimate = last_estimate


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return a 2-D float64 array with finite entries."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError(f"{name} contains non-finite entries")
    return m


def ridge_solve(a, b, lam: float) -> np.ndarray:
    """Solve min ||A w - b||^2 + lam ||w||^2 via the normal equations.

    Uses a Cholesky factorization of (A^T A + lam I).  With lam = 0 the
    Gram matrix must be nonsingular.
    """
    a = as_matrix(a, "A")
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"A has {a.shape[0]} rows but b has {b.shape[0]}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError("A must have at least one row and one column")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    gram = a.T @ a
    if lam > 0:
        gram[np.diag_indices_from(gram)] += lam
    rhs = a.T @ b
    try:
        factor = cho_factor(gram, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        if lam == 0:
            raise SingularSystemError(
                "normal equations are singular; pass lam > 0 to regularize"
            ) from exc
        raise
    return cho_solve(factor, rhs, check_finite=False)


def _max_abs_eig_2x2(h11: float, h12: float, h21: float, h22: float) -> float:
    tr = h11 + h22
    det = h11 * h22 - h12 * h21
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        r = np.sqrt(disc)
        return max(abs((tr + r) / 2.0), abs((tr - r) / 2.0))
    return float(np.sqrt(det))


def _ritz_value(m: np.ndarray, v: np.ndarray, depth: int) -> float:
    # Rayleigh-Ritz over the short Krylov basis {v, Mv, ..., M^(depth-1) v}:
    # max-modulus eigenvalue of the projected matrix.  depth >= 3 is needed
    # because real matrices routinely carry a complex conjugate dominant
    # pair (a single Rayleigh quotient never settles on those).
    cols = [v]
    cur = v
    for _ in range(depth - 1):
        cur = m @ cur
        w = cur.copy()
        for q in cols:
            w -= (q @ w) * q
        for q in cols:
            w -= (q @ w) * q
        nw = np.linalg.norm(w)
        if nw <= 1e-12 * max(1.0, float(np.linalg.norm(cur))):
            break
        cols.append(w / nw)
    q_mat = np.column_stack(cols)
    h = q_mat.T @ (m @ q_mat)
    if h.shape[0] == 1:
        return abs(float(h[0, 0]))
    if h.shape[0] == 2:
        return _max_abs_eig_2x2(h[0, 0], h[0, 1], h[1, 0], h[1, 1])
    return float(np.max(np.abs(np.linalg.eigvals(h))))


def spectral_radius(m, tol: float = 1e-9, max_iter: int = 10000,
                    rng: Rng | None = None) -> float:
    """Largest absolute eigenvalue, estimated by power iteration.

    The start vector comes from a seeded stream (deterministic by
    default).  Convergence is declared once successive estimates agree
    within ``tol`` twice in a row; otherwise :class:`PowerIterationError`
    is raised carrying the last estimate.
    """
    m = as_matrix(m, "M")
    d = m.shape[0]
    if d != m.shape[1]:
        raise ValueError(f"M must be square, got {m.shape}")
    if rng is None:
        rng = Rng(_POWER_SEED)
    v = rng.uniform_array(d, -1.0, 1.0)
    nv = np.linalg.norm(v)
    while nv < 1e-12:  # astronomically unlikely, but keep the contract total
        v = rng.uniform_array(d, -1.0, 1.0)
        nv = np.linalg.norm(v)
    v /= nv
    depth = min(4, d)
    prev = np.inf
    est = 0.0
    stable = 0
    for _ in range(max_iter):
        w = m @ v
        nw = float(np.linalg.norm(w))
        if nw < 1e-300:
            return 0.0
        est = _ritz_value(m, v, depth)
        if abs(est - prev) < tol:
            stable += 1
            if stable >= 2:
                return est
        else:
            stable = 0
        prev = est
        v = w / nw
    raise PowerIterationError(
        f"spectral radius did not converge within {max_iter} iterations "
        f"(last estimate {est:.6g})",
        last_estimate=est,
    )
