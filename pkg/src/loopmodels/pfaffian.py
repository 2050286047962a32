"""Pfaffians of real antisymmetric matrices by pivoted skew elimination."""
from __future__ import annotations

import numpy as np


class PfaffianError(ValueError):
    pass


def _check(M: np.ndarray, tol: float) -> np.ndarray:
    A = np.array(M, dtype=float, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise PfaffianError("matrix must be square")
    n = A.shape[0]
    if n % 2:
        raise PfaffianError(f"odd dimension {n}")
    scale = max(1.0, float(np.max(np.abs(A)))) if n else 1.0
    if n and np.max(np.abs(A + A.T)) > tol * scale:
        raise PfaffianError("matrix is not antisymmetric")
    return A


def slog_pfaffian(M: np.ndarray, tol: float = 1e-12) -> tuple[float, float]:
    """Return (sign, log|Pf M|); sign is 0 for a singular matrix."""
    A = _check(M, tol)
    n = A.shape[0]
    sign, logabs = 1.0, 0.0
    for k in range(0, n - 1, 2):
        # bring the largest entry of column k (below the diagonal) to row k+1
        kp = k + 1 + int(np.argmax(np.abs(A[k + 1:, k])))
        if kp != k + 1:
            A[[k + 1, kp], :] = A[[kp, k + 1], :]
            A[:, [k + 1, kp]] = A[:, [kp, k + 1]]
            sign = -sign
        piv = A[k, k + 1]
        if piv == 0.0:
            return 0.0, -np.inf
        sign *= np.sign(piv)
        logabs += np.log(abs(piv))
        if k + 2 < n:
            tau = A[k, k + 2:] / piv
            # skew rank-2 update of the trailing block
            u = A[k + 2:, k + 1]
            A[k + 2:, k + 2:] += np.outer(tau, u) - np.outer(u, tau)
    return float(sign), float(logabs)


def pfaffian(M: np.ndarray, tol: float = 1e-12) -> float:
    s, la = slog_pfaffian(M, tol)
    return 0.0 if s == 0 else s * float(np.exp(la))


def pfaffian_abs_log(M: np.ndarray) -> float:
    """log|Pf M| from a LU determinant; used where only the magnitude matters."""
    if len(M) == 0:
        return 0.0
    s, ld = np.linalg.slogdet(M)
    return -np.inf if s == 0 else 0.5 * float(ld)
