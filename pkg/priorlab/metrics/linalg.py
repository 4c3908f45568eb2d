"""Symmetric eigendecomposition by cyclic Jacobi rotations."""

from typing import Tuple

import numpy as np
from loguru import logger

from priorlab.errors import MetricError

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def _off_norm(a: np.ndarray) -> float:
    return float(np.sqrt(np.sum(a**2) - np.sum(np.diag(a) ** 2)))


def check_symmetric(m: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise MetricError(f"expected a square matrix, got {m.shape}")
    scale = max(1.0, float(np.linalg.norm(m)))
    if np.linalg.norm(m - m.T) > tol * scale:
        raise MetricError(
            "matrix is not symmetric within tolerance "
            f"({np.linalg.norm(m - m.T):.3e})"
        )
    return m


def jacobi_eigh(
    m: np.ndarray,
    tol: float = JACOBI_TOL,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigenvalues (descending) and column eigenvectors of a symmetric m.

    Each sweep zeroes every off-diagonal pair once; iteration stops
    when the off-diagonal Frobenius norm falls below ``tol * ||m||_F``.
    """
    a = check_symmetric(m).copy()
    a = 0.5 * (a + a.T)
    k = a.shape[0]
    v = np.eye(k)
    threshold = tol * float(np.linalg.norm(a))
    if threshold == 0.0:
        return np.zeros(k), v

    for sweep in range(max_sweeps):
        if _off_norm(a) < threshold:
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (
                    abs(theta) + np.sqrt(theta * theta + 1.0)
                )
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    else:
        if _off_norm(a) >= threshold:
            logger.warning(
                f"Jacobi did not converge in {max_sweeps} sweeps "
                f"(off-diagonal norm {_off_norm(a):.3e})"
            )

    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], v[:, order]


def sym_sqrt(m: np.ndarray) -> np.ndarray:
    """Principal square root of a symmetric PSD matrix."""
    values, vectors = jacobi_eigh(m)
    root = np.sqrt(np.clip(values, 0.0, None))
    out = (vectors * root) @ vectors.T
    return 0.5 * (out + out.T)
