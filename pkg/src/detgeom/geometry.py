"""Euclidean embedding of symbols and observations into the zero-sum hyperplane.

Symbols go to the vertices of a regular simplex centred at the origin,

    x_i = e_i / (2N) - (1/(2N^2)) * sum_j e_j,

and an observation with posterior p goes to the centred log-posterior

    y_i = N log p_i - sum_j log p_j.

With these two maps ``softmax_i(-||y - x_i||^2)`` gives back p exactly, so
posterior probability decays like exp(-squared distance) and MAP detection is
nearest-neighbour search.

Embedded points are plain float arrays of length N (leading batch axes are
allowed in the vectorised helpers).
"""

from __future__ import annotations

import math

import numpy as np

from ._mathutil import softmax
from .errors import ErasureError
from .tolerances import PLANE_TOL


def _dim(alphabet_or_n) -> int:
    n = alphabet_or_n if isinstance(alphabet_or_n, (int, np.integer)) else len(alphabet_or_n)
    if n < 2:
        raise ValueError("the representation needs N >= 2")
    return int(n)


def embed_symbol(alphabet_or_n, i: int) -> np.ndarray:
    n = _dim(alphabet_or_n)
    if not 0 <= i < n:
        raise IndexError(f"symbol index {i} outside 0..{n - 1}")
    x = np.full(n, -1.0 / (2 * n * n))
    x[i] += 1.0 / (2 * n)
    return x


def symbol_matrix(alphabet_or_n) -> np.ndarray:
    """All symbol embeddings stacked as rows (an N x N matrix)."""
    n = _dim(alphabet_or_n)
    return np.eye(n) / (2 * n) - 1.0 / (2 * n * n)


def symbol_norm(n: int) -> float:
    """Common norm of every symbol embedding, (1/2N) sqrt((N-1)/N)."""
    return math.sqrt((n - 1) / n) / (2 * n)


def symbol_spacing(n: int) -> float:
    """Distance between any two distinct symbol embeddings, sqrt(2)/(2N)."""
    return math.sqrt(2.0) / (2 * n)


def embed_log_posterior(log_post) -> np.ndarray:
    """Embed from log posteriors (any additive constant per row is harmless).

    Works on the last axis, so a (..., N) batch maps to (..., N) points.
    """
    lp = np.asarray(log_post, dtype=float)
    if np.any(np.isneginf(lp)):
        raise ErasureError(
            "an observation with a zero posterior component has no embedding; "
            "channels whose outputs rule out an input symbol (erasures) are not representable"
        )
    if not np.all(np.isfinite(lp)):
        raise ValueError("log posteriors must be finite")
    n = lp.shape[-1]
    z = lp - lp.max(axis=-1, keepdims=True)
    z = z - z.mean(axis=-1, keepdims=True)
    # second pass removes the rounding residue of the first mean
    return n * (z - z.mean(axis=-1, keepdims=True))


def embed_observation(posterior) -> np.ndarray:
    """Embed an observation through its posterior vector over the alphabet."""
    p = np.asarray(posterior, dtype=float)
    if np.any(p < 0.0):
        raise ValueError("posterior components must be nonnegative")
    if np.any(p == 0.0):
        raise ErasureError(
            f"posterior {p} rules out an input symbol; the observation has no embedding"
        )
    return embed_log_posterior(np.log(p))


def embed_observation_from_likelihoods(loglik) -> np.ndarray:
    """Embed from log-likelihoods under equally likely input symbols."""
    loglik = np.asarray(loglik, dtype=float)
    if not np.all(np.isfinite(loglik)):
        if np.any(np.isneginf(loglik)):
            raise ErasureError("a zero likelihood has no embedding")
        raise ValueError("log-likelihoods must be finite")
    return embed_log_posterior(loglik)


def distance(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def squared_distances(points, symbols) -> np.ndarray:
    """||points[..., :] - symbols[i]||^2 for every row ``i`` of ``symbols``."""
    points = np.asarray(points, dtype=float)
    diff = points[..., None, :] - symbols
    return np.einsum("...ij,...ij->...i", diff, diff)


def posterior_from_point(point, symbols) -> np.ndarray:
    """softmax over i of -||point - symbols[i]||^2."""
    return softmax(-squared_distances(point, symbols))


def reconstruct_posterior(point, alphabet_or_n=None) -> np.ndarray:
    """Posterior over the alphabet read off the distances to the symbol simplex."""
    point = np.asarray(point, dtype=float)
    n = point.shape[-1] if alphabet_or_n is None else _dim(alphabet_or_n)
    if point.shape[-1] != n:
        raise ValueError(f"point has dimension {point.shape[-1]}, alphabet has {n}")
    return posterior_from_point(point, symbol_matrix(n))


def in_plane(point, tol=PLANE_TOL) -> bool:
    """True when the coordinates sum to zero (relative to their magnitude)."""
    point = np.asarray(point, dtype=float)
    scale = max(1.0, float(np.max(np.abs(point))) if point.size else 1.0)
    return bool(abs(point.sum()) <= tol * scale)


def reconstruction_kernel(d):
    """The distance-to-posterior weight exp(-d^2)."""
    return np.exp(-np.square(d))
