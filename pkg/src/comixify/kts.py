"""Kernel temporal segmentation.

Splits a frame sequence into visually coherent segments by minimizing total
within-segment feature scatter with dynamic programming. The segment count
is picked by a penalized criterion, restricted to at least ``min_segments``
so downstream selection always has enough segments to choose from.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintError
from .features import FeatureMatrix

DEFAULT_PENALTY_LAMBDA = 1.0


@dataclass(frozen=True)
class KernelMatrix:
    """Linear-kernel Gram matrix of the per-frame descriptors."""

    K: np.ndarray

    @property
    def T(self) -> int:
        return self.K.shape[0]


@dataclass
class Segmentation:
    change_points: list
    cost: float
    T: int
    segments: list = field(init=False)

    def __post_init__(self):
        bounds = [0] + list(self.change_points) + [self.T]
        self.segments = [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]

    @property
    def m(self) -> int:
        return len(self.segments)

    def to_json(self) -> dict:
        return {"change_points": [int(c) for c in self.change_points],
                "cost": float(self.cost), "m": self.m}


def kernel_matrix(features: FeatureMatrix) -> KernelMatrix:
    X = np.asarray(features.data, dtype=np.float64)
    return KernelMatrix(K=X @ X.T)


def scatter_table(K: np.ndarray) -> np.ndarray:
    """S[a, b] = within-segment scatter of frames [a, b), b > a.

    Uses the kernel-trace identity: sum of diagonal terms minus the block
    mean, so only cumulative sums of K are needed.
    """
    T = K.shape[0]
    diag_cum = np.concatenate([[0.0], np.cumsum(np.diag(K))])
    block = np.zeros((T + 1, T + 1))
    block[1:, 1:] = np.cumsum(np.cumsum(K, axis=0), axis=1)

    S = np.zeros((T + 1, T + 1))
    for a in range(T):
        for b in range(a + 1, T + 1):
            block_sum = block[b, b] - block[a, b] - block[b, a] + block[a, a]
            S[a, b] = (diag_cum[b] - diag_cum[a]) - block_sum / (b - a)
    return S


def _suffix_dp(S: np.ndarray, T: int, m_max: int):
    """Suffix DP over segment counts.

    B[j, t] = minimal scatter of segmenting [t, T) into j segments;
    ptr[j, t] = earliest split achieving it. Picking the earliest split at
    every level makes the reconstructed change-point list the
    lexicographically smallest optimum.
    """
    INF = math.inf
    B = np.full((m_max + 1, T + 1), INF)
    ptr = np.zeros((m_max + 1, T + 1), dtype=np.int64)
    for t in range(T):
        B[1, t] = S[t, T]
    for j in range(2, m_max + 1):
        # [t, T) into j segments needs at least j frames
        for t in range(T - j + 1):
            # first segment is [t, s); remaining j-1 segments need j-1 frames
            s_lo, s_hi = t + 1, T - j + 2
            cand = S[t, s_lo:s_hi] + B[j - 1, s_lo:s_hi]
            k = int(np.argmin(cand))
            B[j, t] = cand[k]
            ptr[j, t] = s_lo + k
    return B, ptr


def _reconstruct(ptr: np.ndarray, m: int) -> list:
    cps = []
    t = 0
    for j in range(m, 1, -1):
        t = int(ptr[j, t])
        cps.append(t)
    return cps


def optimal_m_segmentation(K: KernelMatrix, m: int) -> Segmentation:
    """Exact optimum of the m-segment scatter objective (O(m T^2) DP)."""
    T = K.T
    if not 1 <= m <= T:
        raise ConstraintError(f"need 1 <= m <= T, got m={m}, T={T}")
    S = scatter_table(np.asarray(K.K, dtype=np.float64))
    B, ptr = _suffix_dp(S, T, m)
    return Segmentation(change_points=_reconstruct(ptr, m), cost=float(B[m, 0]), T=T)


def default_max_segments(T: int, min_segments: int) -> int:
    return max(min_segments, min(T, math.ceil(T / 5)))


def segment(features: FeatureMatrix, min_segments: int, max_segments: int | None = None,
            penalty_lambda: float = DEFAULT_PENALTY_LAMBDA) -> Segmentation:
    """Segment the sequence, choosing m in [min_segments, max_segments] by
    the penalized criterion cost(m) + lambda * m * log(T/m).

    Ties go to the smaller m; within one m the change-point list is the
    lexicographically smallest optimum.
    """
    T = features.T
    n = min_segments
    m_max = default_max_segments(T, n) if max_segments is None else max_segments
    if not 1 <= n <= m_max <= T:
        raise ConstraintError(f"need 1 <= n <= m_max <= T, got n={n}, "
                              f"m_max={m_max}, T={T}")

    K = kernel_matrix(features)
    S = scatter_table(K.K)
    B, ptr = _suffix_dp(S, T, m_max)

    best_m, best_score = None, math.inf
    for m in range(n, m_max + 1):
        score = B[m, 0] + penalty_lambda * m * math.log(T / m)
        if score < best_score:
            best_m, best_score = m, score
    return Segmentation(change_points=_reconstruct(ptr, best_m),
                        cost=float(B[best_m, 0]), T=T)
