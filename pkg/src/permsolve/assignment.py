"""Bistochastic transversals and matching-count analysis of permutation sequences.

The guaranteed threshold is 2*alpha(N): every N x N bistochastic matrix has a
permutation whose entries all reach it, found here by augmenting-path
bipartite matching with a lexicographically-smallest refinement for
determinism.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ContractError, InternalContradictionError, InvalidParameterError
from .rng import make_rng
from .sparsity import alpha
from .spectral import PermutationSequence


@dataclass(frozen=True)
class CountMatrix:
    """N x N matching counts of a permutation sequence; rows/cols sum to L."""

    entries: np.ndarray  # (N, N) int64
    total: int

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.int64, order="C", copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidParameterError(f"count matrix must be square, got shape {arr.shape}")
        if np.any(arr < 0):
            raise InvalidParameterError("count matrix entries must be nonnegative")
        if np.any(arr.sum(axis=0) != self.total) or np.any(arr.sum(axis=1) != self.total):
            raise InvalidParameterError(f"every row and column must sum to {self.total}")
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class BistochasticMatrix:
    """Nonnegative square matrix with unit row and column sums (within 1e-9)."""

    entries: np.ndarray  # (N, N) float64

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.float64, order="C", copy=True)
        _validate_bistochastic(arr, tol=1e-9)
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def _validate_bistochastic(arr: np.ndarray, tol: float) -> None:
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise InvalidParameterError(f"matrix must be square, got shape {arr.shape}")
    if np.any(arr < 0):
        raise ContractError("bistochastic matrix entries must be nonnegative")
    row_dev = float(np.max(np.abs(arr.sum(axis=1) - 1.0)))
    col_dev = float(np.max(np.abs(arr.sum(axis=0) - 1.0)))
    if max(row_dev, col_dev) > tol:
        raise ContractError(
            f"row/column sums deviate from 1 by {max(row_dev, col_dev):.3e} (tolerance {tol:.0e})"
        )


def count_matrix(s: PermutationSequence) -> CountMatrix:
    """C[j][n] = number of frequencies whose permutation maps j to n."""
    N = s.sources
    counts = np.zeros((N, N), dtype=np.int64)
    for j in range(N):
        counts[j] = np.bincount(s.perms[:, j], minlength=N)
    return CountMatrix(counts, total=s.length)


def _has_perfect_matching(adj, rows, used_cols) -> bool:
    """Kuhn augmenting-path feasibility on the rows not yet fixed."""
    match_col: dict[int, int] = {}

    def augment(r, seen):
        for c in adj[r]:
            if c in used_cols or c in seen:
                continue
            seen.add(c)
            if c not in match_col or augment(match_col[c], seen):
                match_col[c] = r
                return True
        return False

    for r in rows:
        if not augment(r, set()):
            return False
    return True


def _lex_smallest_transversal(adj, N: int):
    """Lexicographically smallest perfect matching of rows 0..N-1, or None."""
    if not _has_perfect_matching(adj, range(N), frozenset()):
        return None
    chosen: list[int] = []
    used: set[int] = set()
    for j in range(N):
        for c in adj[j]:
            if c in used:
                continue
            if _has_perfect_matching(adj, range(j + 1, N), used | {c}):
                chosen.append(c)
                used.add(c)
                break
    return tuple(chosen)


def hall_transversal(B, threshold: float):
    """Permutation whose selected entries of B all reach the threshold, or None.

    B may be a BistochasticMatrix or a square array validated here (row and
    column sums within 1e-6 of one). At thresholds at most 2*alpha(N) a
    transversal is mathematically guaranteed, so failure there raises
    InternalContradictionError instead of returning None.
    """
    if isinstance(B, BistochasticMatrix):
        arr = B.entries
    else:
        arr = np.asarray(B, dtype=np.float64)
        _validate_bistochastic(arr, tol=1e-6)
    N = arr.shape[0]
    adj = [[n for n in range(N) if arr[j, n] >= threshold] for j in range(N)]
    perm = _lex_smallest_transversal(adj, N)
    if perm is None and Fraction(threshold) <= 2 * alpha(N):
        raise InternalContradictionError(
            f"no transversal at guaranteed threshold {threshold} for a bistochastic input"
        )
    return perm


def best_matching_global_perm(s: PermutationSequence):
    """Global permutation maximizing guaranteed per-source matching counts.

    Normalizes the count matrix to a bistochastic one and extracts the
    transversal at the guaranteed threshold 2*alpha(N) using exact rational
    comparisons; returns (perm, min_j C[j, perm[j]]).
    """
    C = count_matrix(s)
    N, L = C.size, C.total
    bound = 2 * alpha(N)
    adj = [[n for n in range(N) if Fraction(int(C.entries[j, n]), L) >= bound] for j in range(N)]
    perm = _lex_smallest_transversal(adj, N)
    if perm is None:
        raise InternalContradictionError(
            f"no transversal at threshold 2*alpha({N}) for a matching-count matrix"
        )
    min_count = int(min(C.entries[j, perm[j]] for j in range(N)))
    return perm, min_count


def sharpness_constant(N: int) -> int:
    """(k0+1)(N-k0) with k0 = N//2: the block size of the sharp construction.

    Equals 1/(2*alpha(N)), so the guaranteed count 2*L*alpha(N) is exactly
    L / sharpness_constant(N).
    """
    k0 = N // 2 if N % 2 == 0 else (N - 1) // 2
    return (k0 + 1) * (N - k0)


def sharp_permutation_sequence(N: int, L: int) -> PermutationSequence:
    """Permutation sequence witnessing that the 2*L*alpha(N) bound is tight.

    Builds the L x N table whose left k0+1 columns cyclically rotate the
    block pattern (1, .., k0, U), U stacking constant runs of k0+1 .. N; each
    row is completed with its missing values in ascending order. For every
    global permutation some source then matches at most 2*L*alpha(N)
    frequencies.
    """
    if N < 2:
        raise InvalidParameterError(f"need at least 2 sources, got N={N}")
    k0 = N // 2 if N % 2 == 0 else (N - 1) // 2
    block = (k0 + 1) * (N - k0)
    if L < 1 or L % block != 0:
        raise InvalidParameterError(
            f"L={L} must be a positive multiple of (k0+1)(N-k0) = {block} for N={N}"
        )
    col_height = L // (k0 + 1)  # height of one block in the left part
    sub_height = L // block  # height of one constant run inside U
    table = np.empty((L, N), dtype=np.int64)
    for row in range(L):
        r, o = divmod(row, col_height)  # block row and offset inside it
        left = []
        for c in range(k0 + 1):
            idx = (r - c) % (k0 + 1)
            if idx == k0:  # the U block
                left.append(k0 + 1 + o // sub_height)
            else:
                left.append(idx + 1)
        missing = sorted(set(range(1, N + 1)) - set(left))
        table[row] = np.asarray(left + missing) - 1  # 0-based images
    return PermutationSequence(table)


def sinkhorn_normalize(matrix, tol: float = 1e-10, max_iters: int = 100_000) -> np.ndarray:
    """Alternate row/column normalization of a positive matrix until balanced."""
    arr = np.array(matrix, dtype=np.float64, copy=True)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidParameterError(f"matrix must be square, got shape {arr.shape}")
    if np.any(arr <= 0):
        raise InvalidParameterError("Sinkhorn normalization needs strictly positive entries")
    for _ in range(max_iters):
        arr /= arr.sum(axis=1, keepdims=True)
        arr /= arr.sum(axis=0, keepdims=True)
        dev = max(
            float(np.max(np.abs(arr.sum(axis=1) - 1.0))),
            float(np.max(np.abs(arr.sum(axis=0) - 1.0))),
        )
        if dev <= tol:
            return arr
    return arr


def sinkhorn_bistochastic(seed: int, N: int, iters: int = 1000) -> BistochasticMatrix:
    """Seeded random bistochastic matrix (Sinkhorn-normalized log-normal)."""
    if N < 1 or iters < 1:
        raise InvalidParameterError(f"need N >= 1 and iters >= 1, got N={N}, iters={iters}")
    rng = make_rng(seed, "sinkhorn")
    start = np.exp(rng.standard_normal((N, N)))
    return BistochasticMatrix(sinkhorn_normalize(start, max_iters=iters))
