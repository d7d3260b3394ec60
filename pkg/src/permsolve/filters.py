"""Filter-matrix data model, sparse random generation and serialization.

A filter matrix holds M*N circular filters of length L as a single complex
(M, N, L) array. Entries are stored complex even though generation draws real
coefficients: frequency permutations generally break Hermitian symmetry, so
permuted time-domain filters are complex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jsonio
from .errors import DimensionMismatchError, DocumentError, InvalidParameterError
from .rng import make_rng

UNIFORM = "uniform-random"
DISJOINT_BLOCKS = "disjoint-blocks"

#: Relative scale of the default zero tolerance (see ``default_zero_tol``).
ZERO_TOL_REL = 1e-9


@dataclass(frozen=True)
class FilterMatrix:
    """Dense M x N grid of length-L complex time-domain filters."""

    entries: np.ndarray  # (M, N, L) complex128, read-only

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.complex128, order="C", copy=True)
        if arr.ndim != 3:
            raise InvalidParameterError(f"filter grid must be 3-d (M, N, L), got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise InvalidParameterError(f"all dimensions must be >= 1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise InvalidParameterError("filter entries must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def channels(self) -> int:
        return self.entries.shape[0]

    @property
    def sources(self) -> int:
        return self.entries.shape[1]

    @property
    def filter_len(self) -> int:
        return self.entries.shape[2]

    def filter(self, i: int, j: int) -> np.ndarray:
        """Read-only view of the (i, j) filter."""
        return self.entries[i, j]

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries)))

    def allclose(self, other: "FilterMatrix", tol: float = 0.0) -> bool:
        if self.entries.shape != other.entries.shape:
            return False
        return bool(np.max(np.abs(self.entries - other.entries), initial=0.0) <= tol)


@dataclass(frozen=True)
class SparseSpec:
    """Sparsity level and support layout for random filter generation.

    Nonzero coefficients are i.i.d. standard real Gaussians in either mode.
    """

    k: int
    support_mode: str = UNIFORM

    def __post_init__(self):
        if self.k < 1:
            raise InvalidParameterError(f"sparsity level k must be >= 1, got {self.k}")
        if self.support_mode not in (UNIFORM, DISJOINT_BLOCKS):
            raise InvalidParameterError(f"unknown support mode {self.support_mode!r}")

    def validate_for(self, N: int, L: int) -> None:
        if self.k > L:
            raise InvalidParameterError(f"k={self.k} exceeds filter length L={L}")
        if self.support_mode == DISJOINT_BLOCKS and N * self.k > L:
            raise InvalidParameterError(
                f"disjoint-blocks needs N*k <= L, got N={N}, k={self.k}, L={L}"
            )


def default_zero_tol(entries: np.ndarray) -> float:
    """Relative zero tolerance: 1e-9 times the max magnitude (1.0 if all-zero).

    Keeps inverse-DFT round-off from inflating sparsity counts.
    """
    peak = float(np.max(np.abs(entries), initial=0.0))
    return ZERO_TOL_REL * (peak if peak > 0.0 else 1.0)


def _gaussian_nonzero(rng: np.random.Generator, k: int) -> np.ndarray:
    vals = rng.standard_normal(k)
    while np.any(vals == 0.0):  # exact-zero draws would break the ||a||_0 = k contract
        idx = vals == 0.0
        vals[idx] = rng.standard_normal(int(np.count_nonzero(idx)))
    return vals


def generate_sparse_matrix(M: int, N: int, L: int, spec: SparseSpec, seed: int) -> FilterMatrix:
    """Draw an M x N matrix of independent k-sparse Gaussian filters.

    Uniform mode picks each support as an independent uniform k-subset of
    {0..L-1}; disjoint-blocks mode gives the N filters of each row pairwise
    disjoint contiguous blocks of length k. Identical (arguments, seed) yield
    a bit-identical matrix: per-filter streams are keyed by (seed, i, j).
    """
    if M < 1 or N < 1 or L < 1:
        raise InvalidParameterError(f"need M, N, L >= 1, got ({M}, {N}, {L})")
    spec.validate_for(N, L)
    entries = np.zeros((M, N, L), dtype=np.complex128)
    for i in range(M):
        if spec.support_mode == DISJOINT_BLOCKS:
            row_rng = make_rng(seed, "row-blocks", i)
            blocks = row_rng.choice(L // spec.k, size=N, replace=False)
        for j in range(N):
            rng = make_rng(seed, "filter", i, j)
            if spec.support_mode == UNIFORM:
                supp = rng.choice(L, size=spec.k, replace=False)
            else:
                supp = int(blocks[j]) * spec.k + np.arange(spec.k)
            entries[i, j, supp] = _gaussian_nonzero(rng, spec.k)
    return FilterMatrix(entries)


def support(filt: np.ndarray, zero_tol: float) -> np.ndarray:
    """Indices t with |filt[t]| > zero_tol, ascending."""
    if zero_tol < 0:
        raise InvalidParameterError(f"zero_tol must be >= 0, got {zero_tol}")
    return np.flatnonzero(np.abs(np.asarray(filt)) > zero_tol)


def to_document(matrix: FilterMatrix) -> dict:
    """Filter-matrix document: filters listed row-major as [re, im] pair lists."""
    filters = [
        [[float(z.real), float(z.imag)] for z in matrix.entries[i, j]]
        for i in range(matrix.channels)
        for j in range(matrix.sources)
    ]
    return {
        "M": matrix.channels,
        "N": matrix.sources,
        "L": matrix.filter_len,
        "filters": filters,
    }


def from_document(doc) -> FilterMatrix:
    if not isinstance(doc, dict):
        raise DocumentError("filter-matrix document must be a JSON object")
    try:
        M, N, L = int(doc["M"]), int(doc["N"]), int(doc["L"])
        raw = doc["filters"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"filter-matrix document missing/invalid field: {exc}") from exc
    if not isinstance(raw, list) or len(raw) != M * N:
        raise DimensionMismatchError(
            f"expected {M * N} filters (row-major), got {len(raw) if isinstance(raw, list) else type(raw)}"
        )
    entries = np.empty((M, N, L), dtype=np.complex128)
    for idx, filt in enumerate(raw):
        if not isinstance(filt, list) or len(filt) != L:
            raise DimensionMismatchError(f"filter #{idx} must list L={L} entries, got {len(filt)}")
        for t, pair in enumerate(filt):
            if not isinstance(pair, list) or len(pair) != 2:
                raise DocumentError(f"filter #{idx} entry {t} must be an [re, im] pair")
            entries[idx // N, idx % N, t] = complex(float(pair[0]), float(pair[1]))
    return FilterMatrix(entries)


def dumps(matrix: FilterMatrix) -> str:
    return jsonio.dumps(to_document(matrix))


def loads(text: str) -> FilterMatrix:
    return from_document(jsonio.loads(text))
