"""Unitary DFT, per-frequency permutation application, and Dirac combs.

The DFT is unitary (forward and inverse each carry 1/sqrt(L)) so that the
transform of a comb with q spikes is exactly the comb with L/q spikes; lp
comparisons are unaffected since originals and permuted matrices share the
convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jsonio
from .errors import DimensionMismatchError, DocumentError, InvalidParameterError
from .filters import FilterMatrix
from .rng import make_rng


def dft(v: np.ndarray) -> np.ndarray:
    """Unitary DFT of a vector (or of the last axis of an array)."""
    v = np.asarray(v)
    return np.fft.fft(v, axis=-1) / np.sqrt(v.shape[-1])


def idft(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`dft`."""
    v = np.asarray(v)
    return np.fft.ifft(v, axis=-1) * np.sqrt(v.shape[-1])


@dataclass(frozen=True)
class PermutationSequence:
    """One permutation of {0..N-1} per frequency bin, as image arrays."""

    perms: np.ndarray  # (L, N) int64, row w is the image array of sigma_w

    def __post_init__(self):
        arr = np.array(self.perms, dtype=np.int64, order="C", copy=True)
        if arr.ndim != 2 or min(arr.shape) < 1:
            raise InvalidParameterError(f"permutation table must be (L, N), got shape {arr.shape}")
        n = arr.shape[1]
        if not np.all(np.sort(arr, axis=1) == np.arange(n)):
            raise InvalidParameterError("every row must be a bijection on {0..N-1}")
        arr.flags.writeable = False
        object.__setattr__(self, "perms", arr)

    @property
    def length(self) -> int:
        return self.perms.shape[0]

    @property
    def sources(self) -> int:
        return self.perms.shape[1]

    def inverse(self) -> "PermutationSequence":
        inv = np.empty_like(self.perms)
        rows = np.arange(self.length)[:, None]
        inv[rows, self.perms] = np.arange(self.sources)[None, :]
        return PermutationSequence(inv)

    def is_identity(self) -> bool:
        return bool(np.all(self.perms == np.arange(self.sources)))

    def constant_perm(self):
        """The common image array if every frequency shares it, else None."""
        if np.all(self.perms == self.perms[0]):
            return self.perms[0].copy()
        return None

    @staticmethod
    def identity(L: int, N: int) -> "PermutationSequence":
        return PermutationSequence(np.tile(np.arange(N, dtype=np.int64), (L, 1)))

    @staticmethod
    def constant(L: int, perm) -> "PermutationSequence":
        return PermutationSequence(np.tile(np.asarray(perm, dtype=np.int64), (L, 1)))


def random_permutation_sequence(L: int, N: int, seed: int) -> PermutationSequence:
    """L i.i.d. uniform permutations of {0..N-1} (identity included)."""
    rng = make_rng(seed, "perm-seq")
    table = np.stack([rng.permutation(N) for _ in range(L)])
    return PermutationSequence(table)


def apply_frequency_permutations(A: FilterMatrix, s: PermutationSequence) -> FilterMatrix:
    """Permute the columns of A independently in each frequency bin.

    Output entry (i, j) takes the frequency-w coefficient of column s_w(j),
    transformed back to the time domain. The all-identity and constant
    sequences short-circuit to exact column reindexing (no transform
    round-off).
    """
    if s.length != A.filter_len or s.sources != A.sources:
        raise DimensionMismatchError(
            f"sequence (L={s.length}, N={s.sources}) does not match matrix "
            f"(L={A.filter_len}, N={A.sources})"
        )
    const = s.constant_perm()
    if const is not None:
        return FilterMatrix(A.entries[:, const, :])
    freq = dft(A.entries)
    L = A.filter_len
    permuted = freq[:, s.perms.T, np.arange(L)[None, :]]
    return FilterMatrix(idft(permuted))


@dataclass(frozen=True)
class CombSpec:
    """Parameters (L, q, n, m) of a translated, modulated unit Dirac comb."""

    L: int
    q: int
    n: int = 0
    m: int = 0

    def __post_init__(self):
        if self.L < 1 or self.q < 1:
            raise InvalidParameterError(f"need L, q >= 1, got L={self.L}, q={self.q}")
        if self.L % self.q != 0:
            raise InvalidParameterError(f"spike count q={self.q} must divide L={self.L}")
        if not (0 <= self.n < self.step):
            raise InvalidParameterError(f"translation n={self.n} out of range [0, {self.step})")
        if not (0 <= self.m < self.q):
            raise InvalidParameterError(f"modulation m={self.m} out of range [0, {self.q})")

    @property
    def step(self) -> int:
        return self.L // self.q


def make_comb(c: CombSpec) -> np.ndarray:
    """q unit-energy spikes of step L/q, shifted by n and modulated by m.

    entries[t] = exp(2i pi m (t-n)/L) / sqrt(q) at t = n (mod L/q), else 0.
    """
    out = np.zeros(c.L, dtype=np.complex128)
    t = c.n + c.step * np.arange(c.q)
    out[t] = np.exp(2j * np.pi * c.m * (t - c.n) / c.L) / np.sqrt(c.q)
    return out


@dataclass(frozen=True)
class CombDetection:
    """Outcome of matching a difference vector against one comb family."""

    scale: complex | None
    translation: int | None
    modulation: int | None
    zero_difference: bool = False

    @property
    def found(self) -> bool:
        return self.scale is not None


def detect_comb_difference(x, y, q: int, tol: float = 1e-9) -> CombDetection:
    """Test whether x - y is proportional to some comb with q spikes.

    Projects the difference on each of the L orthonormal combs (q fixed, all
    translations and modulations) and accepts the best if the residual is at
    most tol times ||x - y||. Ties pick the smallest (n, m).
    """
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionMismatchError("x and y must be 1-d vectors of equal length")
    L = x.shape[0]
    if L % q != 0:
        raise InvalidParameterError(f"spike count q={q} must divide L={L}")
    d = x - y
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        return CombDetection(None, None, None, zero_difference=True)
    p = L // q
    best = None
    for n in range(p):
        for m in range(q):
            comb = make_comb(CombSpec(L, q, n, m))
            coeff = complex(np.vdot(comb, d))  # combs are unit-norm
            resid = float(np.linalg.norm(d - coeff * comb))
            if best is None or resid < best[0]:
                best = (resid, coeff, n, m)
    resid, coeff, n, m = best
    if resid <= tol * norm:
        return CombDetection(coeff, n, m)
    return CombDetection(None, None, None)


def to_document(s: PermutationSequence) -> dict:
    return {
        "L": s.length,
        "N": s.sources,
        "perms": [[int(v) for v in row] for row in s.perms],
    }


def from_document(doc) -> PermutationSequence:
    if not isinstance(doc, dict):
        raise DocumentError("permutation-sequence document must be a JSON object")
    try:
        L, N, rows = int(doc["L"]), int(doc["N"]), doc["perms"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"permutation-sequence document missing/invalid field: {exc}") from exc
    if not isinstance(rows, list) or len(rows) != L or any(len(r) != N for r in rows):
        raise DimensionMismatchError(f"expected {L} rows of {N} images")
    return PermutationSequence(np.asarray(rows, dtype=np.int64))


def dumps(s: PermutationSequence) -> str:
    return jsonio.dumps(to_document(s))


def loads(text: str) -> PermutationSequence:
    return from_document(jsonio.loads(text))
