"""Sparsity measures, recovery metrics and well-posedness thresholds.

``lp_norm`` follows the objective convention used throughout the package: for
0 < p < inf it returns the sum of |x|^p (the p-th power, not its root), p = 0
counts entries above a zero tolerance, and p = inf is the max magnitude.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .errors import (
    DimensionMismatchError,
    GuardViolationError,
    InvalidParameterError,
    UndefinedSNRError,
)
from .filters import FilterMatrix, default_zero_tol
from .spectral import dft

#: Largest N for which exhaustive N! enumeration of global permutations runs.
PERM_ENUM_GUARD = 8

#: Finite SNR sentinel recorded for bit-exact recoveries (histogram-friendly).
EXACT_MATCH_SNR_DB = 350.0


def _check_enum_guard(N: int) -> None:
    if N > PERM_ENUM_GUARD:
        raise GuardViolationError(
            f"N={N} too large for exhaustive N! permutation enumeration (max {PERM_ENUM_GUARD})"
        )


def _check_same_shape(a: FilterMatrix, b: FilterMatrix) -> None:
    if a.entries.shape != b.entries.shape:
        raise DimensionMismatchError(
            f"matrices have different shapes {a.entries.shape} vs {b.entries.shape}"
        )


def lp_norm(A, p: float, zero_tol: float | None = None) -> float:
    """Sparsity objective of a filter matrix or plain array.

    p = 0 counts entries with |x| > zero_tol (default: 1e-9 times the max
    magnitude); 0 < p < inf returns sum |x|^p; p = inf returns max |x|.
    """
    if p < 0:
        raise InvalidParameterError(f"norm order p must be >= 0, got {p}")
    entries = A.entries if isinstance(A, FilterMatrix) else np.asarray(A)
    mags = np.abs(entries)
    if p == 0:
        tol = default_zero_tol(entries) if zero_tol is None else zero_tol
        return float(np.count_nonzero(mags > tol))
    if math.isinf(p):
        return float(np.max(mags, initial=0.0))
    return float(np.sum(mags**p))


def alpha(N: int) -> Fraction:
    """Relative-sparsity threshold k/L below which recovery is well-posed."""
    if N < 1:
        raise InvalidParameterError(f"source count must be >= 1, got {N}")
    if N % 2 == 0:
        return Fraction(2, N * (N + 2))
    return Fraction(2, (N + 1) ** 2)


def alpha_weak(N: int) -> Fraction:
    """Pigeonhole variant 1/(2 N!), much more conservative than alpha."""
    if N < 1:
        raise InvalidParameterError(f"source count must be >= 1, got {N}")
    return Fraction(1, 2 * math.factorial(N))


def alpha_caratheodory(N: int) -> Fraction:
    """Convex-decomposition variant: half of 1/(1 + (N-1)^2)."""
    if N < 1:
        raise InvalidParameterError(f"source count must be >= 1, got {N}")
    return Fraction(1, 2 * (1 + (N - 1) ** 2))


@dataclass(frozen=True)
class DeltaReport:
    """Permutation size: max count of differing frequencies at the best global perm."""

    delta: int
    best_global_perm: tuple
    per_pair: np.ndarray  # (M, N) int, counts at best_global_perm


def delta(A_tilde: FilterMatrix, A: FilterMatrix, zero_tol: float | None = None) -> DeltaReport:
    """Minimize over global perms the max per-filter count of differing bins.

    Counting happens in the frequency domain; the zero tolerance defaults to
    1e-9 times the larger of the two max DFT magnitudes (symmetric in the
    arguments), so values survive round-off through two transforms.
    """
    _check_same_shape(A_tilde, A)
    N = A.sources
    _check_enum_guard(N)
    ft = dft(A_tilde.entries)
    fa = dft(A.entries)
    if zero_tol is None:
        peak = max(np.max(np.abs(ft)), np.max(np.abs(fa)))
        zero_tol = 1e-9 * (peak if peak > 0 else 1.0)
    best = None
    for pi in itertools.permutations(range(N)):
        diff = np.abs(ft - fa[:, pi, :]) > zero_tol
        per_pair = diff.sum(axis=2)
        worst = int(per_pair.max())
        if best is None or worst < best[0]:
            best = (worst, pi, per_pair)
    worst, pi, per_pair = best
    return DeltaReport(delta=worst, best_global_perm=pi, per_pair=per_pair)


def is_equivalent(A_tilde: FilterMatrix, A: FilterMatrix, tol: float = 1e-9):
    """Global permutation pi with A_tilde = A[:, pi] entrywise, or None.

    The comparison threshold is tol times the max magnitude of A; ties pick
    the lexicographically smallest permutation.
    """
    _check_same_shape(A_tilde, A)
    N = A.sources
    _check_enum_guard(N)
    abs_tol = tol * max(A.max_abs(), 1e-300)
    for pi in itertools.permutations(range(N)):
        if np.max(np.abs(A_tilde.entries - A.entries[:, pi, :]), initial=0.0) <= abs_tol:
            return pi
    return None


def snr(A: FilterMatrix, A_hat: FilterMatrix):
    """Recovery SNR in dB and the best global permutation of A_hat.

    10 log10(||A||_2^2 / min_pi ||A - A_hat[:, pi]||_2^2); an exactly zero
    error reports +inf. Raises on an all-zero reference.
    """
    _check_same_shape(A, A_hat)
    N = A.sources
    _check_enum_guard(N)
    ref_energy = float(np.sum(np.abs(A.entries) ** 2))
    if ref_energy == 0.0:
        raise UndefinedSNRError("SNR is undefined for an all-zero reference matrix")
    best = None
    for pi in itertools.permutations(range(N)):
        err = float(np.sum(np.abs(A.entries - A_hat.entries[:, pi, :]) ** 2))
        if best is None or err < best[0]:
            best = (err, pi)
    err, pi = best
    if err == 0.0:
        return math.inf, pi
    return 10.0 * math.log10(ref_energy / err), pi


class WellPosedness(Enum):
    WELL_POSED = "well-posed"
    NOT_GUARANTEED = "not-guaranteed"


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def check_uncertainty_budget(k: int, Delta: int, L: int, prime: bool) -> WellPosedness:
    """Uncertainty-principle budget for sparsity k and permutation size Delta.

    Prime lengths use the additive budget 2k + Delta <= L; general lengths the
    multiplicative one 2k * Delta < L. A prime claim is re-verified.
    """
    if not (1 <= k <= L):
        raise InvalidParameterError(f"need 1 <= k <= L, got k={k}, L={L}")
    if not (0 <= Delta <= L):
        raise InvalidParameterError(f"need 0 <= Delta <= L, got Delta={Delta}")
    if prime:
        if not is_prime(L):
            raise InvalidParameterError(f"L={L} claimed prime but is composite")
        ok = 2 * k + Delta <= L
    else:
        ok = 2 * k * Delta < L
    return WellPosedness.WELL_POSED if ok else WellPosedness.NOT_GUARANTEED
