"""Constructive counterexamples: equally sparse, non-equivalent permutations.

For composite lengths the recovery problem is genuinely ambiguous: starting
from a pair of interleaved Dirac combs (one negated and shifted by half the
comb step), swapping the two columns on the frequencies where their
transforms differ produces a matrix with identical lp norms for every p that
is not a global permutation of the original. A two-entry perturbation makes
the pair non-trivial (family "lemma3"); choosing the perturbation support
away from the combs keeps the two columns disjoint and exactly k-sparse
(family "lemma4"). These bundles serve as negative controls for solvers and
uncertainty-budget checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import filters, jsonio, spectral
from .errors import ContractError, DocumentError, InvalidParameterError
from .filters import FilterMatrix
from .rng import make_rng
from .sparsity import WellPosedness, check_uncertainty_budget, delta, is_equivalent, lp_norm
from .spectral import CombSpec, PermutationSequence, apply_frequency_permutations, make_comb

LEMMA3 = "lemma3"
LEMMA4 = "lemma4"

NORM_ORDERS = (0.0, 0.5, 1.0, 2.0, float("inf"))


@dataclass(frozen=True)
class CounterexampleBundle:
    """Original matrix, permutation sequence, permuted matrix and claimed size."""

    family: str
    a: FilterMatrix
    seq: PermutationSequence
    a_tilde: FilterMatrix
    claimed_delta: int
    k: int
    k_prime: int | None = None

    @property
    def comb_sparsity(self) -> int:
        """Spike count of the underlying comb pair (k, or k' for lemma4)."""
        return self.k_prime if self.family == LEMMA4 else self.k


def validate_bundle(bundle: CounterexampleBundle) -> None:
    """Re-verify every bundle invariant; raises ContractError on violation.

    Checks that the permuted matrix matches applying the sequence, that the
    pair is not globally equivalent, that matrix and per-filter lp norms agree
    for p in {0, 0.5, 1, 2, inf}, that the measured permutation size matches
    the claim with 2 * comb_sparsity * delta = L, and that the uncertainty
    budget flags the instance as not guaranteed.
    """
    A, At = bundle.a, bundle.a_tilde
    L = A.filter_len
    scale = max(A.max_abs(), 1.0)
    replay = apply_frequency_permutations(A, bundle.seq)
    if np.max(np.abs(replay.entries - At.entries)) > 1e-10 * scale:
        raise ContractError("bundle matrix does not match applying its sequence")
    if is_equivalent(At, A) is not None:
        raise ContractError("bundle matrices are equivalent up to a global permutation")
    for p in NORM_ORDERS:
        na, nt = lp_norm(A, p), lp_norm(At, p)
        if abs(na - nt) > 1e-9 * max(na, nt, 1.0):
            raise ContractError(f"matrix l^{p} norms differ: {na} vs {nt}")
        for i in range(A.channels):
            for j in range(A.sources):
                fa = lp_norm(A.entries[i, j], p, filters.default_zero_tol(A.entries))
                ft = lp_norm(At.entries[i, j], p, filters.default_zero_tol(At.entries))
                if abs(fa - ft) > 1e-9 * max(fa, ft, 1.0):
                    raise ContractError(f"filter ({i},{j}) l^{p} norms differ: {fa} vs {ft}")
    measured = delta(At, A).delta
    if measured != bundle.claimed_delta:
        raise ContractError(f"measured delta {measured} != claimed {bundle.claimed_delta}")
    q = bundle.comb_sparsity
    if 2 * q * measured != L:
        raise ContractError(f"2*{q}*{measured} != L={L}")
    if check_uncertainty_budget(q, measured, L, prime=False) is not WellPosedness.NOT_GUARANTEED:
        raise ContractError("bundle unexpectedly satisfies the uncertainty budget")


def _swap_sequence(L: int, N: int, period: int) -> PermutationSequence:
    """Swap columns 0 and 1 at frequencies 0, period, 2*period, ...; identity elsewhere."""
    table = np.tile(np.arange(N, dtype=np.int64), (L, 1))
    table[::period, 0] = 1
    table[::period, 1] = 0
    return PermutationSequence(table)


def lemma3_counterexample(L: int, k: int) -> CounterexampleBundle:
    """Non-equivalent equal-norm pair from perturbed k-spike combs (2k | L).

    The first column is the k-spike comb minus its spike at 0 plus one at
    half the comb step; the second is the negated half-step-shifted comb
    perturbed by the half-period translate of the same two-entry correction.
    Swapping the columns on the L/2k frequencies where the comb transforms
    differ preserves every lp norm yet is not a global permutation.

    k = 1 is rejected: the correction then lands on the support of the second
    comb, which doubles one spike, so the advertised ideal 1-sparsity fails
    (for odd k >= 3 an analogous collision makes the second column
    (k+1)-sparse; norms still match exactly and the bundle remains valid).
    """
    if k < 2:
        raise InvalidParameterError(
            "k=1 is degenerate: the prescribed perturbation collides with the "
            "shifted comb and doubles a spike; use k >= 2"
        )
    if L % (2 * k) != 0:
        raise InvalidParameterError(f"2k = {2 * k} must divide L = {L}")
    step_half = L // (2 * k)
    u = np.zeros(L, dtype=np.complex128)
    a = make_comb(CombSpec(L, q=k, n=0, m=0))
    b = -make_comb(CombSpec(L, q=k, n=step_half, m=0))
    u[0] = -a[0]
    u[step_half] = -b[step_half]
    A, A_tilde, seq = _comb_pair_core(L, k, u)
    bundle = CounterexampleBundle(
        family=LEMMA3, a=A, seq=seq, a_tilde=A_tilde, claimed_delta=step_half, k=k
    )
    validate_bundle(bundle)
    return bundle


def _comb_pair_core(L: int, comb_q: int, u: np.ndarray):
    """Perturbed comb pair, its swapped twin in closed form, and the sequence.

    Swapping the two columns on the frequencies where the comb transforms
    differ exchanges the combs but leaves the perturbation in place (its
    half-period translate is transparent there), so the permuted matrix is
    known exactly: no transform round-off lands on its zero entries.
    """
    step_half = L // (2 * comb_q)
    a = make_comb(CombSpec(L, q=comb_q, n=0, m=0))
    b = -make_comb(CombSpec(L, q=comb_q, n=step_half, m=0))
    shifted = np.roll(u, L // 2)
    A = FilterMatrix(np.stack([a + u, b + shifted])[None, :, :])
    A_tilde = FilterMatrix(np.stack([b + u, a + shifted])[None, :, :])
    seq = _swap_sequence(L, 2, period=2 * comb_q)
    return A, A_tilde, seq


def lemma4_counterexample(L: int, k_prime: int, k: int, seed: int) -> CounterexampleBundle:
    """Disjoint-support, exactly k-sparse non-equivalent equal-norm pair.

    Starts from the k'-spike comb pair (2k' | L) and pads both columns to
    sparsity k with a (k - k')-sparse Gaussian perturbation whose support
    avoids the 2k'-comb grid and its own half-period translate, so the four
    pieces never overlap. Support positions are drawn uniformly from the
    feasible set, redrawing until the self-translate constraint holds.
    """
    if k_prime < 1 or k_prime >= k:
        raise InvalidParameterError(f"need 1 <= k' < k, got k'={k_prime}, k={k}")
    if 2 * k > L:
        raise InvalidParameterError(f"need k <= L/2, got k={k}, L={L}")
    if L % (2 * k_prime) != 0:
        raise InvalidParameterError(f"2k' = {2 * k_prime} must divide L = {L}")
    extra = k - k_prime
    comb_step = L // (2 * k_prime)
    free = np.array([t for t in range(L) if t % comb_step != 0], dtype=np.int64)
    if extra > L // 2 - k_prime:  # one position per {t, t + L/2} pair at most
        raise InvalidParameterError(
            f"support budget infeasible: need {extra} free pair slots, have {L // 2 - k_prime}"
        )
    rng = make_rng(seed, "lemma4-support")
    for _ in range(100_000):
        supp = rng.choice(free, size=extra, replace=False)
        shifted = {int((t + L // 2) % L) for t in supp}
        if not shifted & {int(t) for t in supp}:
            break
    else:  # feasibility was checked above; cannot happen
        raise ContractError("support sampling failed to satisfy self-translate disjointness")
    u = np.zeros(L, dtype=np.complex128)
    u[np.sort(supp)] = filters._gaussian_nonzero(rng, extra)
    A, A_tilde, seq = _comb_pair_core(L, k_prime, u)
    bundle = CounterexampleBundle(
        family=LEMMA4,
        a=A,
        seq=seq,
        a_tilde=A_tilde,
        claimed_delta=L // (2 * k_prime),
        k=k,
        k_prime=k_prime,
    )
    _check_disjoint_columns(A, k)
    validate_bundle(bundle)
    return bundle


def _check_disjoint_columns(A: FilterMatrix, k: int) -> None:
    tol = filters.default_zero_tol(A.entries)
    supports = [set(filters.support(A.entries[i, j], tol).tolist()) for i in range(A.channels) for j in range(A.sources)]
    for s in supports:
        if len(s) != k:
            raise ContractError(f"column support size {len(s)} != k={k}")
    for x in range(len(supports)):
        for y in range(x + 1, len(supports)):
            if supports[x] & supports[y]:
                raise ContractError("columns are not support-disjoint")


def embed_counterexample(
    bundle: CounterexampleBundle, M: int, N: int, L: int, seed: int
) -> CounterexampleBundle:
    """Embed a 1 x 2 core into an M x N matrix fixed by the same sequence.

    Adds N-2 random k-sparse columns that the permutations leave alone and
    duplicates the single row M times. For lemma4 bundles the added supports
    are drawn disjoint from everything already used, keeping the row
    support-disjoint (requires N*k <= L).
    """
    if N < 2:
        raise InvalidParameterError(f"embedding needs at least 2 columns, got N={N}")
    if M < 1:
        raise InvalidParameterError(f"embedding needs at least 1 row, got M={M}")
    if L != bundle.a.filter_len:
        raise InvalidParameterError(
            f"embedding length L={L} must match the bundle's L={bundle.a.filter_len}"
        )
    if bundle.a.channels != 1 or bundle.a.sources != 2:
        raise InvalidParameterError("only 1 x 2 core bundles can be embedded")
    if M == 1 and N == 2:
        return bundle
    rng = make_rng(seed, "embed")
    k = bundle.k
    columns = [bundle.a.entries[0, 0], bundle.a.entries[0, 1]]
    tilde_columns = [bundle.a_tilde.entries[0, 0], bundle.a_tilde.entries[0, 1]]
    if bundle.family == LEMMA4:
        if N * k > L:
            raise InvalidParameterError(
                f"disjoint embedding needs N*k <= L, got N={N}, k={k}, L={L}"
            )
        tol = filters.default_zero_tol(bundle.a.entries)
        used = set(filters.support(columns[0], tol).tolist())
        used |= set(filters.support(columns[1], tol).tolist())
        pool = np.array(sorted(set(range(L)) - used), dtype=np.int64)
    for _ in range(N - 2):
        col = np.zeros(L, dtype=np.complex128)
        if bundle.family == LEMMA4:
            supp = rng.choice(pool, size=k, replace=False)
            pool = np.setdiff1d(pool, supp)
        else:
            supp = rng.choice(L, size=k, replace=False)
        col[np.sort(supp)] = filters._gaussian_nonzero(rng, k)
        columns.append(col)
        tilde_columns.append(col)  # added columns are fixed points of the sequence
    row = np.stack(columns)
    A = FilterMatrix(np.tile(row[None, :, :], (M, 1, 1)))
    tilde_row = np.stack(tilde_columns)
    A_tilde = FilterMatrix(np.tile(tilde_row[None, :, :], (M, 1, 1)))
    table = np.tile(np.arange(N, dtype=np.int64), (L, 1))
    table[:, :2] = bundle.seq.perms
    seq = PermutationSequence(table)
    out = CounterexampleBundle(
        family=bundle.family,
        a=A,
        seq=seq,
        a_tilde=A_tilde,
        claimed_delta=bundle.claimed_delta,
        k=bundle.k,
        k_prime=bundle.k_prime,
    )
    validate_bundle(out)
    return out


def to_document(bundle: CounterexampleBundle) -> dict:
    return {
        "family": bundle.family,
        "k": bundle.k,
        "k_prime": bundle.k_prime,
        "claimed_delta": bundle.claimed_delta,
        "A": filters.to_document(bundle.a),
        "s": spectral.to_document(bundle.seq),
        "A_tilde": filters.to_document(bundle.a_tilde),
    }


def from_document(doc) -> CounterexampleBundle:
    if not isinstance(doc, dict):
        raise DocumentError("bundle document must be a JSON object")
    try:
        return CounterexampleBundle(
            family=str(doc["family"]),
            a=filters.from_document(doc["A"]),
            seq=spectral.from_document(doc["s"]),
            a_tilde=filters.from_document(doc["A_tilde"]),
            claimed_delta=int(doc["claimed_delta"]),
            k=int(doc["k"]),
            k_prime=None if doc.get("k_prime") is None else int(doc["k_prime"]),
        )
    except KeyError as exc:
        raise DocumentError(f"bundle document missing field: {exc}") from exc


def dumps(bundle: CounterexampleBundle) -> str:
    return jsonio.dumps(to_document(bundle))


def loads(text: str) -> CounterexampleBundle:
    return from_document(jsonio.loads(text))
