"""Pure-numpy greedy sweep kernel.

Fallback used when the compiled extension is absent; the compiled kernel
implements the same contract and must agree with this one to within 1e-12 on
objectives. Candidate permutations at one frequency are scored through a
rank-1 update of the cached time-domain filters; accepted moves apply the
same rank-1 update in place. Every ``REFRESH_EVERY`` updates a filter is
re-derived from its spectrum by an exact inverse FFT, which bounds the
accumulated round-off far below the 1e-12 contract.

Phases come from a shared table of the L-th roots of unity (over sqrt(L))
indexed by (w * t) mod L, so both kernels consume bit-identical values.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

#: incremental updates tolerated per filter before an exact FFT refresh
REFRESH_EVERY = 1024


def filter_objective(row: np.ndarray, p: float, zero_tol: float) -> float:
    """Objective contribution of one filter (see sparsity.lp_norm)."""
    mags = np.abs(row)
    if p == 0.0:
        return float(np.count_nonzero(mags > zero_tol))
    if np.isinf(p):
        return float(mags.max(initial=0.0))
    return float(np.sum(mags**p))


def _total(obj_pf: np.ndarray, p: float) -> float:
    if np.isinf(p):
        return float(obj_pf.max())
    return float(obj_pf.sum())


def _candidate_total(G, T, obj_pf, pi, w, phase, p, zero_tol) -> float:
    """Objective if permutation pi were applied at frequency w only."""
    moved = np.flatnonzero(pi != np.arange(G.shape[1]))
    delta = G[:, pi[moved], w] - G[:, moved, w]  # (M, c)
    work = obj_pf.copy()
    changed = delta != 0  # equal coefficients leave the filter bit-identical
    if np.any(changed):
        cand = T[:, moved, :] + delta[:, :, None] * phase[None, None, :]
        mags = np.abs(cand)
        if p == 0.0:
            vals = np.count_nonzero(mags > zero_tol, axis=2).astype(np.float64)
        elif np.isinf(p):
            vals = mags.max(axis=2)
        else:
            vals = (mags**p).sum(axis=2)
        work[:, moved] = np.where(changed, vals, work[:, moved])
    return _total(work, p)


def _lex_less(a, b) -> bool:
    return tuple(a) < tuple(b)


def run_sweep(G, T, obj_pf, counters, tau, perms, p, zero_tol, accept_rel_tol,
              lexicographic, trace, phase_table):
    """One pass over all L frequencies; mutates state in place.

    At each frequency every candidate permutation is scored against the
    current iterate; the best is accepted when it improves the objective by
    more than accept_rel_tol times its current value (candidates are scanned
    in lexicographic permutation order, so equal-objective winners resolve to
    the smallest). With ``lexicographic`` tie-breaking an equal-objective move
    is also accepted when it lexicographically reduces the cumulative
    permutation at this frequency. Returns the number of accepted moves.
    """
    M, N, L = G.shape
    F = perms.shape[0]
    t_idx = np.arange(L)
    sqrt_l = np.sqrt(L)
    cand_obj = np.empty(F)
    accepted = 0
    for w in range(L):
        cur = _total(obj_pf, p)
        phase = phase_table[(w * t_idx) % L]
        best_q = 0
        best = cur
        for q in range(1, F):
            cand_obj[q] = _candidate_total(G, T, obj_pf, perms[q], w, phase, p, zero_tol)
            if cand_obj[q] < best:
                best = cand_obj[q]
                best_q = q
        choose = -1
        if best_q != 0 and best < cur - accept_rel_tol * cur:
            choose = best_q
        elif lexicographic:
            best_tau = None
            for q in range(1, F):
                if cand_obj[q] <= cur:
                    new_tau = tau[w][perms[q]]
                    if _lex_less(new_tau, tau[w]) and (best_tau is None or _lex_less(new_tau, best_tau)):
                        best_tau = new_tau
                        choose = q
        if choose >= 0:
            pi = perms[choose]
            moved = np.flatnonzero(pi != np.arange(N))
            delta = G[:, pi[moved], w] - G[:, moved, w]
            G[:, :, w] = G[:, pi, w]
            tau[w] = tau[w][pi]
            for c, j in enumerate(moved):
                for i in range(M):
                    if delta[i, c] == 0:
                        continue
                    T[i, j, :] += delta[i, c] * phase
                    counters[i, j] += 1
                    if counters[i, j] >= REFRESH_EVERY:
                        T[i, j, :] = np.fft.ifft(G[i, j, :]) * sqrt_l
                        counters[i, j] = 0
                    obj_pf[i, j] = filter_objective(T[i, j], p, zero_tol)
            trace.append(_total(obj_pf, p))
            accepted += 1
    return accepted
