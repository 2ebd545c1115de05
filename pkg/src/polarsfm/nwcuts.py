"""Nemhauser-Wolsey submodular inequalities for the hypograph of submodular h."""

from __future__ import annotations

import numpy as np

from .polar import VIOLATION_TOL, LinearCut, chain_masks, sort_order
from .setfn import SetFunction, full_mask, popcount


def _in(S: int, i: int) -> bool:
    return bool((S >> i) & 1)


def nw_cut_1(h: SetFunction, S: int) -> LinearCut:
    """w <= h(S) - sum_{i in S} rho_i(N-i)(1-x_i) + sum_{i not in S} rho_i(S) x_i."""
    n = h.n
    N = full_mask(n)
    hN, hS = h.evaluate(N), h.evaluate(S)
    coef = np.empty(n)
    const = hS
    for i in range(n):
        if _in(S, i):
            rho = hN - h.evaluate(N & ~(1 << i))
            coef[i] = rho
            const -= rho
        else:
            coef[i] = h.evaluate(S | (1 << i)) - hS
    return LinearCut(coef, const, "hypo", "nw1", support=S)


def nw_cut_2(h: SetFunction, S: int) -> LinearCut:
    """w <= h(S) - sum_{i in S} rho_i(S-i)(1-x_i) + sum_{i not in S} rho_i(empty) x_i."""
    n = h.n
    h0, hS = h.evaluate(0), h.evaluate(S)
    coef = np.empty(n)
    const = hS
    for i in range(n):
        if _in(S, i):
            rho = hS - h.evaluate(S & ~(1 << i))
            coef[i] = rho
            const -= rho
        else:
            coef[i] = h.evaluate(1 << i) - h0
    return LinearCut(coef, const, "hypo", "nw2", support=S)


def separate_nw(h: SetFunction, xbar, wbar: float, tol: float = VIOLATION_TOL) -> LinearCut | None:
    """Most violated NW cut over the sorted chain of ``xbar``.

    Candidates are the n+1 chain sets; ties prefer the first family, then smaller |S|.
    """
    xbar = np.asarray(xbar, dtype=float)
    best, best_key = None, None
    for S in chain_masks(sort_order(xbar)):
        for rank, make in enumerate((nw_cut_1, nw_cut_2)):
            cut = make(h, S)
            v = cut.violation(xbar, wbar)
            key = (-round(v, 10), rank, popcount(S))
            if best_key is None or key < best_key:
                best, best_key = cut, key
    if best is not None and best.violation(xbar, wbar) > tol * max(1.0, abs(wbar)):
        return best
    return None
