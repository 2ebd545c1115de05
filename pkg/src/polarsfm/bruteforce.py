"""Exhaustive oracles used to check the solver and the cut generators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .polar import LinearCut
from .setfn import SetFunction, bit_matrix, lex_key

MAX_MIN_N = 24
MAX_CHECK_N = 14
TIE_TOL = 1e-9
CHECK_TOL = 1e-9


@dataclass(frozen=True)
class Constraint:
    """a'x <= b."""

    a: np.ndarray
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        object.__setattr__(self, "b", float(self.b))

    def satisfied(self, mask: int, tol: float = 1e-9) -> bool:
        x = (mask >> np.arange(self.a.size)) & 1
        return float(self.a @ x) <= self.b + tol


class Infeasible(Exception):
    pass


def tie_tol(v: float) -> float:
    return TIE_TOL * max(1.0, abs(v))


def min_enumerate(f: SetFunction, constraints: Sequence[Constraint] = ()) -> tuple[int, float]:
    """Scan all 2^n subsets; return the lexicographically smallest argmin.

    Values within ``1e-9 * max(1, |min|)`` of the minimum count as ties.
    """
    n = f.n
    if n > MAX_MIN_N:
        raise ValueError(f"min_enumerate scans 2^n subsets; n={n} exceeds {MAX_MIN_N}")
    best_val = np.inf
    cands: list[tuple[int, float]] = []
    chunk = 1 << 16
    for start in range(0, 1 << n, chunk):
        masks = np.arange(start, min(1 << n, start + chunk), dtype=np.int64)
        vals = f.evaluate_many(masks)
        if constraints:
            X = bit_matrix(masks, n)
            ok = np.ones(len(masks), dtype=bool)
            for con in constraints:
                ok &= X @ con.a <= con.b + 1e-9
            masks, vals = masks[ok], vals[ok]
        if not len(vals):
            continue
        m = float(vals.min())
        if m < best_val:
            best_val = m
        near = vals <= best_val + tie_tol(best_val)
        cands.extend(zip(masks[near].tolist(), vals[near].tolist()))
        cands = [(s, v) for s, v in cands if v <= best_val + tie_tol(best_val)]
    if not cands:
        raise Infeasible("no subset satisfies the constraints")
    best = min(cands, key=lambda sv: lex_key(sv[0]))
    return best[0], best[1]


def check_cut_validity(cut: LinearCut, f: SetFunction, tol: float = CHECK_TOL):
    """Check an epigraph cut at all (chi_S, f(S)) or a hypograph cut at all (chi_S, h(S)).

    Returns ``(True, None)`` or ``(False, S)`` with S the largest absolute violation.
    """
    n = f.n
    if n > MAX_CHECK_N:
        raise ValueError(f"cut validity enumerates 2^n points; n={n} exceeds {MAX_CHECK_N}")
    masks = np.arange(1 << n, dtype=np.int64)
    X = bit_matrix(masks, n)
    vals = f.table()
    aff = X @ cut.coef + cut.const
    viol = aff - vals if cut.sense == "epi" else vals - aff
    bad = viol > tol * np.maximum(1.0, np.abs(vals))
    if bad.any():
        return False, int(masks[np.argmax(np.where(bad, viol, -np.inf))])
    return True, None


def membership_Pf(pi, f: SetFunction, tol: float = CHECK_TOL):
    """Is pi(S) <= f(S) - f(empty) for all S?  Returns ``(ok, witness_mask)``."""
    n = f.n
    if n > MAX_CHECK_N:
        raise ValueError(f"membership enumerates 2^n subsets; n={n} exceeds {MAX_CHECK_N}")
    masks = np.arange(1 << n, dtype=np.int64)
    vals = f.table()
    vals = vals - vals[0]
    lhs = bit_matrix(masks, n) @ np.asarray(pi, dtype=float)
    viol = lhs - vals
    k = int(np.argmax(viol))
    if viol[k] > tol * max(1.0, abs(vals[k])):
        return False, int(masks[k])
    return True, None
