"""Dense bounded-variable primal simplex.

Rows ``a'x (<=|>=|=) b`` are carried as ``a'x - r = 0`` with a bounded row
activity variable ``r``, so every variable (structural or row) simply has a
lower and an upper bound.  Phase 1 minimises the sum of bound violations of
the basic variables, which lets the method start from *any* basis: this is
how warm starts after adding rows or tightening bounds work.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field

import numpy as np

FEAS_TOL = 1e-7
OPT_TOL = 1e-7
PIVOT_TOL = 1e-9
RATIO_TIE = 1e-11
MAX_PIVOTS = 50_000
REFACTOR_EVERY = 64

_AT_LOWER, _AT_UPPER, _AT_ZERO = 0, 1, 2


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration-limit"


@dataclass(frozen=True)
class Basis:
    """Warm-start data: basic variable indices and nonbasics sitting at upper."""

    basic: tuple[int, ...]
    at_upper: frozenset[int] = frozenset()


@dataclass
class LpSolution:
    status: Status
    x: np.ndarray
    objective: float
    duals: np.ndarray
    reduced_costs: np.ndarray
    basis: Basis | None
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass
class LinearProgram:
    """min (or max) c'x  s.t.  rows, lb <= x <= ub."""

    c: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    maximize: bool = False
    A: np.ndarray = field(default=None)
    row_lo: np.ndarray = field(default=None)
    row_hi: np.ndarray = field(default=None)

    def __post_init__(self):
        self.c = np.array(self.c, dtype=float)
        n = self.c.size
        self.lb = np.broadcast_to(np.array(self.lb, dtype=float), (n,)).copy()
        self.ub = np.broadcast_to(np.array(self.ub, dtype=float), (n,)).copy()
        if np.any(self.lb > self.ub):
            raise ValueError("variable bounds must satisfy lb <= ub")
        if self.A is None:
            self.A = np.zeros((0, n))
            self.row_lo = np.zeros(0)
            self.row_hi = np.zeros(0)

    @property
    def num_vars(self) -> int:
        return self.c.size

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    def add_row(self, coeffs, sense: str, rhs: float) -> int:
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.num_vars,):
            raise ValueError(f"row needs {self.num_vars} coefficients, got {coeffs.shape}")
        if not np.all(np.isfinite(coeffs)) or not np.isfinite(rhs):
            raise ValueError("row coefficients and rhs must be finite")
        lo, hi = {"<=": (-np.inf, rhs), ">=": (rhs, np.inf), "=": (rhs, rhs)}[sense]
        self.A = np.vstack([self.A, coeffs[None, :]])
        self.row_lo = np.append(self.row_lo, lo)
        self.row_hi = np.append(self.row_hi, hi)
        return self.num_rows - 1

    def copy(self) -> "LinearProgram":
        return LinearProgram(
            self.c.copy(), self.lb.copy(), self.ub.copy(), self.maximize,
            self.A.copy(), self.row_lo.copy(), self.row_hi.copy(),
        )

    def dump(self) -> str:
        """Plain-text listing for debugging; not a stable format."""
        buf = io.StringIO()
        buf.write(f"{'max' if self.maximize else 'min'} {self.c.tolist()}\n")
        for i in range(self.num_rows):
            buf.write(f"r{i}: {self.row_lo[i]} <= {self.A[i].tolist()} <= {self.row_hi[i]}\n")
        for j in range(self.num_vars):
            buf.write(f"x{j}: [{self.lb[j]}, {self.ub[j]}]\n")
        return buf.getvalue()


def solve(p: LinearProgram, warm: Basis | None = None, max_pivots: int = MAX_PIVOTS) -> LpSolution:
    """Solve ``p``, optionally warm-started from a previous basis.

    A warm basis with fewer rows than ``p`` is extended with the new rows'
    activity variables as basic.  A singular warm basis falls back to the
    all-slack basis.
    """
    m, n = p.A.shape
    cost = np.concatenate([-p.c if p.maximize else p.c, np.zeros(m)])
    lo = np.concatenate([p.lb, p.row_lo])
    hi = np.concatenate([p.ub, p.row_hi])
    M = np.hstack([p.A, -np.eye(m)])

    basic, at_upper = _initial_basis(warm, n, m)
    res = _Simplex(M, cost, lo, hi, basic, at_upper, max_pivots).run()
    status, xfull, y, d, basis, pivots = res
    x = xfull[:n]
    obj = float(p.c @ x) if status is Status.OPTIMAL else float("nan")
    if p.maximize:
        y, d = -y, -d
    return LpSolution(status, x, obj, y, d[:n], basis, pivots)


def add_row_and_resolve(p: LinearProgram, row, prev: LpSolution | None = None) -> LpSolution:
    """Append ``row = (coeffs, sense, rhs)`` and re-solve from ``prev``'s basis."""
    coeffs, sense, rhs = row
    p.add_row(coeffs, sense, rhs)
    return solve(p, prev.basis if prev is not None else None)


def _initial_basis(warm: Basis | None, n: int, m: int):
    slack = list(range(n, n + m))
    if warm is None:
        return slack, set()
    basic = [j for j in warm.basic if j < n + m]
    have = set(basic)
    # rows added since the warm basis was recorded get their activity basic
    for j in slack:
        if len(basic) >= m:
            break
        if j not in have and j >= n + len(warm.basic):
            basic.append(j)
            have.add(j)
    if len(basic) != m:
        return slack, set()
    return basic, {j for j in warm.at_upper if j < n + m and j not in have}


class _Simplex:
    def __init__(self, M, cost, lo, hi, basic, at_upper, max_pivots):
        self.M = M
        self.cost = cost
        self.lo = lo
        self.hi = hi
        self.m, self.N = M.shape
        self.max_pivots = max_pivots
        self.basic = np.array(basic, dtype=int)
        self.state = np.full(self.N, _AT_LOWER)
        for j in range(self.N):
            self.state[j] = self._resting_state(j, j in at_upper)
        self.is_basic = np.zeros(self.N, dtype=bool)
        self.is_basic[self.basic] = True
        self.Binv = None

    def _resting_state(self, j, prefer_upper):
        lo, hi = self.lo[j], self.hi[j]
        if prefer_upper and np.isfinite(hi):
            return _AT_UPPER
        if np.isfinite(lo):
            return _AT_LOWER
        if np.isfinite(hi):
            return _AT_UPPER
        return _AT_ZERO

    def _refactor(self) -> bool:
        if self.m == 0:
            self.Binv = np.zeros((0, 0))
            return True
        B = self.M[:, self.basic]
        try:
            Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return False
        if not np.all(np.isfinite(Binv)) or np.abs(B @ Binv - np.eye(self.m)).max() > 1e-6:
            return False
        self.Binv = Binv
        return True

    def _nonbasic_values(self):
        x = np.where(self.state == _AT_LOWER, self.lo, np.where(self.state == _AT_UPPER, self.hi, 0.0))
        x[self.is_basic] = 0.0
        return x

    def _primal(self):
        x = self._nonbasic_values()
        xB = -self.Binv @ (self.M @ x) if self.m else np.zeros(0)
        x[self.basic] = xB
        return x, xB

    def run(self):
        if not self._refactor():
            self.basic = np.arange(self.N - self.m, self.N)
            self.is_basic[:] = False
            self.is_basic[self.basic] = True
            for j in range(self.N):
                self.state[j] = self._resting_state(j, False)
            self._refactor()

        pivots = 0
        since_refactor = 0
        degenerate_run = 0
        bland = False
        bland_after = 5 * (self.m + self.N)
        lo, hi, M = self.lo, self.hi, self.M

        while True:
            x, xB = self._primal()
            loB, hiB = lo[self.basic], hi[self.basic]
            below = xB < loB - FEAS_TOL
            above = xB > hiB + FEAS_TOL
            phase1 = bool(below.any() or above.any())
            if phase1:
                cB = below * -1.0 + above * 1.0
                c = np.zeros(self.N)
            else:
                cB = self.cost[self.basic]
                c = self.cost
            y = cB @ self.Binv if self.m else np.zeros(0)
            d = c - y @ M
            d[self.is_basic] = 0.0

            can_inc = (~self.is_basic) & (self.state != _AT_UPPER) & (hi > lo)
            can_dec = (~self.is_basic) & (self.state != _AT_LOWER) & (hi > lo)
            # free nonbasic at zero may move either way
            cand = (can_inc & (d < -OPT_TOL)) | (can_dec & (d > OPT_TOL))
            if not cand.any():
                if since_refactor and self._refactor():
                    # confirm with a fresh inverse; updates drift on badly scaled rows
                    since_refactor = 0
                    continue
                if phase1:
                    return Status.INFEASIBLE, x, y, d, self._basis(), pivots
                return Status.OPTIMAL, x, y, d, self._basis(), pivots
            if pivots >= self.max_pivots:
                return Status.ITERATION_LIMIT, x, y, d, self._basis(), pivots

            idx = np.nonzero(cand)[0]
            q = int(idx[0]) if bland else int(idx[np.argmax(np.abs(d[idx]))])
            direction = 1.0 if d[q] < 0 else -1.0
            alpha = self.Binv @ M[:, q] if self.m else np.zeros(0)
            rate = -direction * alpha  # d xB / dt

            t_best = hi[q] - lo[q]  # bound flip
            leave = -1
            leave_to_upper = False
            best_piv = 0.0
            for i in np.nonzero(np.abs(alpha) > PIVOT_TOL)[0]:
                r = rate[i]
                v = xB[i]
                li, ui = loB[i], hiB[i]
                if below[i]:
                    if r <= 0:
                        continue
                    t, to_up = (li - v) / r, False
                elif above[i]:
                    if r >= 0:
                        continue
                    t, to_up = (v - ui) / -r, True
                elif r > 0:
                    if not np.isfinite(ui):
                        continue
                    t, to_up = (ui - v) / r, True
                else:
                    if not np.isfinite(li):
                        continue
                    t, to_up = (v - li) / -r, False
                t = max(t, 0.0)
                piv = abs(alpha[i])
                if t < t_best - RATIO_TIE:
                    take = True
                elif t <= t_best + RATIO_TIE and leave >= 0:
                    take = self.basic[i] < self.basic[leave] if bland else piv > best_piv
                else:
                    take = False
                if take:
                    t_best, leave, leave_to_upper, best_piv = t, int(i), to_up, piv

            if not np.isfinite(t_best):
                # phase-1 objective is bounded below, so only phase 2 can get here
                return Status.UNBOUNDED, x, y, d, self._basis(), pivots

            pivots += 1
            degenerate_run = degenerate_run + 1 if t_best < 1e-12 else 0
            if degenerate_run > bland_after:
                bland = True

            if leave < 0:
                self.state[q] = _AT_UPPER if direction > 0 else _AT_LOWER
                continue

            out = int(self.basic[leave])
            q_state = self.state[q]
            self.state[out] = _AT_UPPER if leave_to_upper else _AT_LOWER
            if not np.isfinite(lo[out]) and not np.isfinite(hi[out]):
                self.state[out] = _AT_ZERO
            self.basic[leave] = q
            self.is_basic[out] = False
            self.is_basic[q] = True
            self.state[q] = _AT_LOWER

            since_refactor += 1
            piv = alpha[leave]
            if since_refactor >= REFACTOR_EVERY or abs(piv) < 1e-7:
                since_refactor = 0
                if not self._refactor():
                    # undo and bail out to a slack restart
                    self.basic[leave] = out
                    self.is_basic[q] = False
                    self.is_basic[out] = True
                    self.state[q] = q_state
                    self._refactor()
                    bland = True
                    continue
            else:
                row = self.Binv[leave] / piv
                self.Binv -= np.outer(alpha, row)
                self.Binv[leave] = row

    def _basis(self) -> Basis:
        up = frozenset(int(j) for j in np.nonzero((self.state == _AT_UPPER) & ~self.is_basic)[0])
        return Basis(tuple(int(j) for j in self.basic), up)


def dual_objective(p: LinearProgram, sol: LpSolution) -> float:
    """Lagrangian dual bound implied by the row duals of ``sol``.

    Minimises the reduced-cost vector over the variable and row-activity
    boxes; equals the primal objective at an optimal basis.
    """
    sign = -1.0 if p.maximize else 1.0
    y = sign * sol.duals
    d_x = sign * p.c - p.A.T @ y
    total = 0.0
    for d, lo, hi in ((d_x, p.lb, p.ub), (y, p.row_lo, p.row_hi)):
        for dj, l, u in zip(d, lo, hi):
            if abs(dj) <= 1e-12:
                continue
            b = l if dj > 0 else u
            if not np.isfinite(b):
                return -np.inf * sign
            total += dj * b
    return float(sign * total)
