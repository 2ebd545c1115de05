"""Cutting-plane branch-and-bound for min f(S), f = g - h + offset.

The LP relaxation has variables x in [0,1]^n, z (epigraph of g) and w
(hypograph of h) and minimises z - w + offset.  The epigraph of g is only
described by polar cuts and the hypograph of h only by NW cuts, plus a
valid initial box on z and w.
"""

from __future__ import annotations

import heapq
import math
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import lp
from .bruteforce import Constraint, tie_tol
from .decomp import Decomposition, decompose
from .nwcuts import nw_cut_1, separate_nw
from .polar import LinearCut, chain_masks, separate_polar, sort_order, tight_polar_cut
from .setfn import SetFunction, elements, full_mask, lex_key

INTEGRALITY_TOL = 1e-6
GAP_TOL = 1e-6


class Infeasible(Exception):
    pass


@dataclass
class ModelConfig:
    f: SetFunction
    decomposition: Decomposition
    constraints: Sequence[Constraint] = ()
    cut_tol: float = 1e-6
    max_cut_rounds: int = 100
    node_limit: int = 1_000_000
    time_limit: float = math.inf
    cuts_at_nodes: bool = False
    use_cuts: bool = True
    branching: str = "most_fractional"
    node_selection: str = "best_bound"

    def __post_init__(self):
        if self.cut_tol <= 0 or self.max_cut_rounds < 0:
            raise ValueError("cut tolerance must be positive and round cap nonnegative")
        if self.node_limit <= 0 or self.time_limit <= 0:
            raise ValueError("limits must be positive")
        if self.branching != "most_fractional" or self.node_selection != "best_bound":
            raise ValueError("only most_fractional branching with best_bound selection is implemented")
        if self.decomposition.n != self.f.n:
            raise ValueError("decomposition and objective disagree on n")
        self.constraints = tuple(
            c if isinstance(c, Constraint) else Constraint(*c) for c in self.constraints
        )

    @property
    def n(self) -> int:
        return self.f.n


def make_model(f: SetFunction, constraints=(), decomposition: Decomposition | None = None, **kw) -> ModelConfig:
    return ModelConfig(f, decomposition or decompose(f), constraints, **kw)


@dataclass
class SolveReport:
    status: str
    optimal_value: float | None
    optimal_mask: int | None
    bound_root: float
    bound_root_cuts: float
    nodes: int
    branchings: int
    cuts: dict
    root_cuts: int
    time_sec: float
    best_bound: float
    root_history: list = field(default_factory=list)
    gap: float = float("nan")
    cgap: float = float("nan")
    pool: list = field(default_factory=list, repr=False)  # every cut added, root and nodes

    @property
    def optimal_set(self) -> list[int]:
        return [] if self.optimal_mask is None else elements(self.optimal_mask)

    def to_json(self) -> dict:
        def num(v):
            return None if v is None or not math.isfinite(v) else float(v)

        return {
            "status": self.status,
            "optimal_value": num(self.optimal_value),
            "optimal_set": self.optimal_set,
            "bound_root": num(self.bound_root),
            "bound_root_cuts": num(self.bound_root_cuts),
            "gap": num(self.gap),
            "cgap": num(self.cgap),
            "nodes": int(self.nodes),
            "cuts": {k: int(self.cuts.get(k, 0)) for k in ("polar", "nw1", "nw2")},
            "time_sec": float(self.time_sec),
        }


class Relaxation:
    """The shared LP with its global cut pool; nodes only change x bounds."""

    def __init__(self, model: ModelConfig):
        self.model = model
        d = model.decomposition
        n = model.n
        self.n = n
        self.z = n
        self.w = n + 1
        N = full_mask(n)
        g, h = d.g, d.h
        gN = g.evaluate(N)
        z_lo = sum(min(0.0, gN - g.evaluate(N & ~(1 << i))) for i in range(n))
        w_hi = sum(max(0.0, h.evaluate(1 << i) - h.evaluate(0)) for i in range(n))
        c = np.zeros(n + 2)
        c[self.z], c[self.w] = 1.0, -1.0
        lb = np.concatenate([np.zeros(n), [z_lo, -np.inf]])
        ub = np.concatenate([np.ones(n), [np.inf, w_hi]])
        self.lp = lp.LinearProgram(c, lb, ub)
        for con in model.constraints:
            self.lp.add_row(np.concatenate([con.a, [0.0, 0.0]]), "<=", con.b)
        self.pool: list[LinearCut] = []
        self.counts: Counter = Counter()

    def add_cut(self, cut: LinearCut) -> None:
        row = np.zeros(self.n + 2)
        if cut.sense == "epi":
            row[: self.n] = cut.coef
            row[self.z] = -1.0
            self.lp.add_row(row, "<=", -cut.const)
        else:
            row[: self.n] = -cut.coef
            row[self.w] = 1.0
            self.lp.add_row(row, "<=", cut.const)
        self.pool.append(cut)
        self.counts[cut.provenance] += 1

    def solve(self, fixed0: int = 0, fixed1: int = 0, warm: lp.Basis | None = None) -> lp.LpSolution:
        bits = np.arange(self.n)
        self.lp.lb[: self.n] = (fixed1 >> bits) & 1
        self.lp.ub[: self.n] = 1 - ((fixed0 >> bits) & 1)
        sol = lp.solve(self.lp, warm)
        if sol.status is lp.Status.ITERATION_LIMIT:
            sol = lp.solve(self.lp, None)
        if sol.status in (lp.Status.UNBOUNDED, lp.Status.ITERATION_LIMIT):
            raise RuntimeError(f"relaxation LP ended with status {sol.status.value}")
        return sol

    def bound(self, sol: lp.LpSolution) -> float:
        return sol.objective + self.model.decomposition.offset

    def split(self, sol: lp.LpSolution):
        x = np.clip(sol.x[: self.n], 0.0, 1.0)
        return x, sol.x[self.z], sol.x[self.w]

    def separate(self, sol: lp.LpSolution) -> list[LinearCut]:
        m = self.model
        x, z, w = self.split(sol)
        found = []
        cut = separate_polar(m.decomposition.g, x, z, m.cut_tol)
        if cut is not None:
            found.append(cut)
        if not m.decomposition.h_is_zero:
            cut = separate_nw(m.decomposition.h, x, w, m.cut_tol)
            if cut is not None:
                found.append(cut)
        return found

    def cut_loop(self, sol, fixed0=0, fixed1=0, rounds=None, history=None):
        rounds = self.model.max_cut_rounds if rounds is None else rounds
        for _ in range(rounds):
            cuts = self.separate(sol)
            if not cuts:
                break
            for cut in cuts:
                self.add_cut(cut)
            sol = self.solve(fixed0, fixed1, sol.basis)
            if history is not None and sol.optimal:
                history.append(self.bound(sol))
            if not sol.optimal:
                break
        return sol


@dataclass
class RootResult:
    bound: float
    cuts: list[LinearCut]
    history: list[float]
    bound_no_cuts: float
    solution: lp.LpSolution
    relaxation: Relaxation


def root_cut_loop(model: ModelConfig, relax: Relaxation | None = None) -> RootResult:
    """Alternate LP solves and polar/NW separation at the root."""
    relax = relax or Relaxation(model)
    sol = relax.solve()
    if sol.status is lp.Status.INFEASIBLE:
        raise Infeasible("root relaxation is infeasible")
    b0 = relax.bound(sol)
    history = [b0]
    if model.use_cuts:
        sol = relax.cut_loop(sol, history=history)
        if sol.status is lp.Status.INFEASIBLE:
            raise Infeasible("root relaxation became infeasible after cuts")
    return RootResult(max(b0, relax.bound(sol)), list(relax.pool), history, b0, sol, relax)


def compute_stats(report: SolveReport, f_star: float) -> tuple[float, float]:
    """Root gaps in percent: 100 * (f* - bound) / max(1e-9, |f*|)."""
    den = max(1e-9, abs(f_star))
    gap = 100.0 * (f_star - report.bound_root) / den
    cgap = 100.0 * (f_star - report.bound_root_cuts) / den
    return gap, cgap


def _lexmin_key(fixed1: int, free: int) -> tuple[int, ...]:
    """Smallest sorted-element tuple among sets T with fixed1 <= T <= fixed1 | free."""
    if not fixed1:
        return ()
    top = fixed1.bit_length() - 1
    below = free & ((1 << top) - 1)
    return lex_key(fixed1 | below)


@dataclass(order=True)
class _Node:
    bound: float
    seq: int
    fixed0: int = field(compare=False)
    fixed1: int = field(compare=False)
    depth: int = field(compare=False)
    warm: lp.Basis | None = field(compare=False, default=None)


class _Search:
    def __init__(self, model: ModelConfig):
        self.m = model
        self.f = model.f
        self.n = model.n
        self.inc_mask: int | None = None
        self.inc_val = math.inf
        self.tight_done: set[int] = set()
        self.nodes = 0
        self.branchings = 0

    def feasible(self, S: int) -> bool:
        return all(c.satisfied(S) for c in self.m.constraints)

    def offer(self, S: int, val: float | None = None) -> None:
        if not self.feasible(S):
            return
        if val is None:
            val = self.f.evaluate(S)
        if self.inc_mask is None or val < self.inc_val - tie_tol(self.inc_val):
            self.inc_mask, self.inc_val = S, val
        elif val <= self.inc_val + tie_tol(self.inc_val) and lex_key(S) < lex_key(self.inc_mask):
            self.inc_mask, self.inc_val = S, val

    def prunable(self, bound: float, fixed0: int, fixed1: int) -> bool:
        if self.inc_mask is None:
            return False
        if bound > self.inc_val + tie_tol(self.inc_val):
            return True
        if bound >= self.inc_val - tie_tol(self.inc_val):
            free = full_mask(self.n) & ~(fixed0 | fixed1)
            return _lexmin_key(fixed1, free) >= lex_key(self.inc_mask)
        return False

    def round_chain(self, x: np.ndarray) -> None:
        masks = chain_masks(sort_order(x))
        vals = self.f.evaluate_many(masks)
        for S, v in zip(masks, vals):
            self.offer(S, float(v))

    def add_tight_cuts(self, relax: Relaxation, sol: lp.LpSolution, S: int) -> bool:
        if S in self.tight_done:
            return False
        self.tight_done.add(S)
        x, z, w = relax.split(sol)
        d = self.m.decomposition
        added = False
        tol = self.m.cut_tol
        cut = tight_polar_cut(d.g, S)
        if cut.violation(x, z) > tol * max(1.0, abs(z)):
            relax.add_cut(cut)
            added = True
        if not d.h_is_zero:
            cut = nw_cut_1(d.h, S)
            if cut.violation(x, w) > tol * max(1.0, abs(w)):
                relax.add_cut(cut)
                added = True
        return added

    def unique_x(self, relax: Relaxation, sol: lp.LpSolution, S: int, fixed0: int, fixed1: int) -> bool:
        """Is S the only integer point of this node that can tie f(S)?

        A tying T has relaxation value <= f(T) <= f(S) + tol, so chi_T lies in
        the LP region {objective <= f(S) + tol} at L1 distance >= 1 from chi_S.
        A maximum distance below 1/2 over that region rules ties out.  Using
        f(S) rather than the LP optimum keeps this sound when the relaxation
        is slightly loose at chi_S.
        """
        n = self.n
        free = full_mask(n) & ~(fixed0 | fixed1)
        if not free:
            return True
        fS = self.f.evaluate(S)
        p = relax.lp.copy()
        p.add_row(p.c.copy(), "<=", fS - self.m.decomposition.offset + tie_tol(fS))
        c = np.zeros(n + 2)
        for i in elements(free):
            c[i] = 1.0 if (S >> i) & 1 else -1.0
        p.c = c
        dist = lp.solve(p, sol.basis)
        if not dist.optimal:
            return False
        base = sum(1.0 for i in elements(free) if (S >> i) & 1)
        return base - dist.objective < 0.5


def branch_and_bound(model: ModelConfig) -> SolveReport:
    t0 = time.perf_counter()
    n = model.n
    relax = Relaxation(model)
    try:
        root = root_cut_loop(model, relax)
    except Infeasible:
        return SolveReport("infeasible", None, None, math.inf, math.inf, 1, 0, dict(relax.counts), 0,
                           time.perf_counter() - t0, math.inf)
    root_cut_count = len(relax.pool)
    search = _Search(model)
    heap: list[_Node] = []
    seq = 0
    status = "optimal"
    pending = (_Node(root.bound, 0, 0, 0, 0, root.solution.basis), root.solution)

    while True:
        if pending is None:
            if not heap:
                break
            node = heapq.heappop(heap)
            if search.prunable(node.bound, node.fixed0, node.fixed1):
                continue
            sol = None
        else:
            node, sol = pending
            pending = None
        if search.nodes >= model.node_limit or time.perf_counter() - t0 > model.time_limit:
            heapq.heappush(heap, node)
            status = "limit"
            break
        search.nodes += 1
        f0, f1 = node.fixed0, node.fixed1
        if sol is None:
            sol = relax.solve(f0, f1, node.warm)
            if sol.optimal and model.use_cuts and model.cuts_at_nodes:
                sol = relax.cut_loop(sol, f0, f1)

        branch_var = None
        while True:
            if sol.status is lp.Status.INFEASIBLE:
                break
            bound = relax.bound(sol)
            if search.prunable(bound, f0, f1):
                break
            x, _, _ = relax.split(sol)
            search.round_chain(x)
            frac = np.minimum(x, 1.0 - x)
            if frac.max() > INTEGRALITY_TOL:
                score = np.round(frac, 9)
                branch_var = int(np.argmax(score))
                break
            S = int(sum(1 << i for i in range(n) if x[i] > 0.5))
            if search.add_tight_cuts(relax, sol, S):
                sol = relax.solve(f0, f1, sol.basis)
                continue
            search.offer(S)
            if search.prunable(bound, f0, f1) or search.unique_x(relax, sol, S, f0, f1):
                break
            free = full_mask(n) & ~(f0 | f1)
            branch_var = elements(free)[0]
            break

        if branch_var is None:
            continue
        search.branchings += 1
        bound = relax.bound(sol)
        warm = sol.basis
        for child0, child1 in ((f0 | (1 << branch_var), f1), (f0, f1 | (1 << branch_var))):
            seq += 1
            heapq.heappush(heap, _Node(bound, seq, child0, child1, node.depth + 1, warm))

    best_bound = min([search.inc_val] + [nd.bound for nd in heap]) if status == "limit" else search.inc_val
    if search.inc_mask is None and status == "optimal":
        status = "infeasible"
    rep = SolveReport(
        status=status,
        optimal_value=None if search.inc_mask is None else search.inc_val,
        optimal_mask=search.inc_mask,
        bound_root=root.bound_no_cuts,
        bound_root_cuts=root.bound,
        nodes=search.nodes,
        branchings=search.branchings,
        cuts=dict(relax.counts),
        root_cuts=root_cut_count,
        time_sec=time.perf_counter() - t0,
        best_bound=best_bound,
        root_history=root.history,
        pool=list(relax.pool),
    )
    if rep.optimal_value is not None:
        rep.gap, rep.cgap = compute_stats(rep, rep.optimal_value)
    return rep


def solve(f: SetFunction, constraints=(), **kw) -> SolveReport:
    """Decompose ``f`` by family and run branch-and-bound."""
    return branch_and_bound(make_model(f, constraints, **kw))
