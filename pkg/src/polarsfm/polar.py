"""Polar (extended polymatroid) cuts, greedy extreme points, Lovász extension."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .setfn import SetFunction, TOL, elements

VIOLATION_TOL = 1e-6
MAX_ENUM_N = 8
MAX_EXACTNESS_N = 12


@dataclass(frozen=True, eq=False)
class LinearCut:
    """Affine cut on one auxiliary variable ``t``.

    epigraph (``sense="epi"``):    coef . x + const <= t
    hypograph (``sense="hypo"``):  t <= coef . x + const
    """

    coef: np.ndarray
    const: float
    sense: str
    provenance: str
    support: int | None = None  # mask of the set the cut was built from
    target: str = field(default="")

    def __post_init__(self):
        if self.sense not in ("epi", "hypo"):
            raise ValueError(f"unknown cut sense {self.sense!r}")
        if self.provenance not in ("polar", "nw1", "nw2"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        coef = np.array(self.coef, dtype=float)
        if not np.all(np.isfinite(coef)) or not np.isfinite(self.const):
            raise ValueError("cut coefficients must be finite")
        coef.setflags(write=False)
        object.__setattr__(self, "coef", coef)
        if not self.target:
            object.__setattr__(self, "target", "z" if self.sense == "epi" else "w")

    def affine(self, x) -> float:
        return float(self.coef @ np.asarray(x, dtype=float) + self.const)

    def violation(self, x, t: float) -> float:
        """Positive when ``(x, t)`` violates the cut."""
        a = self.affine(x)
        return a - t if self.sense == "epi" else t - a

    def __repr__(self):
        op = "<= t" if self.sense == "epi" else ">= t"
        return f"LinearCut({self.provenance}: {self.coef.tolist()}.x + {self.const:g} {op})"


def sort_order(x) -> list[int]:
    """Indices by nonincreasing value, ties broken by smaller index."""
    x = np.asarray(x, dtype=float)
    return sorted(range(x.size), key=lambda i: (-x[i], i))


def chain_masks(order) -> list[int]:
    masks = [0]
    for i in order:
        masks.append(masks[-1] | (1 << i))
    return masks


def greedy_extreme_point(f: SetFunction, xbar) -> tuple[np.ndarray, list[int]]:
    """Edmonds' greedy: chain marginals along the nonincreasing order of ``xbar``."""
    xbar = np.asarray(xbar, dtype=float)
    if xbar.shape != (f.n,):
        raise ValueError(f"point must have length {f.n}")
    if np.any(xbar < 0):
        raise ValueError("greedy needs a nonnegative point")
    order = sort_order(xbar)
    vals = f.evaluate_many(chain_masks(order))
    pi = np.empty(f.n)
    pi[order] = np.diff(vals)
    return pi, order


def lovasz_extension(f: SetFunction, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (f.n,):
        raise ValueError(f"point must have length {f.n}")
    if np.any(x < 0) or np.any(x > 1):
        raise ValueError("Lovász extension is defined on [0,1]^n")
    order = sort_order(x)
    xs = x[order]
    vals = f.evaluate_many(chain_masks(order))[1:]
    weights = np.append(xs[:-1] - xs[1:], xs[-1])
    return float(weights @ vals)


def separate_polar(f_sub: SetFunction, xbar, zbar: float, tol: float = VIOLATION_TOL) -> LinearCut | None:
    """Most violated polar inequality at ``(xbar, zbar)``, or None.

    The caller vouches that ``f_sub`` is submodular.  A nonzero ``f_sub(empty)``
    is carried in the cut constant: ``pi.x + f(empty) <= z``.
    """
    pi, order = greedy_extreme_point(f_sub, xbar)
    cut = LinearCut(pi, f_sub.evaluate(0), "epi", "polar", support=None)
    if cut.violation(xbar, zbar) > tol * max(1.0, abs(zbar)):
        return cut
    return None


def tight_polar_cut(f_sub: SetFunction, S: int) -> LinearCut:
    """Polar cut from the greedy order that puts S first; tight at chi_S."""
    x = ((S >> np.arange(f_sub.n)) & 1).astype(float)
    pi, _ = greedy_extreme_point(f_sub, x)
    return LinearCut(pi, f_sub.evaluate(0), "epi", "polar", support=S)


def enumerate_extreme_points(f_sub: SetFunction) -> list[np.ndarray]:
    """Chain vectors over all n! orders, deduplicated (tolerance 1e-9)."""
    n = f_sub.n
    if n > MAX_ENUM_N:
        raise ValueError(f"enumeration over n! orders refused for n={n} > {MAX_ENUM_N}")
    table = f_sub.table()
    seen: dict[tuple, np.ndarray] = {}
    for order in itertools.permutations(range(n)):
        vals = table[chain_masks(order)]
        pi = np.empty(n)
        pi[list(order)] = np.diff(vals)
        key = tuple(np.round(pi / TOL).astype(np.int64))
        seen.setdefault(key, pi)
    return [seen[k] for k in sorted(seen)]


@dataclass
class ExactnessRow:
    S: int
    f: float
    g: float
    pi: np.ndarray


@dataclass
class ExactnessReport:
    exact: bool
    rows: list[ExactnessRow]

    def witness(self) -> ExactnessRow | None:
        for r in self.rows:
            if abs(r.f - r.g) > 1e-7:
                return r
        return None


def polyhedron_lp(f: SetFunction, objective_mask: int) -> lp.LinearProgram:
    """max pi(S) over P_f = {pi : pi(T) <= f(T) for all nonempty T}."""
    n = f.n
    vals = f.table() - f.evaluate(0)
    obj = ((objective_mask >> np.arange(n)) & 1).astype(float)
    p = lp.LinearProgram(obj, -np.inf, np.inf, maximize=True)
    for T in range(1, 1 << n):
        row = ((T >> np.arange(n)) & 1).astype(float)
        p.add_row(row, "<=", vals[T])
    return p


def verify_exactness(f: SetFunction, tol: float = 1e-7) -> ExactnessReport:
    """Check f(S) = max{pi(S) : pi in P_f} for every S by solving one LP per S."""
    n = f.n
    if n > MAX_EXACTNESS_N:
        raise ValueError(f"verify_exactness builds 2^n rows; n={n} exceeds {MAX_EXACTNESS_N}")
    f0 = f.evaluate(0)
    rows = []
    p = polyhedron_lp(f, 0)
    warm = None
    for S in range(1 << n):
        p.c = ((S >> np.arange(n)) & 1).astype(float)
        sol = lp.solve(p, warm)
        if not sol.optimal:
            raise RuntimeError(f"LP for S={elements(S)} ended with status {sol.status.value}")
        warm = sol.basis
        fS = f.evaluate(S) - f0
        rows.append(ExactnessRow(S, fS, sol.objective, sol.x.copy()))
    exact = all(abs(r.f - r.g) <= tol for r in rows)
    return ExactnessReport(exact, rows)
