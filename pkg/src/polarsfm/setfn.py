"""Set functions over a ground set {0, ..., n-1}.

Subsets are plain ``int`` bit masks: bit ``i`` set means element ``i`` is in
the set.  Every function is immutable and evaluation is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

TOL = 1e-9
MAX_N = 63
MAX_SUBMODULAR_CHECK_N = 20


# ---------------------------------------------------------------------------
# subset masks


def mask_of(elements: Iterable[int]) -> int:
    m = 0
    for i in elements:
        m |= 1 << int(i)
    return m


def elements(mask: int, n: int | None = None) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    if n is not None and out and out[-1] >= n:
        raise ValueError(f"mask has bits above position {n - 1}")
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def full_mask(n: int) -> int:
    return (1 << n) - 1


def indicator(mask: int, n: int) -> np.ndarray:
    return ((mask >> np.arange(n)) & 1).astype(float)


def lex_key(mask: int) -> tuple[int, ...]:
    """Sort key ordering subsets lexicographically by their sorted elements."""
    return tuple(elements(mask))


def bit_matrix(masks: np.ndarray, n: int) -> np.ndarray:
    masks = np.asarray(masks, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(float)


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_N:
        raise ValueError(f"ground set size must be in [1, {MAX_N}], got {n}")


# ---------------------------------------------------------------------------
# functions


class SetFunction:
    """Base class.  Subclasses implement ``_eval`` on a 0/1 float vector."""

    n: int

    def __call__(self, S: int | Iterable[int]) -> float:
        return self.evaluate(S if isinstance(S, (int, np.integer)) else mask_of(S))

    def evaluate(self, S: int) -> float:
        S = int(S)
        if S < 0 or S >> self.n:
            raise ValueError(f"subset mask {S:#x} outside ground set of size {self.n}")
        return float(self._eval(indicator(S, self.n)))

    def evaluate_many(self, masks: Sequence[int] | np.ndarray) -> np.ndarray:
        return np.array([self.evaluate(int(m)) for m in masks], dtype=float)

    def table(self) -> np.ndarray:
        """All ``2**n`` values indexed by mask (chunked for larger n)."""
        if self.n > 26:
            raise ValueError("table() refuses n > 26")
        size = 1 << self.n
        out = np.empty(size)
        chunk = 1 << 15
        for start in range(0, size, chunk):
            masks = np.arange(start, min(size, start + chunk), dtype=np.int64)
            out[start : start + len(masks)] = self.evaluate_many(masks)
        return out

    def _eval(self, x: np.ndarray) -> float:  # pragma: no cover - abstract
        raise NotImplementedError

    def __neg__(self) -> "SetFunction":
        return Combination(self.n, ((-1.0, self),))


@dataclass(frozen=True, eq=False)
class TabularFunction(SetFunction):
    n: int
    values: np.ndarray

    def __post_init__(self):
        _check_n(self.n)
        if self.n > 26:
            raise ValueError("tabular functions need n <= 26")
        vals = np.array(self.values, dtype=float)
        if vals.shape != (1 << self.n,):
            raise ValueError(f"tabular function needs exactly {1 << self.n} values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("tabular values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def evaluate(self, S: int) -> float:
        S = int(S)
        if S < 0 or S >> self.n:
            raise ValueError(f"subset mask {S:#x} outside ground set of size {self.n}")
        return float(self.values[S])

    def evaluate_many(self, masks) -> np.ndarray:
        return self.values[np.asarray(masks, dtype=np.int64)]

    def table(self) -> np.ndarray:
        return self.values.copy()


@dataclass(frozen=True, eq=False)
class QuadraticFunction(SetFunction):
    """f(x) = sum_{i != j} Q_ij x_i x_j + c'x with a zero-diagonal Q."""

    Q: np.ndarray
    c: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        c = np.array(self.c, dtype=float)
        n = c.size
        _check_n(n)
        if Q.shape != (n, n):
            raise ValueError(f"Q must be {n}x{n}, got {Q.shape}")
        if np.any(np.diag(Q) != 0):
            raise ValueError("Q must have zero diagonal; fold it into c (x_i^2 = x_i)")
        Q.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "n", n)

    @classmethod
    def from_matrix(cls, Q, c) -> "QuadraticFunction":
        Q = np.array(Q, dtype=float)
        c = np.array(c, dtype=float) + np.diag(Q)
        np.fill_diagonal(Q, 0.0)
        return cls(Q, c)

    def evaluate(self, S: int) -> float:
        idx = elements(int(S), self.n)
        if not idx:
            return 0.0
        return float(self.Q[np.ix_(idx, idx)].sum() + self.c[idx].sum())

    def evaluate_many(self, masks) -> np.ndarray:
        X = bit_matrix(masks, self.n)
        return np.einsum("ki,ij,kj->k", X, self.Q, X) + X @ self.c

    def _eval(self, x):
        return x @ self.Q @ x + self.c @ x


def _root(v: np.ndarray | float, p: int):
    # v >= 0 mathematically; clip tiny negative rounding
    return np.maximum(v, 0.0) ** (1.0 / p)


@dataclass(frozen=True, eq=False)
class MomentsFunction(SetFunction):
    """Mean-risk utility with higher moments.

    f(x) = -omega*mu'x + lam*(sum sigma^2 x)^(1/2) - (1-lam)*(sum gamma^3 x)^(1/3)
           + lam*(sum kappa^4 x)^(1/4)
    """

    mu: np.ndarray
    sigma: np.ndarray
    gamma: np.ndarray
    kappa: np.ndarray
    lam: float
    omega: float = 1.0
    n: int = field(init=False)

    def __post_init__(self):
        arrs = {}
        for name in ("mu", "sigma", "gamma", "kappa"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            arrs[name] = a
        n = arrs["mu"].size
        _check_n(n)
        for name, a in arrs.items():
            if a.shape != (n,):
                raise ValueError(f"{name} must have length {n}")
            object.__setattr__(self, name, a)
        for name in ("sigma", "gamma", "kappa"):
            if np.any(arrs[name] < 0):
                raise ValueError(f"{name} must be nonnegative")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "omega", float(self.omega))

    def _terms(self, X):
        lam = self.lam
        return (
            -self.omega * (X @ self.mu)
            + lam * _root(X @ self.sigma**2, 2)
            - (1.0 - lam) * _root(X @ self.gamma**3, 3)
            + lam * _root(X @ self.kappa**4, 4)
        )

    def _eval(self, x):
        return self._terms(x)

    def evaluate_many(self, masks) -> np.ndarray:
        return self._terms(bit_matrix(masks, self.n))


@dataclass(frozen=True, eq=False)
class FractionalFunction(SetFunction):
    """f(x) = c'x / (1 + a'x) - omega * s'x."""

    a: np.ndarray
    c: np.ndarray
    s: np.ndarray
    omega: float = 1.0
    n: int = field(init=False)

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        c = np.array(self.c, dtype=float)
        s = np.array(self.s, dtype=float)
        n = a.size
        _check_n(n)
        if c.shape != (n,) or s.shape != (n,):
            raise ValueError(f"a, c, s must all have length {n}")
        if np.any(a <= 0):
            raise ValueError("fractional family requires a > 0")
        if np.any(c < 0) or np.any(s < 0):
            raise ValueError("fractional family requires c, s >= 0")
        for name, v in (("a", a), ("c", c), ("s", s)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "omega", float(self.omega))

    def _terms(self, X):
        return (X @ self.c) / (1.0 + X @ self.a) - self.omega * (X @ self.s)

    def _eval(self, x):
        return self._terms(x)

    def evaluate_many(self, masks) -> np.ndarray:
        return self._terms(bit_matrix(masks, self.n))


@dataclass(frozen=True, eq=False)
class Combination(SetFunction):
    """sum_k coef_k * f_k(S) + const."""

    n: int
    terms: tuple[tuple[float, SetFunction], ...]
    const: float = 0.0

    def __post_init__(self):
        for _, fn in self.terms:
            if fn.n != self.n:
                raise ValueError("all terms must share the ground set")

    def evaluate(self, S: int) -> float:
        return float(sum(k * fn.evaluate(S) for k, fn in self.terms) + self.const)

    def evaluate_many(self, masks) -> np.ndarray:
        out = np.full(len(masks), self.const, dtype=float)
        for k, fn in self.terms:
            out += k * fn.evaluate_many(masks)
        return out


@dataclass(frozen=True, eq=False)
class CardinalityFunction(SetFunction):
    """f(S) = phi(|S|) for a callable phi on integers."""

    n: int
    phi: object

    def evaluate(self, S: int) -> float:
        return float(self.phi(popcount(int(S))))

    def evaluate_many(self, masks) -> np.ndarray:
        return np.array([self.phi(popcount(int(m))) for m in masks], dtype=float)


def modular(c) -> QuadraticFunction:
    c = np.asarray(c, dtype=float)
    return QuadraticFunction(np.zeros((c.size, c.size)), c)


def zero(n: int) -> TabularFunction:
    return TabularFunction(n, np.zeros(1 << n))


def scaled(f: SetFunction, k: float) -> SetFunction:
    return Combination(f.n, ((float(k), f),))


def added(*fs: SetFunction, weights: Sequence[float] | None = None) -> SetFunction:
    weights = weights or [1.0] * len(fs)
    return Combination(fs[0].n, tuple((float(w), f) for w, f in zip(weights, fs)))


def negate(f: SetFunction) -> SetFunction:
    return scaled(f, -1.0)


def tabulate(f: SetFunction) -> TabularFunction:
    return f if isinstance(f, TabularFunction) else TabularFunction(f.n, f.table())


# ---------------------------------------------------------------------------
# operations


def evaluate(f: SetFunction, S: int | Iterable[int]) -> float:
    return f(S)


def marginal(f: SetFunction, i: int, S: int) -> float:
    """rho_i(S) = f(S + i) - f(S); ``i`` must not be in ``S``."""
    if (S >> i) & 1:
        raise ValueError(f"element {i} already in S")
    return f.evaluate(S | (1 << i)) - f.evaluate(S)


def marginals(f: SetFunction, S: int) -> np.ndarray:
    """Vector of rho_i(S) for i not in S; entries for i in S are NaN."""
    out = np.full(f.n, np.nan)
    free = [i for i in range(f.n) if not (S >> i) & 1]
    if free:
        vals = f.evaluate_many([S] + [S | (1 << i) for i in free])
        out[free] = vals[1:] - vals[0]
    return out


def normalize(f: SetFunction) -> tuple[SetFunction, float]:
    offset = f.evaluate(0)
    if offset == 0.0:
        return f, 0.0
    if isinstance(f, TabularFunction):
        return TabularFunction(f.n, f.values - offset), offset
    return Combination(f.n, ((1.0, f),), -offset), offset


def is_submodular(f: SetFunction, tol: float = TOL) -> tuple[bool, tuple[int, int, int] | None]:
    """Exhaustive local check f(S+i) + f(S+j) >= f(S+i+j) + f(S).

    Returns ``(ok, witness)`` where the witness is ``(S, i, j)`` of the first
    violated quadruple, scanning pairs i < j in order and S within each pair.
    """
    n = f.n
    if n > MAX_SUBMODULAR_CHECK_N:
        raise ValueError(f"is_submodular is exhaustive; n={n} exceeds {MAX_SUBMODULAR_CHECK_N}")
    v = f.table()
    masks = np.arange(1 << n, dtype=np.int64)
    for i in range(n):
        bi = 1 << i
        for j in range(i + 1, n):
            bj = 1 << j
            S = masks[(masks & (bi | bj)) == 0]
            slack = v[S | bi] + v[S | bj] - v[S | bi | bj] - v[S]
            bad = np.nonzero(slack < -tol)[0]
            if bad.size:
                return False, (int(S[bad[0]]), i, j)
    return True, None


def submodularity_slacks(f: SetFunction) -> np.ndarray:
    """All local slacks f(S+i)+f(S+j)-f(S+i+j)-f(S), in (i, j, S) order."""
    n = f.n
    v = f.table()
    masks = np.arange(1 << n, dtype=np.int64)
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            bi, bj = 1 << i, 1 << j
            S = masks[(masks & (bi | bj)) == 0]
            out.append(v[S | bi] + v[S | bj] - v[S | bi | bj] - v[S])
    return np.concatenate(out) if out else np.zeros(0)
