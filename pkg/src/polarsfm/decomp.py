"""Submodular-supermodular decompositions f = g - h + offset."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .setfn import (
    TOL,
    CardinalityFunction,
    Combination,
    FractionalFunction,
    MomentsFunction,
    QuadraticFunction,
    SetFunction,
    TabularFunction,
    is_submodular,
    normalize,
    zero,
)

MAX_CERTIFY_N = 12
CERTIFY_SAMPLES = 10_000
GENERIC_RESOLUTION = 1e-6
GENERIC_LAMBDA_CAP = 1e9


class DecompositionError(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


@dataclass(frozen=True)
class Decomposition:
    """g and h are normalized submodular functions; f = g - h + offset."""

    g: SetFunction
    h: SetFunction
    offset: float = 0.0
    h_is_zero: bool = False
    multiplier: float | None = None  # lambda used by the generic/fractional builders

    @property
    def n(self) -> int:
        return self.g.n

    def evaluate(self, S: int) -> float:
        return self.g.evaluate(S) - self.h.evaluate(S) + self.offset


@dataclass(frozen=True)
class FractionalParams:
    a: np.ndarray
    c: np.ndarray
    s: np.ndarray
    omega: float
    r_min: float
    lambda_min: float


def decompose_quadratic(Q, c, omega: float = 1.0) -> Decomposition:
    Q = np.asarray(Q, dtype=float)
    c = np.asarray(c, dtype=float)
    Qneg = np.minimum(Q, 0.0)
    Qpos = np.maximum(Q, 0.0)
    g = QuadraticFunction(Qneg, omega * c)
    h = QuadraticFunction(-Qpos, np.zeros_like(c))
    return Decomposition(g, h, 0.0, h_is_zero=not Qpos.any())


def decompose_moments(mu, sigma, gamma, kappa, lam: float, omega: float = 1.0) -> Decomposition:
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    gamma = np.asarray(gamma, dtype=float)
    zeros = np.zeros_like(gamma)
    # p-norms are homogeneous: lam * ||sigma o x||_2 == ||(lam sigma) o x||_2
    g = MomentsFunction(mu, lam * np.asarray(sigma, float), zeros, lam * np.asarray(kappa, float), 1.0, omega)
    skew = MomentsFunction(zeros, zeros, gamma, zeros, 0.0, 0.0)  # = -(sum gamma^3 x)^(1/3)
    h = Combination(skew.n, ((-(1.0 - lam), skew),))
    return Decomposition(g, h, 0.0, h_is_zero=(lam == 1.0 or not gamma.any()))


def fractional_params(a, c, s, omega: float = 1.0) -> FractionalParams:
    a = np.asarray(a, dtype=float)
    c = np.asarray(c, dtype=float)
    r_min = float(np.min(c / a))
    lam_min = max(0.0, float(c.sum() - r_min * (1.0 + a.sum())))
    return FractionalParams(a, c, np.asarray(s, float), float(omega), r_min, lam_min)


def decompose_fractional(a, c, s, omega: float = 1.0) -> tuple[Decomposition, FractionalParams]:
    prm = fractional_params(a, c, s, omega)
    lam = prm.lambda_min
    g = FractionalFunction(prm.a, prm.c + lam * prm.a, prm.s, omega)
    if lam == 0.0:
        h = zero(prm.a.size)
    else:
        h = FractionalFunction(prm.a, lam * prm.a, np.zeros_like(prm.a), 0.0)
    return Decomposition(g, h, 0.0, h_is_zero=lam == 0.0, multiplier=lam), prm


def default_strict_h(n: int) -> CardinalityFunction:
    """|S| - |S|(|S|-1)/(2n): strictly submodular with local slack 1/n."""
    return CardinalityFunction(n, lambda k, n=n: k - k * (k - 1) / (2.0 * n))


def decompose_generic(f: SetFunction, h: SetFunction | None = None) -> Decomposition:
    """Smallest grid lambda >= 0 with f + lambda*h submodular.

    Doubling from the grid resolution, then bisection down to that resolution.
    """
    n = f.n
    if n > MAX_CERTIFY_N:
        raise ValueError(f"generic decomposition enumerates subsets; n={n} exceeds {MAX_CERTIFY_N}")
    fn, offset = normalize(f)
    fv = fn.table()
    hv = (h or default_strict_h(n)).table()
    hv = hv - hv[0]
    ok, _ = is_submodular(TabularFunction(n, hv))
    if not ok:
        raise DecompositionError("h must be submodular")

    def passes(lam):
        return is_submodular(TabularFunction(n, fv + lam * hv))

    def build(lam):
        g = TabularFunction(n, fv + lam * hv)
        hh = TabularFunction(n, lam * hv)
        return Decomposition(g, hh, offset, h_is_zero=lam == 0.0, multiplier=lam)

    if passes(0.0)[0]:
        return build(0.0)
    lo, hi = 0.0, GENERIC_RESOLUTION
    while True:
        ok, wit = passes(hi)
        if ok:
            break
        if hi > GENERIC_LAMBDA_CAP:
            raise DecompositionError(f"no lambda <= {GENERIC_LAMBDA_CAP:g} certifies; obstruction {wit}", wit)
        lo, hi = hi, hi * 2.0
    while hi - lo > GENERIC_RESOLUTION:
        mid = 0.5 * (lo + hi)
        if passes(mid)[0]:
            hi = mid
        else:
            lo = mid
    return build(hi)


def decompose(f: SetFunction) -> Decomposition:
    """Pick the family-specific decomposition, falling back to the generic one."""
    if isinstance(f, QuadraticFunction):
        return decompose_quadratic(f.Q, f.c, 1.0)
    if isinstance(f, MomentsFunction):
        return decompose_moments(f.mu, f.sigma, f.gamma, f.kappa, f.lam, f.omega)
    if isinstance(f, FractionalFunction):
        return decompose_fractional(f.a, f.c, f.s, f.omega)[0]
    return decompose_generic(f)


def certify(d: Decomposition, f: SetFunction, tol: float = TOL, seed: int = 0):
    """Check f = g - h + offset and submodularity of g and h.

    Enumerates for n <= 12; larger n samples random subsets and only checks
    the identity.  Returns ``(ok, witness)`` with a message and subset mask.
    """
    n = f.n
    if n <= MAX_CERTIFY_N:
        masks = np.arange(1 << n, dtype=np.int64)
    else:
        rng = np.random.default_rng(seed)
        masks = rng.integers(0, 1 << n, size=CERTIFY_SAMPLES, dtype=np.int64)
    fv = f.evaluate_many(masks)
    dv = d.g.evaluate_many(masks) - d.h.evaluate_many(masks) + d.offset
    err = np.abs(fv - dv) > tol * np.maximum(1.0, np.abs(fv))
    if err.any():
        k = int(np.argmax(err))
        return False, (f"f != g - h + offset at S={int(masks[k])}: {fv[k]} vs {dv[k]}", int(masks[k]))
    if n <= MAX_CERTIFY_N:
        for name, fn in (("g", d.g), ("h", d.h)):
            if abs(fn.evaluate(0)) > tol:
                return False, (f"{name} is not normalized", 0)
            ok, wit = is_submodular(fn, tol)
            if not ok:
                return False, (f"{name} is not submodular at (S, i, j)={wit}", wit[0])
    return True, None
