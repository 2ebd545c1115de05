"""Seeded instance generators and the instance/report JSON formats.

Draws come from splitmix64 so an instance is fully determined by
(family, n, lambda, omega, seed) on every platform.  Draw order:

* quadratic: Q_ij for all i != j in row-major order, then c
* moments:   mu, then a, then sigma, gamma, kappa (each a block of n draws)
* fractional: a, then s, then r (c = r * a)
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bruteforce import Constraint
from .setfn import FractionalFunction, MomentsFunction, QuadraticFunction, SetFunction, TabularFunction

MASK64 = (1 << 64) - 1
FAMILIES = ("quadratic", "moments", "fractional", "tabular")


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4B7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self, a: float, b: float) -> float:
        return a + (b - a) * (self.next_u64() / 2.0**64)


class InstanceError(ValueError):
    pass


@dataclass
class InstanceFile:
    family: str
    n: int
    params: dict
    constraints: list[Constraint] = field(default_factory=list)
    seed: int | None = None
    lam: float | None = None
    omega: float = 1.0

    def function(self) -> SetFunction:
        p = self.params
        if self.family == "tabular":
            return TabularFunction(self.n, p["values"])
        if self.family == "quadratic":
            return QuadraticFunction(np.array(p["Q"], float), self.omega * np.array(p["c"], float))
        if self.family == "moments":
            return MomentsFunction(p["mu"], p["sigma"], p["gamma"], p["kappa"], self.lam, self.omega)
        if self.family == "fractional":
            return FractionalFunction(p["a"], p["c"], p["s"], self.omega)
        raise InstanceError(f"unknown family {self.family!r}")

    def to_dict(self) -> dict:
        def plain(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            return v

        return {
            "family": self.family,
            "n": self.n,
            "seed": self.seed,
            "lambda": self.lam,
            "omega": self.omega,
            "params": {k: plain(v) for k, v in self.params.items()},
            "constraints": [{"a": c.a.tolist(), "b": c.b} for c in self.constraints],
        }


_PARAM_FIELDS = {
    "tabular": ("values",),
    "quadratic": ("Q", "c"),
    "moments": ("mu", "sigma", "gamma", "kappa"),
    "fractional": ("a", "c", "s"),
}
_TOP_FIELDS = {"family", "n", "seed", "lambda", "omega", "params", "constraints"}


def _vec(v, n, where):
    if not isinstance(v, list) or len(v) != n or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in v):
        raise InstanceError(f"field {where!r} must be a list of {n} numbers")
    return [float(t) for t in v]


def from_dict(d: dict) -> InstanceFile:
    if not isinstance(d, dict):
        raise InstanceError("instance must be a JSON object")
    unknown = set(d) - _TOP_FIELDS
    if unknown:
        raise InstanceError(f"unknown field(s): {', '.join(sorted(unknown))}")
    for key in ("family", "n", "params"):
        if key not in d:
            raise InstanceError(f"missing required field {key!r}")
    fam = d["family"]
    if fam not in FAMILIES:
        raise InstanceError(f"field 'family' must be one of {FAMILIES}, got {fam!r}")
    n = d["n"]
    if not isinstance(n, int) or isinstance(n, bool) or not 1 <= n <= 63:
        raise InstanceError("field 'n' must be an integer in [1, 63]")
    params = d["params"]
    if not isinstance(params, dict):
        raise InstanceError("field 'params' must be an object")
    want = _PARAM_FIELDS[fam]
    unknown = set(params) - set(want)
    if unknown:
        raise InstanceError(f"unknown field(s) in 'params': {', '.join(sorted(unknown))}")
    out = {}
    for key in want:
        if key not in params:
            raise InstanceError(f"missing required field 'params.{key}'")
        if key == "Q":
            Q = params[key]
            if not isinstance(Q, list) or len(Q) != n:
                raise InstanceError(f"field 'params.Q' must be an {n}x{n} matrix")
            out[key] = [_vec(row, n, "params.Q") for row in Q]
        elif key == "values":
            out[key] = _vec(params[key], 1 << n, "params.values")
        else:
            out[key] = _vec(params[key], n, f"params.{key}")
    cons = []
    for k, c in enumerate(d.get("constraints") or []):
        if not isinstance(c, dict) or set(c) != {"a", "b"}:
            raise InstanceError(f"field 'constraints[{k}]' must have exactly keys 'a' and 'b'")
        if not isinstance(c["b"], (int, float)):
            raise InstanceError(f"field 'constraints[{k}].b' must be a number")
        cons.append(Constraint(_vec(c["a"], n, f"constraints[{k}].a"), c["b"]))
    lam = d.get("lambda")
    if lam is not None and not isinstance(lam, (int, float)):
        raise InstanceError("field 'lambda' must be a number or null")
    if fam == "moments" and lam is None:
        raise InstanceError("missing required field 'lambda' for family 'moments'")
    omega = d.get("omega", 1.0)
    if omega is None:
        omega = 1.0
    if not isinstance(omega, (int, float)):
        raise InstanceError("field 'omega' must be a number")
    seed = d.get("seed")
    if seed is not None and (not isinstance(seed, int) or not 0 <= seed <= MASK64):
        raise InstanceError("field 'seed' must be an unsigned 64-bit integer or null")
    inst = InstanceFile(fam, n, out, cons, seed, None if lam is None else float(lam), float(omega))
    try:
        inst.function()
    except ValueError as e:
        raise InstanceError(f"invalid parameters: {e}") from e
    return inst


def read_instance(path) -> InstanceFile:
    text = Path(path).read_text()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    try:
        return from_dict(d)
    except InstanceError as e:
        raise InstanceError(f"{path}: {e}") from e


def write_instance(path, inst: InstanceFile) -> Path:
    path = Path(path)
    path.write_text(json.dumps(inst.to_dict(), indent=1) + "\n")
    return path


# ---------------------------------------------------------------------------
# generators


def quadratic_instance(n: int, lam: float, omega: float = 1.0, seed: int = 0) -> InstanceFile:
    _check_lambda(lam)
    rng = SplitMix64(seed)
    Q = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                Q[i, j] = rng.uniform(-100.0 * lam, 100.0 * (1.0 - lam))
    c = np.array([rng.uniform(-100.0 * (1.0 - lam) * (n - 1), 100.0 * lam * (n - 1)) for _ in range(n)])
    return InstanceFile("quadratic", n, {"Q": Q, "c": c}, [], seed, float(lam), float(omega))


def moments_instance(n: int, lam: float, omega: float = 1.0, seed: int = 0) -> InstanceFile:
    _check_lambda(lam)
    rng = SplitMix64(seed)
    mu = np.array([rng.uniform(0.0, 100.0) for _ in range(n)])
    a = np.array([rng.uniform(0.0, 100.0) for _ in range(n)])
    sigma, gamma, kappa = (np.array([rng.uniform(0.0, mu[i]) for i in range(n)]) for _ in range(3))
    params = {"mu": mu, "sigma": sigma, "gamma": gamma, "kappa": kappa}
    knap = Constraint(a, 0.5 * float(a.sum()))
    return InstanceFile("moments", n, params, [knap], seed, float(lam), float(omega))


def fractional_instance(n: int, lam: float, omega: float = 1.0, seed: int = 0) -> InstanceFile:
    _check_lambda(lam)
    rng = SplitMix64(seed)

    def positive():
        while True:
            v = rng.uniform(0.0, 10.0)
            if v > 0.0:
                return v

    a = np.array([positive() for _ in range(n)])
    s = np.array([rng.uniform(0.0, 10.0) for _ in range(n)])
    r = np.array([rng.uniform(1.0 + lam, 2.0) for _ in range(n)])
    return InstanceFile("fractional", n, {"a": a, "c": r * a, "s": s}, [], seed, float(lam), float(omega))


def _check_lambda(lam):
    if not 0.0 <= lam <= 1.0 or math.isnan(lam):
        raise ValueError("lambda must lie in [0, 1]")


GENERATORS = {
    "quadratic": quadratic_instance,
    "moments": moments_instance,
    "fractional": fractional_instance,
}


def generate(family: str, n: int, lam: float, omega: float = 1.0, seed: int = 0) -> InstanceFile:
    try:
        gen = GENERATORS[family]
    except KeyError:
        raise ValueError(f"no generator for family {family!r}") from None
    return gen(n, lam, omega, seed)


def gen_quadratic(n, lam, omega=1.0, seed=0) -> QuadraticFunction:
    return quadratic_instance(n, lam, omega, seed).function()


def gen_moments(n, lam, omega=1.0, seed=0) -> tuple[MomentsFunction, Constraint]:
    inst = moments_instance(n, lam, omega, seed)
    return inst.function(), inst.constraints[0]


def gen_fractional(n, lam, omega=1.0, seed=0) -> FractionalFunction:
    return fractional_instance(n, lam, omega, seed).function()


REPORT_FIELDS = {
    "status": str,
    "optimal_value": (float, int, type(None)),
    "optimal_set": list,
    "bound_root": (float, int, type(None)),
    "bound_root_cuts": (float, int, type(None)),
    "gap": (float, int, type(None)),
    "cgap": (float, int, type(None)),
    "nodes": int,
    "cuts": dict,
    "time_sec": (float, int),
}


def validate_report(d: dict) -> None:
    """Raise InstanceError unless ``d`` matches the report JSON schema exactly."""
    if set(d) != set(REPORT_FIELDS):
        raise InstanceError(f"report keys {sorted(d)} do not match {sorted(REPORT_FIELDS)}")
    for k, t in REPORT_FIELDS.items():
        if not isinstance(d[k], t):
            raise InstanceError(f"report field {k!r} has type {type(d[k]).__name__}")
    if set(d["cuts"]) != {"polar", "nw1", "nw2"} or not all(isinstance(v, int) for v in d["cuts"].values()):
        raise InstanceError("report field 'cuts' must map polar/nw1/nw2 to integers")
    if not all(isinstance(i, int) for i in d["optimal_set"]):
        raise InstanceError("report field 'optimal_set' must list integers")
