"""Print the exactness table for the three-element example and the two-element counterexample."""

import sys

from polarsfm.polar import verify_exactness
from polarsfm.setfn import TabularFunction, elements

EXAMPLES = {
    "singletons 1, pairs 1.9, full set 2.85": TabularFunction(3, [0, 1, 1, 1.9, 1, 1.9, 1.9, 2.85]),
    "-1 on every nonempty set": TabularFunction(2, [0, -1, -1, -1]),
}


def show(name, f):
    rep = verify_exactness(f)
    print(f"\n{name}")
    print(f"{'S':<10}{'f(S)':>8}{'g(S)':>8}   pi*(S)")
    for r in rep.rows:
        S = "{" + ",".join(str(i + 1) for i in elements(r.S)) + "}"
        pi = ", ".join(f"{v:.3g}" for v in r.pi)
        print(f"{S:<10}{r.f:>8.3g}{r.g:>8.3g}   ({pi})")
    print("exact" if rep.exact else f"not exact: g < f at {elements(rep.witness().S)}")
    return rep.exact


if __name__ == "__main__":
    results = [show(name, f) for name, f in EXAMPLES.items()]
    sys.exit(0 if results == [True, False] else 1)
