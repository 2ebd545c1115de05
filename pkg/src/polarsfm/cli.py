"""Command-line front end: ``polarsfm {generate,solve,verify,bench}``.

Exit codes: 0 optimal / pass, 1 verification failed, 2 infeasible,
3 node or time limit, 64 usage error, 65 bad input data.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bruteforce, instances, polar, setfn, solver
from .decomp import certify, decompose
from .setfn import elements

EXIT_OK, EXIT_FAIL, EXIT_INFEASIBLE, EXIT_LIMIT, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3, 64, 65
BENCH_COLUMNS = ["lambda", "gap", "cgap", "time", "ctime", "nodes", "cnodes", "cuts"]
VERIFY_CAP = 12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="polarsfm", description="Set function minimization with polar and NW cuts.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a seeded random instance")
    g.add_argument("--family", required=True, choices=instances.FAMILIES)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--omega", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--values", help="tabular values, comma separated, indexed by mask")
    g.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="solve an instance, print a JSON report")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--cuts", choices=("on", "off"), default="on")
    s.add_argument("--max-cut-rounds", type=int, default=100)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--node-limit", type=int, default=1_000_000)
    s.add_argument("--time-limit", type=float, default=math.inf)
    s.add_argument("--cuts-at-nodes", action="store_true")
    s.add_argument("--report", help="also write the report to this path")

    v = sub.add_parser("verify", help="run a property check on a small instance")
    v.add_argument("--in", dest="inp", required=True)
    v.add_argument("--check", required=True, choices=("exactness", "submodularity", "cuts", "decomposition"))

    b = sub.add_parser("bench", help="cuts off/on sweep over lambda, averaged per lambda")
    b.add_argument("--family", required=True, choices=tuple(instances.GENERATORS))
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--instances", type=int, required=True)
    b.add_argument("--lambdas", default="0,0.2,0.4,0.6,0.8,1.0")
    b.add_argument("--seed-base", type=int, default=0)
    b.add_argument("--omega", type=float, default=1.0)
    b.add_argument("--max-cut-rounds", type=int, default=100)
    b.add_argument("--node-limit", type=int, default=1_000_000)
    b.add_argument("--time-limit", type=float, default=math.inf)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--csv", help="write the summary as CSV to this path ('-' for stdout)")
    return p


def model_from_instance(inst: instances.InstanceFile, **kw) -> solver.ModelConfig:
    return solver.make_model(inst.function(), inst.constraints, **kw)


def _fmt_set(mask: int) -> str:
    return "{" + ",".join(str(i) for i in elements(mask)) + "}"


# ---------------------------------------------------------------------------


def cmd_generate(args, out) -> int:
    if args.family == "tabular":
        if not args.values:
            raise UsageError("--family tabular needs --values")
        try:
            vals = [float(t) for t in args.values.replace(" ", "").strip("[]").split(",")]
        except ValueError:
            raise UsageError("--values must be comma-separated numbers") from None
        if len(vals) != 1 << args.n:
            raise UsageError(f"--values needs {1 << args.n} numbers for n={args.n}")
        inst = instances.InstanceFile("tabular", args.n, {"values": vals}, omega=args.omega)
    else:
        if args.values:
            raise UsageError("--values only applies to --family tabular")
        if args.lam is None:
            raise UsageError(f"--family {args.family} needs --lambda")
        if not 1 <= args.n <= 63:
            raise UsageError("--n must lie in [1, 63]")
        if not 0.0 <= args.lam <= 1.0:
            raise UsageError("--lambda must lie in [0, 1]")
        if args.seed < 0:
            raise UsageError("--seed must be nonnegative")
        inst = instances.generate(args.family, args.n, args.lam, args.omega, args.seed)
    path = instances.write_instance(args.out, inst)
    print(path, file=out)
    return EXIT_OK


def cmd_solve(args, out) -> int:
    inst = instances.read_instance(args.inp)
    try:
        model = model_from_instance(
            inst,
            use_cuts=args.cuts == "on",
            max_cut_rounds=args.max_cut_rounds,
            cut_tol=args.tol,
            node_limit=args.node_limit,
            time_limit=args.time_limit,
            cuts_at_nodes=args.cuts_at_nodes,
        )
    except ValueError as e:
        raise UsageError(str(e)) from e
    rep = solver.branch_and_bound(model)
    doc = rep.to_json()
    text = json.dumps(doc, indent=1)
    print(text, file=out)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
    return {"optimal": EXIT_OK, "infeasible": EXIT_INFEASIBLE}.get(rep.status, EXIT_LIMIT)


def cmd_verify(args, out) -> int:
    inst = instances.read_instance(args.inp)
    if inst.n > VERIFY_CAP:
        raise instances.InstanceError(f"verify enumerates subsets; n={inst.n} exceeds {VERIFY_CAP}")
    f = inst.function()
    check = args.check
    if check == "exactness":
        rep = polar.verify_exactness(f)
        print(f"{'S':<16}{'f(S)':>12}  {'pi*(S)':<40}{'g(S)':>12}", file=out)
        for r in rep.rows:
            pi = "(" + ", ".join(f"{v:.6g}" for v in r.pi) + ")"
            flag = "" if abs(r.f - r.g) <= 1e-7 else "   <-- differs"
            print(f"{_fmt_set(r.S):<16}{r.f:>12.6g}  {pi:<40}{r.g:>12.6g}{flag}", file=out)
        w = rep.witness()
        if rep.exact:
            print("exactness PASS", file=out)
            return EXIT_OK
        print(f"exactness FAIL at S={_fmt_set(w.S)}: f={w.f:.6g} g={w.g:.6g}", file=out)
        return EXIT_FAIL
    if check == "submodularity":
        ok, wit = setfn.is_submodular(f)
        if ok:
            print("submodularity PASS", file=out)
            return EXIT_OK
        S, i, j = wit
        print(f"submodularity FAIL at S={_fmt_set(S)}, i={i}, j={j}", file=out)
        return EXIT_FAIL
    if check == "decomposition":
        d = decompose(f)
        ok, wit = certify(d, f)
        print(f"decomposition {'PASS' if ok else 'FAIL'}" + ("" if ok else f": {wit[0]}"), file=out)
        return EXIT_OK if ok else EXIT_FAIL
    # cuts: run the root loop and check every cut against the right function
    model = model_from_instance(inst)
    root = solver.root_cut_loop(model)
    bad = 0
    for cut in root.cuts:
        target = model.decomposition.g if cut.sense == "epi" else model.decomposition.h
        ok, S = bruteforce.check_cut_validity(cut, target)
        if not ok:
            bad += 1
            print(f"invalid {cut.provenance} cut, violated at S={_fmt_set(S)}", file=out)
    print(f"cuts {'PASS' if not bad else 'FAIL'}: {len(root.cuts)} checked, {bad} invalid", file=out)
    return EXIT_OK if not bad else EXIT_FAIL


@dataclass
class BenchRun:
    lam: float
    seed: int
    f_star: float | None
    gap: float
    cgap: float
    time: float
    ctime: float
    nodes: int
    cnodes: int
    cuts: int
    error: str | None = None


def bench_one(family, n, lam, omega, seed, max_cut_rounds=100, node_limit=1_000_000, time_limit=math.inf) -> BenchRun:
    try:
        inst = instances.generate(family, n, lam, omega, seed)
        kw = dict(max_cut_rounds=max_cut_rounds, node_limit=node_limit, time_limit=time_limit)
        off = solver.branch_and_bound(model_from_instance(inst, use_cuts=False, **kw))
        on = solver.branch_and_bound(model_from_instance(inst, use_cuts=True, **kw))
        if on.optimal_value is None:
            return BenchRun(lam, seed, None, *[math.nan] * 4, 0, 0, 0, error=f"status {on.status}")
        f_star = on.optimal_value
        gap, _ = solver.compute_stats(off, f_star)
        _, cgap = solver.compute_stats(on, f_star)
        err = None if on.status == off.status == "optimal" else f"status off={off.status} on={on.status}"
        return BenchRun(lam, seed, f_star, gap, cgap, off.time_sec, on.time_sec, off.nodes, on.nodes,
                        sum(on.cuts.values()), err)
    except Exception as e:  # annotate and keep going
        return BenchRun(lam, seed, None, *[math.nan] * 4, 0, 0, 0, error=f"{type(e).__name__}: {e}")


def _bench_star(args):
    return bench_one(*args)


def run_bench(family, n, k, lambdas, seed_base=0, omega=1.0, jobs=1, **kw) -> tuple[list[dict], list[BenchRun]]:
    if k <= 0:
        raise UsageError("--instances must be positive (empty table)")
    tasks = [
        (family, n, lam, omega, seed_base + j, kw.get("max_cut_rounds", 100),
         kw.get("node_limit", 1_000_000), kw.get("time_limit", math.inf))
        for lam in lambdas
        for j in range(k)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            runs = list(ex.map(_bench_star, tasks))  # map keeps (lambda, seed) order
    else:
        runs = [_bench_star(t) for t in tasks]
    rows = []
    for lam in lambdas:
        ok = [r for r in runs if r.lam == lam and r.f_star is not None]
        if not ok:
            rows.append({"lambda": lam, **{c: math.nan for c in BENCH_COLUMNS[1:]}})
            continue
        rows.append({
            "lambda": lam,
            "gap": float(np.mean([r.gap for r in ok])),
            "cgap": float(np.mean([r.cgap for r in ok])),
            "time": float(np.mean([r.time for r in ok])),
            "ctime": float(np.mean([r.ctime for r in ok])),
            "nodes": float(np.mean([r.nodes for r in ok])),
            "cnodes": float(np.mean([r.cnodes for r in ok])),
            "cuts": float(np.mean([r.cuts for r in ok])),
        })
    return rows, runs


def _cell(v: float, prec: int) -> str:
    s = f"{v:.{prec}f}"
    return f"{v:.3g}" if len(s) > 9 else s


def format_table(rows: list[dict]) -> str:
    labels = {"gap": "gap (%)", "cgap": "cgap (%)", "time": "time (sec.)", "ctime": "ctime (sec.)",
              "nodes": "# nodes", "cnodes": "# cnodes", "cuts": "# cuts"}
    lines = [f"{'lambda':<14}" + "".join(f"{r['lambda']:>10.2f}" for r in rows)]
    lines.append("-" * len(lines[0]))
    for key in BENCH_COLUMNS[1:]:
        prec = 3 if key in ("time", "ctime") else 1
        lines.append(f"{labels[key]:<14}" + "".join(f"{_cell(r[key], prec):>10}" for r in rows))
    return "\n".join(lines)


def bench_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(float(r[k])) for k in BENCH_COLUMNS})
    return buf.getvalue()


def cmd_bench(args, out) -> int:
    try:
        lambdas = [float(t) for t in args.lambdas.split(",") if t.strip()]
    except ValueError:
        raise UsageError("--lambdas must be a comma-separated list of numbers") from None
    if not lambdas or any(not 0.0 <= v <= 1.0 for v in lambdas):
        raise UsageError("--lambdas must be nonempty values in [0, 1]")
    rows, runs = run_bench(
        args.family, args.n, args.instances, lambdas, args.seed_base, args.omega, args.jobs,
        max_cut_rounds=args.max_cut_rounds, node_limit=args.node_limit, time_limit=args.time_limit,
    )
    for r in runs:
        if r.error:
            print(f"# lambda={r.lam} seed={r.seed}: {r.error}", file=out)
    print(format_table(rows), file=out)
    if args.csv == "-":
        out.write(bench_csv(rows))
    elif args.csv:
        with open(args.csv, "w") as fh:
            fh.write(bench_csv(rows))
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "solve": cmd_solve, "verify": cmd_verify, "bench": cmd_bench}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.cmd](args, out)
    except UsageError as e:
        print(f"polarsfm {args.cmd}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (instances.InstanceError, ValueError, OSError) as e:
        print(f"polarsfm {args.cmd}: error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
