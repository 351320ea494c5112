"""Batch experiment harness.

Every subcommand writes ``<name>.json`` (report) and ``<name>.csv`` into the
output directory, plus ``<name>.timing.json`` holding wall time, so that the
report and CSV are a pure function of the configuration.  Exit status: 0 on
success, 1 on usage or structural errors, 2 on contract failures.
"""

from __future__ import annotations

import argparse
import importlib
import math
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import reporting as rp
from .bootstrap import (BootstrapConfig, garbage_advice_learner, bootstrap_decider,
                        noisy_advice_learner, parity_instance, perfect_learner)
from .circuits import (Circuit, count_functions, counting_bound_log2, exact_mcsp,
                       hardness_experiment, maxhard_tt, parse_basis)
from .designs import select_design
from .errors import ArgumentError, CapacityError, ContractFailure, StructuralError
from .generator import make_generator, sample_WL
from .truthtable import TruthTable, sample_function, tables_of_arity


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# spec parsing -------------------------------------------------------------


def read_table(path) -> TruthTable:
    return TruthTable.from_text(Path(path).read_text())


def parse_learner(spec: str):
    from . import learnkit as lk

    name, *rest = spec.split(":")
    if name == "memorizer":
        return lk.memorizer()
    if name == "dnf":
        return lk.dnf_learner(samples=int(rest[0])) if rest else lk.dnf_learner()
    if name == "class-fit":
        basis = rest[0] if rest else "aon"
        return lk.class_fit_learner(basis, int(rest[1]) if len(rest) > 1 else 4)
    if name == "always-fail":
        return lk.always_fail()
    raise ArgumentError(f"unknown learner {spec!r}")


def parse_distinguisher(spec: str, ell: int):
    from .reconstruct import Distinguisher

    if spec.endswith(".json"):
        return Distinguisher.from_circuit(Circuit.from_json(Path(spec).read_text()), ell)
    name, *rest = spec.split(":")
    if name == "mcsp":
        return Distinguisher.mcsp_threshold(ell, rest[0] if rest else "aon",
                                            int(rest[1]) if len(rest) > 1 else 3)
    if name == "const":
        return Distinguisher.constant(ell, int(rest[0]))
    if name == "ones":
        return Distinguisher.ones_at_most(ell, int(rest[0]))
    raise ArgumentError(f"unknown distinguisher {spec!r}")


def parse_property(spec: str, transforms):
    from . import natural as nt

    name, *rest = spec.split(":")
    if name == "hardness":
        P = nt.hardness_property(rest[0] if rest else "aon", int(rest[1]) if len(rest) > 1 else 2)
    elif name == "nonzero":
        P = nt.nonzero_property()
    elif name == "const":
        P = nt.constant_property(int(rest[0]))
    elif name == "unknown":
        P = nt.always_unknown()
    else:
        raise ArgumentError(f"unknown property {spec!r}")
    for tr in transforms or []:
        t, *arg = tr.split(":")
        if t == "amplify":
            P = nt.density_amplify(P)
        elif t == "noisy":
            P = nt.noisy_zero_error(P)
        elif t == "derand":
            P = nt.derandomize_zero_error(P, int(arg[0]) if arg else 1)
        elif t == "scale":
            P = nt.scale_down(P, float(arg[0]))
        else:
            raise ArgumentError(f"unknown transform {tr!r}")
    return P


def load_instance(spec: str, n: int):
    if spec == "parity":
        return parity_instance(n)
    desc = json.loads(Path(spec).read_text())
    mod, fn = desc["factory"].split(":")
    return getattr(importlib.import_module(mod), fn)(**desc.get("kwargs", {}))


def parse_advice_learner(spec: str):
    name, *rest = spec.split(":")
    if name == "perfect":
        return perfect_learner()
    if name == "noisy":
        return noisy_advice_learner(float(rest[0]) if rest else 0.01)
    if name == "garbage":
        a = int(rest[0]) if rest else 2
        return garbage_advice_learner(noisy_advice_learner(), a, "1" * a)
    raise ArgumentError(f"unknown advice learner {spec!r}")


# subcommands ----------------------------------------------------------------
# each returns (name, report dict, csv header, csv rows)


def cmd_mcsp(a):
    parse_basis(a.basis)
    if a.table:
        tables = [read_table(p) for p in a.table]
    elif a.n is not None:
        tables = list(tables_of_arity(a.n))
    else:
        raise UsageError("give --n or --table")
    rows = []
    for tt in tables:
        try:
            size, w = exact_mcsp(tt, a.basis, cap=a.cap, allow_large=a.allow_large)
            rows.append([tt.n, a.basis, tt.to_hex(), size, w.to_json()])
        except CapacityError:
            rows.append([tt.n, a.basis, tt.to_hex(), f">{a.cap}", ""])
    report = {"count": len(rows)}
    if a.maxhard:
        h = maxhard_tt(tables[0].n, a.basis, a.cap)
        report["maxhard"] = {"table": h.to_hex(), "size": exact_mcsp(h, a.basis, a.cap)[0]}
    return "mcsp", report, ["n", "basis", "table", "min_size", "witness"], rows


def cmd_counting(a):
    if a.mode == "hardness":
        rep = hardness_experiment(a.n[0], a.s, Fraction(a.delta).limit_denominator(10**6),
                                  a.trials, rp.derive_rng(a.seed, "hardness"), a.basis)
        report = {"n": rep.n, "s": rep.s, "delta": rep.delta, "trials": rep.trials,
                  "approximable": rep.approximable, "class_size": rep.class_size,
                  "mode": rep.mode, "bound": rep.bound, "union_bound": rep.union_bound,
                  "seeds": {"hardness": rp.derive_seed(a.seed, "hardness")}}
        rows = [[i, float(x)] for i, x in enumerate(rep.best_advantages)]
        return "counting-hardness", report, ["trial", "best_advantage"], rows
    rows, monotone = [], True
    for n in a.n:
        prev = None
        for s in range(a.s_min, a.s_max + 1):
            cnt = count_functions(n, a.basis, s, allow_large=a.allow_large)
            lb = counting_bound_log2(s)
            monotone &= prev is None or cnt >= prev
            prev = cnt
            rows.append([n, s, cnt, lb, math.log2(cnt) <= lb])
    report = {"monotone": monotone, "within_bound": all(r[4] for r in rows)}
    return "counting", report, ["n", "s", "count", "log2_bound", "within_bound"], rows


def cmd_nw(a):
    if a.mode == "design":
        des, sel = select_design(a.k, a.m, a.degree)
        from collections import Counter
        from itertools import combinations

        prof = Counter(len(set(x) & set(y)) for x, y in combinations(des.sets, 2))
        report = {"selection": sel, "max_intersection": des.intersection_profile(),
                  "design": des.to_dict()}
        rows = sorted([k, v] for k, v in prof.items())
        return "nw-design", report, ["intersection", "pairs"], rows
    if not a.table:
        raise UsageError("nw sample needs --table")
    f = read_table(a.table)
    gen = make_generator(f, a.gamma, a.ell, a.t, a.degree)
    rng = rp.derive_rng(a.seed, "nw-sample")
    out = Path(a.out)
    rows = []
    for i in range(a.count):
        tt = sample_WL(gen, rng)
        rp.write_text(out / f"nw-sample-{i}.tt", tt.to_text())
        rows.append([i, tt.to_hex()])
    report = {"params": gen.params, "seeds": {"nw-sample": rp.derive_seed(a.seed, "nw-sample")}}
    return "nw-sample", report, ["index", "table"], rows


def cmd_learn(a):
    from . import learnkit as lk
    from .hypothesis import error_rate
    from .oracle import MembershipOracle
    from .reconstruct import ReconstructConfig, reconstruct_full

    if a.mode == "compress":
        return cmd_compress(a)
    if a.mode == "bench":
        tasks = [(a.seed, a.n, a.k, kind, i, a.learner) for kind in ("class", "random")
                 for i in range(a.trials)]
        rows = rp.pool_map(_bench_task, tasks, a.workers)
        good = {kind: sum(1 for r in rows if r[0] == kind and r[2] == want)
                for kind, want in (("class", 0), ("random", 1))}
        report = {"n": a.n, "k": a.k, "trials": a.trials, "correct": good,
                  "samples": lk.detector_sample_count(a.n, a.k), "threshold": lk.detector_threshold(a.n, a.k)}
        return "learn-bench", report, ["kind", "trial", "verdict", "estimate"], rows
    if not a.table:
        raise UsageError(f"learn {a.mode} needs --table")
    f = read_table(a.table)
    rng = rp.derive_rng(a.seed, "learn", a.mode)
    seeds = {"learn": rp.derive_seed(a.seed, "learn", a.mode)}
    if a.mode == "run":
        oracle = MembershipOracle(f)
        h = parse_learner(a.learner).run(oracle, rng)
        if h is None:
            raise ContractFailure("learner produced no hypothesis")
        rp.write_text(Path(a.out) / "learn-run.hypothesis.json", rp.dumps(h.to_dict()))
        report = {"error": error_rate(h, f), "queries": oracle.count, "size": h.size, "seeds": seeds}
        return "learn-run", report, ["field", "value"], sorted(report.items())[:3]
    if a.mode == "convert":
        verdict, info = lk.learner_to_distinguisher(parse_learner(a.learner), a.k)(MembershipOracle(f), rng)
        report = {"verdict": verdict, "info": info, "seeds": seeds}
        return "learn-convert", report, ["verdict"], [[verdict]]
    # from-distinguisher
    D = parse_distinguisher(a.distinguisher, a.ell)
    cfg = ReconstructConfig(**{k: v for k, v in (("hybrid_samples", a.hybrid_samples),
                                                    ("candidates", a.candidates),
                                                    ("retries", a.retries)) if v is not None})
    params = {"ell": a.ell, "t": a.t, "degree": a.degree}
    try:
        H, rep = reconstruct_full(D, f, a.gamma, params, rng, cfg)
    except ContractFailure as exc:
        rp.write_text(Path(a.out) / "learn-from-distinguisher.json",
                      rp.dumps({"status": "failure", "message": str(exc),
                                "diagnostics": exc.diagnostics, "seeds": seeds}))
        raise
    rp.write_text(Path(a.out) / "learn-from-distinguisher.hypothesis.json", rp.dumps(H.to_dict()))
    report = {"status": "ok", **rep.to_dict(), "seeds": seeds}
    rows = [[i, p] for i, p in enumerate(rep.hybrid)]
    return "learn-from-distinguisher", report, ["position", "acceptance"], rows


def _bench_task(task):
    from . import learnkit as lk
    from .oracle import MembershipOracle

    seed, n, k, kind, i, learner = task
    rng = rp.derive_rng(seed, "learn-bench", kind, i)
    f = lk.random_read_once_dnf(n, rng) if kind == "class" else sample_function(n, rng)
    verdict, info = lk.learner_to_distinguisher(parse_learner(learner), k)(MembershipOracle(f), rng)
    return [kind, i, verdict, info.get("estimate", "")]


def _compress_task(task):
    from . import learnkit as lk
    from .errors import CompressionRejected

    seed, i, n, learner, table = task
    rng = rp.derive_rng(seed, "compress", i)
    tt = TruthTable.from_text(table) if table else lk.random_read_once_dnf(n, rng)
    bound = (1 << tt.n) / tt.n ** 2
    try:
        out = lk.compress_exact(tt, parse_learner(learner), rng)
    except CompressionRejected as exc:
        return [i, tt.to_hex(), False, "", "", exc.diagnostics.get("disagreements", ""), bound]
    return [i, tt.to_hex(), True, out.size, out.hypothesis_size, out.disagreements, bound]


def cmd_compress(a):
    if a.table:
        tasks = [(a.seed, i, 0, a.learner, Path(p).read_text()) for i, p in enumerate(a.table)]
    else:
        tasks = [(a.seed, i, a.n, a.learner, None) for i in range(a.bench)]
    rows = rp.pool_map(_compress_task, tasks, a.workers)
    ok = [r for r in rows if r[2]]
    report = {"functions": len(rows), "accepted": len(ok),
              "within_bound": all(r[3] <= r[6] + r[4] for r in ok)}
    header = ["index", "table", "accepted", "size", "hypothesis_size", "disagreements", "bound"]
    return "compress", report, header, rows


def cmd_natural(a):
    from . import natural as nt

    P = parse_property(a.property, a.transform)
    rng = rp.derive_rng(a.seed, "natural")
    rows = []
    for n in a.n:
        if n <= 3 and P.randomness(n) == 0:
            d = nt.exact_density(P, n)
            lo = hi = d
            exact = True
        else:
            d, (lo, hi) = nt.sampled_density(P, n, a.samples, rng)
            exact = False
        viol = nt.usefulness_violations(P, n, a.basis, a.s) if n <= 4 else ""
        rows.append([P.name, n, d, lo, hi, exact, viol])
    report = {"property": P.name, "seeds": {"natural": rp.derive_seed(a.seed, "natural")}}
    return "natural", report, ["property", "n", "density", "lo", "hi", "exact", "violations"], rows


def cmd_game(a):
    from . import games as gm

    if a.random:
        r, c = (int(x) for x in a.random.lower().split("x"))
        g = rp.derive_rng(a.seed, "game-matrix")
        A = g.integers(-a.den, a.den + 1, size=(r, c))
        M = gm.GameMatrix([[Fraction(int(v), a.den) for v in row] for row in A])
        rows_tt = None
    else:
        rows_tt = list(tables_of_arity(a.n))
        M = gm.build_matrix(rows_tt, gm.point_probes(a.n, a.probes), a.n)
    sol = gm.game_value(M, a.mode, a.delta)
    report = {"shape": list(M.shape), "mode": sol.mode, "value": sol.value,
              "row_value": sol.row_value, "col_value": sol.col_value, "pivots": sol.pivots,
              "rounds": sol.rounds, "p": sol.p.to_dict(), "q": sol.q.to_dict(),
              "seeds": {"game": rp.derive_seed(a.seed, "game")}}
    if a.mode == "exact":
        ss = gm.small_support(M, a.delta, rp.derive_rng(a.seed, "game"), sol)
        smp = gm.strategy_to_sampler(ss.p, rows_tt)
        report["small_support"] = {"k_rows": ss.p.k, "k_cols": ss.q.k, "vp": ss.vp, "vq": ss.vq,
                                   "attempts": ss.attempts, "first_ok": ss.first_ok,
                                   "sampler_bits": smp.bits, "sampler_depth": smp.depth,
                                   "sampler_tv": smp.total_variation(),
                                   "sampler_tv_float": float(smp.total_variation())}
    rows = [["row", i, w] for i, w in zip(sol.p.support, sol.p.weights or [])]
    rows += [["col", j, w] for j, w in zip(sol.q.support, sol.q.weights or [])]
    return "game", report, ["side", "index", "weight"], rows


def _bootstrap_task(task):
    seed, i, instance, learner, n, cfg = task
    dsr, rsr, refs = load_instance(instance, n)
    rng = rp.derive_rng(seed, "bootstrap", i)
    try:
        dec, phases = bootstrap_decider(parse_advice_learner(learner), dsr, rsr, n, rng,
                                    BootstrapConfig(**cfg), refs)
    except ContractFailure as exc:
        return {"trial": i, "failed_arity": getattr(exc, "arity", None),
                "phases": exc.diagnostics.get("phases", []), "exact": False}
    exact = dec.to_table(n) == refs[n] if n in refs else None
    return {"trial": i, "failed_arity": None, "phases": phases, "exact": exact}


def cmd_bootstrap(a):
    cfg = {"t_cap": a.t_cap, "learner_runs": a.learner_runs, "floor": a.floor}
    tasks = [(a.seed, i, a.instance, a.learner, a.n, cfg) for i in range(a.trials)]
    results = rp.pool_map(_bootstrap_task, tasks, a.workers)
    rows = []
    for res in results:
        for ph in res["phases"]:
            rows.append([res["trial"], ph["arity"], len(ph["candidates"]),
                         " ".join("-" if c["score"] is None else f"{c['score']:.6f}"
                                  for c in ph["candidates"]),
                         ph.get("selected"), ph.get("exact", "")])
    exact = sum(1 for r in results if r["exact"])
    failed = [r["trial"] for r in results if r["failed_arity"] is not None]
    report = {"n": a.n, "trials": a.trials, "exact": exact, "failed_trials": failed,
              "config": cfg, "seeds": {"bootstrap": [rp.derive_seed(a.seed, "bootstrap", i)
                                                     for i in range(a.trials)]}}
    if failed and a.trials == 1:
        raise ContractFailure(f"bootstrap failed at arity {results[0]['failed_arity']}",
                              {"report": report})
    header = ["trial", "arity", "candidates", "scores", "selected", "exact"]
    return "bootstrap", report, header, rows


# parser -------------------------------------------------------------------


def build_parser():
    common = Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--out", default=str(rp.default_out_dir()), help="output directory ($NWLAB_OUT)")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--config", help="JSON file of defaults (flags take precedence)")
    common.add_argument("--allow-large", action="store_true", help="lift enumeration guardrails")

    p = Parser(prog="nwlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)
    subs = {}

    s = sub.add_parser("mcsp", parents=[common], help="exact minimum circuit size")
    s.add_argument("--n", type=int)
    s.add_argument("--table", nargs="*")
    s.add_argument("--basis", default="aon")
    s.add_argument("--cap", type=int, default=12)
    s.add_argument("--maxhard", action="store_true")
    s.set_defaults(fn=cmd_mcsp)
    subs["mcsp"] = s

    s = sub.add_parser("counting", parents=[common], help="class counts and random hardness")
    s.add_argument("mode", nargs="?", choices=["classes", "hardness"], default="classes")
    s.add_argument("--n", type=int, nargs="+", default=[2, 3])
    s.add_argument("--basis", default="aon")
    s.add_argument("--s-min", type=int, default=2)
    s.add_argument("--s-max", type=int, default=8)
    s.add_argument("--s", type=int, default=4)
    s.add_argument("--delta", type=float, default=0.25)
    s.add_argument("--trials", type=int, default=200)
    s.set_defaults(fn=cmd_counting)
    subs["counting"] = s

    s = sub.add_parser("nw", parents=[common], help="designs and generator samples")
    s.add_argument("mode", choices=["design", "sample"])
    s.add_argument("--k", type=int, default=16)
    s.add_argument("--m", type=int, default=8)
    s.add_argument("--degree", type=int)
    s.add_argument("--table")
    s.add_argument("--gamma", type=float, default=0.1)
    s.add_argument("--ell", type=int, default=3)
    s.add_argument("--t", type=int, default=1)
    s.add_argument("--count", type=int, default=4)
    s.set_defaults(fn=cmd_nw)
    subs["nw"] = s

    s = sub.add_parser("learn", parents=[common], help="learners and reconstruction")
    s.add_argument("mode", choices=["run", "bench", "compress", "convert", "from-distinguisher"])
    s.add_argument("--table", nargs="?")
    s.add_argument("--learner", default="dnf")
    s.add_argument("--n", type=int, default=10)
    s.add_argument("--k", type=float, default=0.5)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--bench", type=int, default=20)
    s.add_argument("--distinguisher", default="mcsp:aon:3")
    s.add_argument("--gamma", type=float, default=0.1)
    s.add_argument("--ell", type=int, default=3)
    s.add_argument("--t", type=int, default=1)
    s.add_argument("--degree", type=int)
    s.add_argument("--hybrid-samples", type=int)
    s.add_argument("--candidates", type=int)
    s.add_argument("--retries", type=int)
    s.set_defaults(fn=cmd_learn)
    subs["learn"] = s

    s = sub.add_parser("compress", parents=[common], help="exact compression from a learner")
    s.add_argument("--table", nargs="*")
    s.add_argument("--bench", type=int, default=20)
    s.add_argument("--n", type=int, default=10)
    s.add_argument("--learner", default="dnf")
    s.set_defaults(fn=cmd_compress)
    subs["compress"] = s

    s = sub.add_parser("natural", parents=[common], help="property transforms")
    s.add_argument("--property", default="hardness:aon:2")
    s.add_argument("--transform", nargs="*", default=[])
    s.add_argument("--n", type=int, nargs="+", default=[2, 3])
    s.add_argument("--samples", type=int, default=10000)
    s.add_argument("--basis", default="aon")
    s.add_argument("--s", type=int, default=2)
    s.set_defaults(fn=cmd_natural)
    subs["natural"] = s

    s = sub.add_parser("game", parents=[common], help="function-versus-probe game")
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--probes", type=int, default=1)
    s.add_argument("--random", help="RxC random matrix instead of the class game")
    s.add_argument("--den", type=int, default=8)
    s.add_argument("--mode", choices=["exact", "approx"], default="exact")
    s.add_argument("--delta", type=float, default=0.1)
    s.set_defaults(fn=cmd_game)
    subs["game"] = s

    s = sub.add_parser("bootstrap", parents=[common], help="learner-to-decider bootstrap")
    s.add_argument("--instance", default="parity")
    s.add_argument("--learner", default="noisy:0.01")
    s.add_argument("--n", type=int, default=10)
    s.add_argument("--trials", type=int, default=1)
    s.add_argument("--learner-runs", type=int, default=3)
    s.add_argument("--t-cap", type=int, default=4096)
    s.add_argument("--floor", type=float, default=0.75)
    s.set_defaults(fn=cmd_bootstrap)
    subs["bootstrap"] = s
    return p, subs


def parse(argv):
    p, subs = build_parser()
    a = p.parse_args(argv)
    if a.config:
        cfg = json.loads(Path(a.config).read_text())
        known = {act.dest for act in subs[a.command]._actions}
        bad = set(cfg) - known
        if bad:
            p.error(f"unknown config keys: {', '.join(sorted(bad))}")
        subs[a.command].set_defaults(**cfg)
        a = p.parse_args(argv)
    return a


def config_of(a) -> dict:
    return {k: v for k, v in sorted(vars(a).items())
            if k not in ("fn", "out", "workers", "config")}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    a = parse(argv)
    _, subs = build_parser()
    start = time.perf_counter()
    try:
        name, report, header, rows = a.fn(a)
    except UsageError as exc:
        print(f"nwlab: error: {exc}", file=sys.stderr)
        return 1
    except ContractFailure as exc:
        print(f"nwlab: contract failure: {exc}", file=sys.stderr)
        return 2
    except (ArgumentError, StructuralError, CapacityError, ValueError, OSError, KeyError) as exc:
        subs[a.command].print_usage(sys.stderr)
        print(f"nwlab: error: {exc}", file=sys.stderr)
        return 1
    out = Path(a.out)
    full = {"command": name, "config": config_of(a), "master_seed": a.seed, **report}
    rp.write_text(out / f"{name}.json", rp.dumps(full))
    rp.write_text(out / f"{name}.csv", rp.csv_text(name, header, rows))
    rp.write_text(out / f"{name}.timing.json",
                  json.dumps({"wall_seconds": time.perf_counter() - start, "workers": a.workers}) + "\n")
    print(out / f"{name}.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
