"""Command-line front end: ``gammadelta verify ...`` and ``gammadelta compute ...``.

Exit codes: 0 success, 1 failed check or compute error, 2 usage error.
All output is deterministic for a fixed configuration and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext

from . import derham, dpalg, prismenv, suites
from .deltaring import DeltaContext, delta_n, element_to_json as delta_json, frobenius_n
from .derham import DeRhamContext
from .dpalg import PDContext, divided_power, element_to_json as pd_json, pd_filtration_weight
from .errors import DepthExceeded, GammaDeltaError, TruncationOverflow
from .expr import ParseError, evaluate, parse, uses, variables
from .reports import SCHEMA
from .scalars import PLocal, PrimeContext, PrimeField, QQ

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- configuration -------------------------------------------------------------


def thread_count() -> int:
    raw = os.environ.get("GAMMADELTA_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"GAMMADELTA_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"GAMMADELTA_THREADS must be a positive integer, got {raw!r}")
    return n


def executor():
    n = thread_count()
    return ThreadPoolExecutor(max_workers=n) if n > 1 else nullcontext(None)


def _ring_prime(text):
    m = _RING.match(text or "")
    if m and (m.group("fp") or m.group("zp")):
        return int(m.group("fp") or m.group("zp"))
    return None


def make_config(args) -> suites.Config:
    if args.p is None:
        # a characteristic-p ring fixes p when --p is not given
        args.p = _ring_prime(getattr(args, "ring", None)) or 2
    try:
        PrimeContext(args.p)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.weight_bound < 1:
        raise UsageError("--weight-bound must be >= 1")
    if args.depth_bound < 1:
        raise UsageError("--depth-bound must be >= 1")
    return suites.Config(p=args.p, weight_bound=args.weight_bound, depth_bound=args.depth_bound, seed=args.seed)


def config_json(cfg: suites.Config) -> dict:
    return {"p": cfg.p, "weight_bound": cfg.weight_bound, "depth_bound": cfg.depth_bound, "seed": cfg.seed}


_RING = re.compile(r"^\s*(?:F(?P<fp>\d+)|(?P<q>Q)|Z\((?P<zp>\d+)\))\s*(?:\[(?P<ord>[^\]]*)\])?\s*(?:<(?P<div>[^>]*)>)?\s*$")


def parse_ring(text: str, p: int):
    """``F2[x]``, ``Q[x,y]``, ``F3[x]<y>``, ``Z(2)[x]<y1,y2>``.

    Returns ``(domain, ordinary, divided)``; a prime-field or p-local
    ring fixes p, and it must agree with ``--p``.
    """
    m = _RING.match(text)
    if not m:
        raise UsageError(f"cannot parse ring {text!r}; expected e.g. F2[x], Q[x,y] or F3[x]<y>")
    names = lambda s: tuple(v.strip() for v in (s or "").split(",") if v.strip())
    ordinary, divided = names(m.group("ord")), names(m.group("div"))
    for v in ordinary + divided:
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9]*", v):
            raise UsageError(f"bad variable name {v!r} in ring {text!r}")
    if len(set(ordinary + divided)) != len(ordinary + divided):
        raise UsageError(f"repeated variable in ring {text!r}")
    try:
        if m.group("fp"):
            q = int(m.group("fp"))
            domain = PrimeField(q)
        elif m.group("zp"):
            q = int(m.group("zp"))
            domain = PLocal(q)
        else:
            q, domain = p, QQ
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if q != p:
        raise UsageError(f"ring characteristic {q} does not match --p {p}")
    return domain, ordinary, divided


# -- output --------------------------------------------------------------------


def emit(args, cfg, command: str, payload: dict, text_lines) -> None:
    if args.format == "json":
        doc = {"schema": SCHEMA, "command": command, "config": config_json(cfg)}
        doc.update(payload)
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        for line in text_lines:
            sys.stdout.write(line + "\n")


def emit_error(args, exc, code: int) -> int:
    info = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, (TruncationOverflow, DepthExceeded)):
        info["needed"] = exc.needed
        info["bound"] = exc.bound
        info["flag"] = "--weight-bound" if isinstance(exc, TruncationOverflow) else "--depth-bound"
    if getattr(args, "format", "text") == "json" and code == EXIT_FAIL:
        sys.stdout.write(json.dumps({"schema": SCHEMA, "error": info}, indent=2, sort_keys=True) + "\n")
    sys.stderr.write(f"error: {exc}\n")
    return code


# -- verify --------------------------------------------------------------------


def cmd_verify(args, cfg) -> int:
    with executor() as pool:
        results = suites.run(args.suite, cfg, pool)
    checks = [(name, c) for name, cs in results for c in cs]
    gating = [c for _, c in checks if c.gating]
    failed = sum(not c.passed for c in gating)
    ok = failed == 0
    lines = [f"verify {args.suite}: p={cfg.p} N={cfg.weight_bound} D={cfg.depth_bound} seed={cfg.seed}"]
    for name, c in checks:
        lines.append(f"{name:7s} {c.line()}")
    lines.append(f"{len(gating) - failed} passed, {failed} failed" + ("" if ok else "  (FAILED)"))
    payload = {
        "suite": args.suite,
        "checks": [dict(c.to_json(), suite=name) for name, c in checks],
        "passed": len(gating) - failed,
        "failed": failed,
        "pass": ok,
    }
    emit(args, cfg, "verify", payload, lines)
    return EXIT_OK if ok else EXIT_FAIL


# -- compute -------------------------------------------------------------------


def _need_expr(args):
    if not args.expr:
        raise UsageError(f"compute {args.what} needs --expr")
    try:
        return parse(args.expr)
    except ParseError as exc:
        raise UsageError(str(exc)) from None


def _evaluate(node, ring, **kw):
    try:
        return evaluate(node, ring, **kw)
    except GammaDeltaError:
        raise
    except (ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from None


def compute_delta_expand(args, cfg):
    node = _need_expr(args)
    if uses(node, "gamma"):
        raise UsageError("divided powers g_n(...) are not available in a delta-ring")
    names = variables(node) or ["x"]
    ctx = DeltaContext(names, cfg.depth_bound, cfg.p, "p-local")
    f = _evaluate(node, ctx, var=ctx.gen, delta=delta_n, phi=frobenius_n)
    payload = {"expr": args.expr, "result": delta_json(f), "text": str(f)}
    return payload, [str(f)], True


def compute_pd_env(args, cfg):
    node = _need_expr(args)
    if uses(node, "d") or uses(node, "phi"):
        raise UsageError("d(...) and phi(...) are not available in a divided-power envelope")
    domain, ordinary, divided = parse_ring(args.ring or f"Z({cfg.p})[x]<y>", cfg.p)
    ctx = PDContext(ordinary, divided, domain, cfg.weight_bound)
    for v in variables(node):
        if v not in ordinary + divided:
            raise UsageError(f"variable {v!r} is not in the ring")
    var = lambda name: ctx.gamma(name) if name in divided else ctx.var(name)
    f = _evaluate(node, ctx, var=var, gamma=divided_power)
    fil = pd_filtration_weight(f) if f else None
    payload = {"expr": args.expr, "ring": args.ring or f"Z({cfg.p})[x]<y>", "result": pd_json(f), "text": str(f), "pd_filtration": fil}
    lines = [str(f)]
    if fil is not None:
        lines.append(f"PD filtration: I^[{fil}]")
    return payload, lines, True


def _n_arg(args, default=1):
    n = args.n if args.n is not None else default
    if n < 1:
        raise UsageError("--n must be >= 1")
    return n


def compute_prism_pn(args, cfg):
    n = _n_arg(args)
    rep = prismenv.expand_delta_n(prismenv.prism_base(cfg.p, cfg.depth_bound), n)
    payload = rep.to_json()
    payload["pass"] = rep.passed
    lines = [f"P_{n} = {rep.P_n}", f"a_{n} = {rep.a_n}", f"Q_{n} = {rep.Q_n}"]
    lines += [f"{'PASS' if v else 'FAIL'} expand-delta-n/{k.replace('_', '-')}" for k, v in rep.checks.items()]
    return payload, lines, rep.passed


def compute_prism_unit(args, cfg):
    n = _n_arg(args)
    t = prismenv.unit_tower(prismenv.prism_base(cfg.p, cfg.depth_bound), n)
    ok = prismenv.unit_tower_passed(t)
    payload = {"n": n, "u_n": delta_json(t.u), "text": str(t.u), "checks": dict(t.checks), "pass": ok}
    lines = [f"u_{n} = {t.u}"]
    for k, v in t.checks.items():
        tag = ("PASS" if v else "FAIL") if k in prismenv.UNIT_TOWER_REQUIRED else ("info" if v else "INFO")
        lines.append(f"{tag} phi-d-p-local/{k.replace('_', '-')}")
    return payload, lines, ok


def compute_conj_table(args, cfg):
    r = args.r
    if r < 1:
        raise UsageError("--r must be >= 1")
    if args.kind == "pd":
        top = args.i if args.i is not None else min(4, (cfg.weight_bound - r * (cfg.p - 1)) // cfg.p)
        ctx = PDContext((), tuple(f"y{j + 1}" for j in range(r)) if r > 1 else ("y",), PrimeField(cfg.p), cfg.weight_bound)
        rep = dpalg.conj_fil_pd(ctx, max(top, 0))
        lines = [f"gr^{e.index}: rank {e.rank} (expected {e.expected}) {', '.join(str(g) for g in e.generators)}" for e in rep.entries]
        return rep.to_json(), lines, rep.passed
    top = args.i if args.i is not None else min(cfg.p * cfg.p, cfg.weight_bound)
    q = prismenv.QuotientContext(cfg.p, r, max(top, 1), 3)
    entries = []
    lines = []
    ok = True
    for i in range(top + 1):
        rank, exp, good = prismenv.conj_fil_gr_rank(i, r, cfg.p)
        mons = []
        for digits in prismenv.standard_monomials(cfg.p, r, i, zdepth=q.zdepth):
            m = [0] * q.ring.nvars
            for j in range(r):
                for k in range(q.zdepth):
                    m[q.z_slot(j, k)] = digits[j][k]
            mons.append(tuple(m))
        mons = [q.ring.mono_str(m) or "1" for m in sorted(mons, key=q.ring.term_key)]
        ok = ok and good
        entries.append({"index": -i, "rank": rank, "expected": exp, "pass": good, "generators": mons})
        lines.append(f"gr^{-i}: rank {rank} (expected {exp}) {', '.join(mons)}")
    return {"name": "conj-fil-prism", "entries": entries, "pass": ok}, lines, ok


def compute_ht_matrix(args, cfg):
    i = args.i if args.i is not None else cfg.p
    if i < 0:
        raise UsageError("--i must be >= 0")
    q = prismenv.QuotientContext(cfg.p, args.r, max(i, cfg.weight_bound), 3)
    rep = prismenv.hodge_tate_iso_check(q, i)
    e = rep.entries[0]
    lines = [f"Hodge-Tate comparison gr^{-i}, r={args.r}, p={cfg.p}", "rows: " + ", ".join(e.generators)]
    lines += ["  [" + ", ".join(row) + "]" for row in rep.matrix]
    lines += [f"{'PASS' if v else 'FAIL'} hdg-tate/{k}" for k, v in rep.checks.items()]
    return rep.to_json(), lines, rep.passed


def _derham_ctx(args, cfg):
    domain, ordinary, divided = parse_ring(args.ring or f"F{cfg.p}[x]", cfg.p)
    return DeRhamContext.over_field(ordinary, divided, domain, cfg.weight_bound)


def compute_derham_h(args, cfg):
    ctx = _derham_ctx(args, cfg)
    if args.weight is not None:
        if args.weight < 0:
            raise UsageError("--weight must be >= 0")
        ranks = {f"H{q}": derham.graded_cohomology(ctx, args.weight, q) for q in range(ctx.ngens + 1)}
        payload = {"ring": args.ring or f"F{cfg.p}[x]", "weight": args.weight}
        payload.update(ranks)
        return payload, [f"{k} = {v}" for k, v in ranks.items()], True
    with executor() as pool:
        table = derham.cohomology_table(ctx, cfg.weight_bound, pool)
    lines = [f"w={t['weight']} H{t['degree']} = {t['rank']}" for t in table]
    return {"ring": args.ring or f"F{cfg.p}[x]", "table": table}, lines, True


def compute_cartier(args, cfg):
    ctx = _derham_ctx(args, cfg)
    if ctx.p is None:
        raise UsageError("the inverse Cartier map needs a ring over F_p")
    if args.weight is not None:
        reports = [derham.cartier_check(ctx, args.weight, q) for q in range(ctx.ngens + 1)]
    else:
        with executor() as pool:
            reports = derham.cartier_table(ctx, cfg.weight_bound, pool)
    ok = all(r.passed for r in reports)
    lines = [
        f"{'PASS' if r.passed else 'FAIL'} w={r.weight} q={r.degree} source={r.source_rank} H={r.h_rank}"
        for r in reports
    ]
    return {"ring": args.ring or f"F{cfg.p}[x]", "reports": [r.to_json() for r in reports], "pass": ok}, lines, ok


COMPUTE = {
    "pd-env": compute_pd_env,
    "delta-expand": compute_delta_expand,
    "prism-pn": compute_prism_pn,
    "prism-unit": compute_prism_unit,
    "conj-table": compute_conj_table,
    "ht-matrix": compute_ht_matrix,
    "derham-h": compute_derham_h,
    "cartier": compute_cartier,
}


def cmd_compute(args, cfg) -> int:
    payload, lines, ok = COMPUTE[args.what](args, cfg)
    emit(args, cfg, f"compute {args.what}", payload, lines)
    return EXIT_OK if ok else EXIT_FAIL


# -- argument parsing ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=None, help="the prime (default 2, or the characteristic of --ring)")
    common.add_argument("--weight-bound", type=int, default=12, help="divided-power weight bound N (default 12)")
    common.add_argument("--depth-bound", type=int, default=4, help="delta-tower depth bound D (default 4)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks (default 0)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--expr", help="ring expression, e.g. 'd(x+y)' or 'g_2(x*y)'")

    parser = argparse.ArgumentParser(prog="gammadelta", description="Exact checks for divided powers, delta-rings and prismatic envelopes.")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=suites.SUITES + ("all",))

    c = sub.add_parser("compute", parents=[common], help="compute a single object")
    c.add_argument("what", choices=tuple(COMPUTE))
    c.add_argument("--ring", help="e.g. F2[x], Q[x,y], F3[x]<y>")
    c.add_argument("--n", type=int, help="index for prism-pn and prism-unit")
    c.add_argument("--i", type=int, help="filtration index for conj-table and ht-matrix")
    c.add_argument("--r", type=int, default=1, help="number of variables (default 1)")
    c.add_argument("--kind", choices=("pd", "prism"), default="pd", help="conj-table flavour")
    c.add_argument("--weight", type=int, help="single weight for derham-h and cartier")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = make_config(args)
        if args.command == "verify":
            return cmd_verify(args, cfg)
        return cmd_compute(args, cfg)
    except UsageError as exc:
        return emit_error(args, exc, EXIT_USAGE)
    except GammaDeltaError as exc:
        return emit_error(args, exc, EXIT_FAIL)


if __name__ == "__main__":
    sys.exit(main())
