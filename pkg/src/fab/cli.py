"""fab: command-line front end.

Exit codes: 0 positive outcome, 1 negative or refuted, 2 budget exhausted,
3 and above for usage or format errors.
"""
from __future__ import annotations

import argparse
import os
import random
import sys
import time

from . import algebra as alg
from . import congruence as cg
from . import derived as dv
from . import fixtures as fxm
from . import formats as fm
from . import proofsearch as ps
from .terms import TermError, box_path, format_term, parse_term, ports

EXIT_OK, EXIT_NO, EXIT_EXHAUSTED, EXIT_USAGE, EXIT_FORMAT = 0, 1, 2, 3, 4

OUTCOME_EXIT = {"found": EXIT_OK, "holds": EXIT_OK, "refuted": EXIT_NO,
                "violated": EXIT_NO, "exhausted": EXIT_EXHAUSTED}


class UsageError(Exception):
    pass


def _read(arg):
    if os.path.exists(arg):
        with open(arg, encoding="utf-8") as f:
            return f.read().strip()
    return arg


def load_algebra(arg):
    """Fixture name or .fa path -> (hom, accepting, sets, label)."""
    if arg in fxm.FIXTURES:
        fx = fxm.get_fixture(arg)
        return fx.hom, fx.accepting, dict(fx.sets), arg
    if not os.path.exists(arg):
        raise UsageError(f"no fixture or file named {arg!r} (fixtures: {', '.join(fxm.FIXTURES)})")
    with open(arg, encoding="utf-8") as f:
        phi, acc, sets = fm.read_fa(f.read())
    return phi, acc, sets, arg


def _term(arg, alphabet=None):
    return parse_term(_read(arg), alphabet)


def _elements(phi, names, sets=None):
    H = phi.algebra.H
    out = set()
    for nm in names:
        if sets and nm in sets:
            out |= set(sets[nm])
        elif nm in H.index:
            out.add(H.index[nm])
        else:
            raise UsageError(f"unknown element or set {nm!r}")
    return frozenset(out)


def _names(phi, xs):
    return " ".join(phi.algebra.H.names[x] for x in sorted(xs))


def _report(args, outcome, **fields):
    rep = {"command": args.command, "outcome": outcome}
    rep.update(fields)
    rep["time"] = f"{time.perf_counter() - args._t0:.3f}"
    sys.stdout.write(fm.write_report(rep))
    return OUTCOME_EXIT[outcome]


# ---------------------------------------------------------------- commands


def cmd_eval(args):
    phi, *_ = load_algebra(args.algebra)
    t = _term(args.term, phi.alphabet)
    v = phi(t)
    if isinstance(v, tuple):
        return _report(args, "holds", term=t, value=phi.algebra.vname(v))
    return _report(args, "holds", term=t, value=phi.algebra.H.names[v])


def cmd_equiv(args):
    c = cg.TauPi(args.tau, args.pi)
    s, t = _term(args.s), _term(args.t)
    same = cg.equiv_n(s, t, args.n, c)
    return _report(args, "holds" if same else "refuted", n=args.n, tau=args.tau, pi=args.pi,
                   s=s, t=t, **{"digest.s": cg.signature(s, args.n, c).digest(),
                                "digest.t": cg.signature(t, args.n, c).digest()})


def cmd_falsify(args):
    phi, *_ = load_algebra(args.algebra)
    r = cg.refinement_falsify(phi, args.n, (args.tau, args.pi), args.budget)
    if r is None:
        return _report(args, "exhausted", n=args.n, budget=args.budget)
    s, t = r
    H = phi.algebra.H
    return _report(args, "found", n=args.n, tau=args.tau, pi=args.pi, s=s, t=t,
                   **{"value.s": H.names[phi(s)], "value.t": H.names[phi(t)]})


def cmd_syntactic(args):
    phi, acc, sets, _ = load_algebra(args.algebra)
    F = _elements(phi, args.accepting, sets) if args.accepting else acc
    q = alg.syntactic_quotient(phi, F)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(fm.write_fa(q.hom, q.accepting))
    H = q.hom.algebra.H
    return _report(args, "holds", size=len(H), elements=" ".join(H.names),
                   accepting=_names(q.hom, q.accepting))


def cmd_scc(args):
    phi, *_ = load_algebra(args.algebra)
    comps = alg.scc(phi.algebra)
    return _report(args, "holds", count=len(comps), components=[_names(phi, c) for c in comps])


def cmd_divides(args):
    G, *_ = load_algebra(args.g)
    H, *_ = load_algebra(args.h)
    try:
        r = alg.divides(G.algebra, H.algebra, args.budget)
    except alg.SearchExhausted as e:
        return _report(args, "exhausted", reason=str(e))
    if r is None:
        return _report(args, "refuted")
    S, alpha = r
    Hn, Gn = H.algebra.H.names, G.algebra.H.names
    return _report(args, "found", subalgebra=" ".join(Hn[s] for s in S),
                   morphism=" ".join(f"{Hn[s]}->{Gn[alpha[s]]}" for s in S))


def cmd_multivertical(args):
    phi, *_ = load_algebra(args.algebra)
    try:
        M = dv.multivertical(phi, args.budget)
    except alg.SearchExhausted as e:
        return _report(args, "exhausted", reason=str(e))
    sigma, rho = dv.threshold_period_of(M)
    ap, _ = alg.monoid_aperiodic(M)
    return _report(args, "holds", size=len(M), sigma=sigma, rho=rho, aperiodic=ap)


def _port_subsets(phi, text, sets):
    nu = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        k, _, rest = line.partition("=")
        nu[k.strip()] = _elements(phi, rest.split(), sets)
    return nu


def cmd_extended(args):
    phi, _, sets, _ = load_algebra(args.algebra)
    w = _term(args.element, phi.alphabet)
    if box_path(w) is None:
        raise UsageError("the element must be a context (one _ port)")
    nu = _port_subsets(phi, _read(args.port_subsets), sets) if args.port_subsets else {}
    seeds = [_elements(phi, s.split(","), sets) for s in args.seed_set] if args.seed_set else None
    f = dv.extended_vertical_element(phi, w, nu, seeds=seeds)
    t, p = f.threshold_period()
    fields = {"threshold": t, "period": p, "domain": len(f.img)}
    if seeds:
        fields["orbit"] = []
        cur = dv.to_mask(seeds[0])
        for _ in range(t + p):
            fields["orbit"].append("{" + _names(phi, dv.from_mask(cur)) + "}")
            cur = f.img[cur]
    return _report(args, "holds", **fields)


def _load_circuit(args):
    fc_text = _read(args.circuit)
    alg_arg = args.algebra or fm.algebra_of(fc_text)
    if not alg_arg:
        raise UsageError("no algebra given (use --algebra or an 'algebra:' line)")
    phi, *_ = load_algebra(alg_arg)
    M = fm.read_fc(fc_text, phi)
    S0 = fm.read_fs(_read(args.seeds), phi) if getattr(args, "seeds", None) else None
    return phi, M, S0, alg_arg


def cmd_rc_verify(args):
    phi, M, S0, _ = _load_circuit(args)
    try:
        viol = ps.rc_verify(M, S0, args.n, phi, (args.tau, args.pi))
    except ps.ProofError as e:
        return _report(args, "violated", n=args.n, violation=[str(e)])
    if viol:
        return _report(args, "violated", n=args.n, violation=viol)
    return _report(args, "holds", n=args.n, tau=args.tau, pi=args.pi, tuples=len(M))


def cmd_witnesses(args):
    phi, M, S0, _ = _load_circuit(args)
    W = ps.build_witnesses(M, S0, args.n)
    viol = ps.verify_witnesses(W, phi, args.n, (args.tau, args.pi))
    names = phi.algebra.H.names
    wit = [f"{J}/{names[j]} {format_term(s)}" for (J, j), s in sorted(W.forests.items(), key=str)]
    sizes = [" ".join(str(v) for _, v in sorted(tr.items(), key=str)) for tr in W.trace]
    if viol:
        return _report(args, "violated", n=args.n, violation=viol, witness=wit, sizes=sizes)
    return _report(args, "holds", n=args.n, witness=wit, sizes=sizes)


def cmd_search_copy(args):
    phi, _, sets, label = load_algebra(args.algebra)
    J = _elements(phi, args.set, sets)
    found = ps.search_copy(phi, J, (args.tau, args.pi), args.budget, args.width)
    if found is None:
        return _report(args, "exhausted", budget=args.budget, width=args.width)
    text = fm.write_fc(found, phi, algebra=label)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    names = phi.algebra.H.names
    return _report(args, "found", tuple=[f"{J}/{names[j]} {format_term(t.m)} psi "
                                         + ",".join(f"{x}={names[v]}" for x, v in t.psi.items())
                                         for (J, j), t in found.items()])


def cmd_pump_subcircuit(args):
    """Even-depth style run: top tuples over a uniform base multicontext."""
    phi, _, sets, _ = load_algebra(args.algebra)
    H = phi.algebra.H
    base = _term(args.base, phi.alphabet)
    zkey = args.zkey
    top = {}
    for item in args.top:
        j, _, v = item.partition("=")
        top[H.index[j]] = ps.base_tuple(base, {p.name: H.index[v] for p in ports(base)}, zkey)
    T = {}
    for item in args.levels or []:
        j, _, k = item.partition("=")
        T[H.index[j]] = ps.consistent_pump(top, H.index[j], int(k))
    T = T or top
    try:
        r = ps.build_pumped_subcircuit(T, args.chi, (args.tau, 1), top=top)
    except ps.ProofError as e:
        raise UsageError(str(e)) from None
    js = sorted(r.tuples)
    pairs_ok = all(ps.star(r.tuples[a], r.tuples[b], ("pumped", args.chi, 1), (args.tau, 1))
                   for a in js for b in js if a < b)
    return _report(args, "holds" if r.post_ok else "violated", omega=r.omega, eta=r.eta,
                   matrix=" ".join(",".join(map(str, row)) for row in r.A),
                   post=r.post_ok, star=pairs_ok,
                   ports=[f"{H.names[j]} {len(r.tuples[j].psi)}" for j in js],
                   value=[f"{H.names[j]} {H.names[r.tuples[j].value(phi)]}" for j in js])


def cmd_fixtures(args):
    if args.export:
        os.makedirs(args.export, exist_ok=True)
        for nm in fxm.FIXTURES:
            fx = fxm.get_fixture(nm)
            with open(os.path.join(args.export, f"{nm}.fa"), "w", encoding="utf-8") as f:
                f.write(fm.write_fa(fx.hom, fx.accepting, fx.sets, name=nm))
        return _report(args, "holds", exported=" ".join(fxm.FIXTURES), directory=args.export)
    res = fxm.golden_checks(args.check)
    if not res:
        raise UsageError(f"unknown fixture {args.check!r}")
    bad = [f"{n}: {w}" for n, w, ok in res if not ok]
    lines = [f"{'ok' if ok else 'FAIL'} {n}: {w}" for n, w, ok in res]
    return _report(args, "violated" if bad else "holds", checked=len(res), check=lines)


# ------------------------------------------------------------------ parser


def _tp(p, tau=1, pi=1):
    p.add_argument("--tau", type=int, default=tau)
    p.add_argument("--pi", type=int, default=pi)


def build_parser():
    p = argparse.ArgumentParser(prog="fab", description="Forest algebra toolkit: "
                                "congruences, witnesses and circuit search.")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    sub = p.add_subparsers(dest="command", metavar="command")

    s = sub.add_parser("eval", help="evaluate a term in an algebra")
    s.add_argument("algebra")
    s.add_argument("term")
    s.set_defaults(fn=cmd_eval)

    s = sub.add_parser("equiv", help="compare two terms at level n")
    s.add_argument("--n", type=int, required=True)
    _tp(s)
    s.add_argument("s")
    s.add_argument("t")
    s.set_defaults(fn=cmd_equiv)

    s = sub.add_parser("falsify", help="search for equivalent forests with different images")
    s.add_argument("algebra")
    s.add_argument("--n", type=int, default=1)
    _tp(s)
    s.add_argument("--budget", type=int, default=8, help="largest forest size")
    s.set_defaults(fn=cmd_falsify)

    s = sub.add_parser("syntactic", help="syntactic quotient for an accepting set")
    s.add_argument("algebra")
    s.add_argument("--accepting", nargs="*")
    s.add_argument("-o", "--output")
    s.set_defaults(fn=cmd_syntactic)

    s = sub.add_parser("scc", help="strongly connected components")
    s.add_argument("algebra")
    s.set_defaults(fn=cmd_scc)

    s = sub.add_parser("divides", help="does G divide H")
    s.add_argument("g")
    s.add_argument("h")
    s.add_argument("--budget", type=int, default=100000)
    s.set_defaults(fn=cmd_divides)

    s = sub.add_parser("multivertical", help="threshold and period of the multivertical monoid")
    s.add_argument("algebra")
    s.add_argument("--budget", type=int, default=200000)
    s.set_defaults(fn=cmd_multivertical)

    s = sub.add_parser("extended", help="orbit of an extended vertical element")
    s.add_argument("algebra")
    s.add_argument("--element", required=True, help="context term (file or literal)")
    s.add_argument("--port-subsets", help="lines 'key = elements'")
    s.add_argument("--seed-set", action="append", help="comma separated start subset")
    s.set_defaults(fn=cmd_extended)

    for name, fn, help_ in (("rc-verify", cmd_rc_verify, "verify a circuit at level n"),
                            ("witnesses", cmd_witnesses, "build and check level-n witnesses")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("circuit")
        s.add_argument("seeds")
        s.add_argument("--algebra")
        s.add_argument("--n", type=int, default=1)
        _tp(s)
        s.set_defaults(fn=fn)

    s = sub.add_parser("search-copy", help="enumerate copy circuits over a set J")
    s.add_argument("algebra")
    s.add_argument("--set", nargs="+", required=True)
    _tp(s)
    s.add_argument("--budget", type=int, default=7, help="interior node budget")
    s.add_argument("--width", type=int, default=4, help="port budget")
    s.add_argument("-o", "--output")
    s.set_defaults(fn=cmd_search_copy)

    s = sub.add_parser("pump-subcircuit", help="pumped subcircuit from top tuples")
    s.add_argument("algebra")
    s.add_argument("--base", required=True, help="uniform multicontext")
    s.add_argument("--zkey", required=True)
    s.add_argument("--top", nargs="+", required=True, help="j=psi pairs (constant psi)")
    s.add_argument("--levels", nargs="*", help="j=k: T_j is k levels of consistent pumping")
    s.add_argument("--chi", type=int, required=True)
    s.add_argument("--tau", type=int, default=1)
    s.set_defaults(fn=cmd_pump_subcircuit)

    s = sub.add_parser("fixtures", help="check golden values or export the corpus")
    s.add_argument("--check", default="all")
    s.add_argument("--export", metavar="DIR")
    s.set_defaults(fn=cmd_fixtures)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else EXIT_USAGE
    if not getattr(args, "fn", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    random.seed(args.seed)
    args._t0 = time.perf_counter()
    try:
        return args.fn(args)
    except UsageError as e:
        print(f"fab {args.command}: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (TermError, fm.FormatError, alg.AlgebraError, KeyError, ValueError) as e:
        print(f"fab {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
