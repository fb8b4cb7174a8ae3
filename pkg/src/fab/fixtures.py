"""Worked example algebras, their circuits and witness families."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .algebra import (FiniteMonoid, ForestAlgebra, Homomorphism, restrict, reachable,
                      syntactic_quotient, compose, TransformationMonoid)
from .proofsearch import Tuple
from .terms import Node, Port, Term, leaf_completion, ports


@dataclass
class Fixture:
    name: str
    hom: Homomorphism
    accepting: frozenset = frozenset()
    sets: dict = field(default_factory=dict)

    @property
    def algebra(self):
        return self.hom.algebra

    @property
    def H(self):
        return self.hom.algebra.H

    @property
    def alphabet(self):
        return sorted(self.hom.letters)

    def el(self, name):
        return self.H.idx(name)

    def parse(self, text):
        return self.hom.parse(text)


def _build(name, elements, plus, letters, identity):
    """FiniteMonoid + Homomorphism from Python semantics on a finite carrier."""
    pos = {x: i for i, x in enumerate(elements)}
    names = [x if isinstance(x, str) else _ename(x) for x in elements]
    table = [[pos[plus(a, b)] for b in elements] for a in elements]
    M = FiniteMonoid(names, table, pos[identity])
    acts = {a: tuple(pos[f(x)] for x in elements) for a, f in letters.items()}
    A = ForestAlgebra(M, list(acts.values()), name=name)
    return Homomorphism(A, acts, name=name)


def _ename(x):
    if isinstance(x, tuple):
        return "{" + ",".join(x) + "}" if x else "id"
    return str(x)


# ------------------------------------------------------------------ Boolean


AND, OR = "∧", "∨"


def boolean_fixture():
    """AND x OR; ∧ and ∨ project onto the first and second component."""
    els = ["10", "00", "11", "01"]
    tab = [[f"{int(a[0]) & int(b[0])}{int(a[1]) | int(b[1])}" for b in els] for a in els]
    pos = {x: i for i, x in enumerate(els)}
    M = FiniteMonoid(els, [[pos[x] for x in row] for row in tab], "10")
    acts = {AND: tuple(pos[x[0] * 2] for x in els), OR: tuple(pos[x[1] * 2] for x in els)}
    phi = Homomorphism(ForestAlgebra(M, list(acts.values()), name="boolean"), acts, name="boolean")
    return Fixture("boolean", phi, frozenset({pos["11"]}),
                   {"J": frozenset({pos["00"], pos["11"]})})


BOOLEAN_PSI = {"00": ("00", "00", "11", "11"), "11": ("00", "11", "00", "11")}


def fig1_circuit(fx=None):
    """The two tuples over ∧(∨(x1+x2)+∨(x3+x4)) with constant port class J."""
    fx = fx or boolean_fixture()
    m = fx.parse(f"{AND}({OR}(?x1:J+?x2:J)+{OR}(?x3:J+?x4:J))")
    return {("J", fx.el(j)): Tuple(m, {f"x{i + 1}": fx.el(v) for i, v in enumerate(pat)})
            for j, pat in BOOLEAN_PSI.items()}


def boolean_seeds(fx=None):
    fx = fx or boolean_fixture()
    return {("J", fx.el("00")): fx.parse(OR), ("J", fx.el("11")): fx.parse(AND)}


# ------------------------------------------------------------------- duplex


CAP, CUP, SCAP, SCUP = "∩", "∪", "⊓", "⊔"
MINUS, DOT = "⊖", "⊡"
_GROUP_A = (CUP, SCUP)        # sons of a four-son ∩/⊓ node
_GROUP_B = (CAP, SCAP)        # sons of a four-son ∪/⊔ node


def _duplex_elements():
    els = [(), "inf"]
    leaves = ["L0", "L1"]
    for k in (1, 2):
        els += [tuple(c) for c in itertools.combinations_with_replacement(leaves, k)]
    for r1, r2 in (_GROUP_A, _GROUP_B):
        t1 = [r1 + "0", r1 + "1"]
        t2 = [r2 + "0", r2 + "1"]
        for k1 in range(3):
            for k2 in range(3):
                if k1 + k2 == 0:
                    continue
                for a in itertools.combinations_with_replacement(t1, k1):
                    for b in itertools.combinations_with_replacement(t2, k2):
                        els.append(tuple(sorted(a + b)))
    return els


def _duplex_fits(ms):
    if len(ms) <= 2 and all(x[0] == "L" for x in ms):
        return True
    for r1, r2 in (_GROUP_A, _GROUP_B):
        if all(x[0] in (r1, r2) for x in ms):
            return sum(x[0] == r1 for x in ms) <= 2 and sum(x[0] == r2 for x in ms) <= 2
    return False


def _duplex_plus(a, b):
    if a == "inf" or b == "inf":
        return "inf"
    ms = tuple(sorted(a + b))
    return ms if _duplex_fits(ms) else "inf"


def _duplex_letter(r):
    conj = r in (CAP, SCAP)
    op = (lambda u, v: u & v) if conj else (lambda u, v: u | v)
    sons = _GROUP_A if conj else _GROUP_B

    def f(x):
        if x == "inf" or not x:
            return "inf"
        if len(x) == 2 and all(t[0] == "L" for t in x):
            return r + str(op(int(x[0][1]), int(x[1][1])))
        if len(x) == 4:
            g1 = [int(t[1]) for t in x if t[0] == sons[0]]
            g2 = [int(t[1]) for t in x if t[0] == sons[1]]
            if len(g1) == 2 and len(g2) == 2:
                v1, v2 = op(*g1), op(*g2)
                if v1 == v2:
                    return r + str(v1)
        return "inf"
    return f


def _leaf_letter(v):
    return lambda x: ("L" + v,) if x == () else "inf"


def duplex_raw():
    """The duplex evaluation rules on tree-type multisets (77 elements)."""
    els = _duplex_elements()
    letters = {r: (lambda f: (lambda x: (f(x),) if f(x) != "inf" else "inf"))(_duplex_letter(r))
               for r in (CAP, CUP, SCAP, SCUP)}
    letters["0"] = _leaf_letter("0")
    letters["1"] = _leaf_letter("1")
    phi = _build("duplex-raw", els, _duplex_plus, letters, ())
    acc = frozenset({phi.H.idx(_ename((CAP + "1",)))})
    return phi, acc


def duplex_fixture():
    raw, acc = duplex_raw()
    q = syntactic_quotient(raw, acc)
    phi = q.hom
    phi.algebra.name = phi.name = "duplex"
    proj = lambda t: q.proj[raw.H.idx(_ename(t))]
    sets = {MINUS: frozenset({proj((CAP + "0",)), proj((CAP + "1",))}),
            DOT: frozenset({proj((SCAP + "0",)), proj((SCAP + "1",))})}
    fx = Fixture("duplex", phi, q.accepting, sets)
    fx.raw = raw
    fx.proj = q.proj
    return fx


def _duplex_value(fx, cls, v):
    r = CAP if cls == MINUS else SCAP
    return fx.hom(fx.parse(f"{r}({v}+{v})"))


def duplex_seed_trees(fx=None):
    fx = fx or duplex_fixture()
    out = {}
    for cls, r in ((MINUS, CAP), (DOT, SCAP)):
        for v in "01":
            out[(cls, _duplex_value(fx, cls, v))] = fx.parse(f"{r}({v}+{v})")
    return out


_PATTERN = {"0": (("0", "0"), ("1", "1")), "1": (("0", "1"), ("0", "1"))}


def duplex_circuit(fx=None):
    """m(c, v): root ∩ or ⊓, sons ∪ ∪ ⊔ ⊔, four ports under each."""
    fx = fx or duplex_fixture()
    out = {}
    for cls, root in ((MINUS, CAP), (DOT, SCAP)):
        for v in "01":
            rows = _PATTERN[v]
            kids, psi, k = [], {}, 0
            for lab, row in ((CUP, 0), (CUP, 1), (SCUP, 0), (SCUP, 1)):
                ps = []
                for c2 in (MINUS, DOT):
                    for bit in rows[row]:
                        k += 1
                        nm = f"x{k}"
                        ps.append(Port(nm, (c2,)))
                        psi[nm] = _duplex_value(fx, c2, bit)
                kids.append(Node(lab, tuple(ps)))
            m = Term((Node(root, tuple(kids)),))
            out[(cls, _duplex_value(fx, cls, v))] = Tuple(m, psi)
    return out


# --------------------------------------------------------------- even depth


BULLET = "•"
_ED = ["0", "e", "o", "ee", "oo", "inf"]


def even_depth_fixture():
    """Binary trees with all leaves at even depth; •□ sends 0 to o."""
    pos = {x: i for i, x in enumerate(_ED)}

    def plus(a, b):
        if a == "0":
            return b
        if b == "0":
            return a
        if a == b and a in ("e", "o"):
            return a + a
        return "inf"
    act = {"0": "o", "ee": "o", "oo": "e"}
    table = [[pos[plus(a, b)] for b in _ED] for a in _ED]
    M = FiniteMonoid(_ED, table, "0")
    bullet = tuple(pos[act.get(x, "inf")] for x in _ED)
    phi = Homomorphism(ForestAlgebra(M, [bullet], name="even-depth"), {BULLET: bullet},
                       name="even-depth")
    return Fixture("even-depth", phi, frozenset({pos["o"]}),
                   {"J": frozenset({pos["e"], pos["o"]}), "ideal": frozenset({pos["inf"]})})


def restricted_vertical(phi, drop):
    """Distinct restrictions of the vertical monoid to H minus the drop set."""
    keep = [h for h in range(len(phi.algebra.H)) if h not in set(drop)]
    return {tuple(v[h] for h in keep) for v in phi.algebra.V}


def m_family(d, label="z"):
    """Complete binary •-tree of depth d; each bottom node has two ports."""
    counter = itertools.count(1)

    def go(k):
        if k == 1:
            return Node(BULLET, tuple(Port(f"{label}{next(counter)}", (label,)) for _ in range(2)))
        return Node(BULLET, (go(k - 1), go(k - 1)))
    if d < 1:
        raise ValueError("depth must be positive")
    return Term((go(d),))


# ------------------------------------------------------------------ zigzag


def zigzag012_fixture():
    els = ["0", "inf", "T0", "T1", "T2", "S00", "S11", "S22"]

    def plus(a, b):
        if a == "0":
            return b
        if b == "0":
            return a
        if a[0] == b[0] == "T" and a[1] == b[1]:
            return "S" + a[1] * 2
        return "inf"
    a_tab = {"S00": "T0", "S11": "T2"}
    b_tab = {"S00": "T1", "S22": "T0"}
    letters = {"a": lambda x: a_tab.get(x, "inf"), "b": lambda x: b_tab.get(x, "inf"),
               "⊥": lambda x: "inf"}
    for v in "012":
        letters[v] = (lambda v: lambda x: "T" + v if x == "0" else "inf")(v)
    phi = _build("zigzag", els, plus, letters, "0")
    H = phi.H
    return Fixture("zigzag", phi, frozenset({H.idx("T0")}),
                   {"J": frozenset(H.idx(x) for x in ("T0", "T1", "T2"))})


ZIGZAG_M = "a(b(?y0:y+?y1:y)+b(?z0:y+?z1:y))"


# ----------------------------------------------------------------- Potthoff


TRI, DOTEQ = "∆", "⋓"
POTTHOFF_M = f"{TRI}(?z:z+{DOTEQ}(?y0:y+?y1:y))"


def potthoff_fixture():
    """Syntactic algebra of the ∆/⋓ evaluation language: 10 elements.

    T_v is a ∆-tree (or leaf) with output v, U_v a ⋓-tree with output v,
    P_v a forest T+T that ⋓ turns into v and Q_vv the forest T_v + U_v.
    """
    els = ["id", "bot", "0^", "1^", "U0", "U1", "P0", "P1", "Q00", "Q11"]

    def plus(a, b):
        if a == "id":
            return b
        if b == "id":
            return a
        if a[1] == "^" and b[1] == "^":
            return "P" + str(int(a[0] == b[0]))
        if a[1] == "^" and b[0] == "U" and a[0] == b[1]:
            return "Q" + a[0] * 2
        return "bot"
    tri = {"Q00": "1^", "Q11": "0^"}
    deq = {"P1": "U1", "P0": "U0"}
    letters = {TRI: lambda x: tri.get(x, "bot"), DOTEQ: lambda x: deq.get(x, "bot"),
               "⊥": lambda x: "bot",
               "0": lambda x: "0^" if x == "id" else "bot",
               "1": lambda x: "1^" if x == "id" else "bot"}
    phi = _build("potthoff", els, plus, letters, "id")
    H = phi.H
    return Fixture("potthoff", phi, frozenset({H.idx("1^")}),
                   {"J": frozenset({H.idx("0^"), H.idx("1^")})})


def potthoff_t(i):
    """t_i: i copies of the three-port multicontext chained along z."""
    def go(k):
        z = Port("z", ("z",)) if k == 1 else go(k - 1)
        ys = (Port(f"y{k}0", ("y",)), Port(f"y{k}1", ("y",)))
        return Node(TRI, (z, Node(DOTEQ, ys)))
    return Term((go(i),))


P_THETA_MAX, P_K_MAX = 9, 3


def _p1(theta, prefix, sub):
    """p_theta^(1) with psi; sub(value, name) fills a Y-port.

    Bottom-up along the a-path the z-input starts at 1 (the inserted leaf).
    ∆ is defined only when ⋓ returns the z-input, and then outputs its
    negation: a z-input 1 needs equal y's (patterns Q10 and Q11 taken in
    turn), a z-input 0 needs different y's (pattern Q0).
    """
    psi = {}
    node, zin, turn = Node("1"), 1, 0
    for d in range(theta, 0, -1):
        if zin == 1:
            ys = (turn % 2,) * 2
            turn += 1
        else:
            ys = (0, 1)
        kids = []
        for i, v in enumerate(ys):
            kid, sub_psi = sub(v, f"{prefix}y{d}{i}")
            kids.append(kid)
            psi.update(sub_psi)
        node = Node(TRI, (node, Node(DOTEQ, tuple(kids))))
        zin = 1 - zin
    return node, psi


def p_family(theta, k=1, fx=None):
    """(p_θ^(k), p_{θ+1}^(k)) as tuples whose Y-ports carry targets 0^ / 1^.

    Level k+1 fills each Y-port of level k with the member of the base pair
    whose root value is the port's target.
    """
    if not (1 <= theta <= P_THETA_MAX and 1 <= k <= P_K_MAX):
        raise ValueError(f"p_family is limited to θ ≤ {P_THETA_MAX}, k ≤ {P_K_MAX}")
    fx = fx or potthoff_fixture()
    val = {0: fx.el("0^"), 1: fx.el("1^")}
    # the root of p^(1)_t outputs 0 when t is odd
    exponent = {0: theta if theta % 2 else theta + 1, 1: theta + 1 if theta % 2 else theta}

    def build(t, level, prefix):
        def sub(v, nm):
            if level == 1:
                return Port(nm, ("y",)), {nm: val[v]}
            return build(exponent[v], level - 1, nm + ".")
        return _p1(t, prefix, sub)

    out = []
    for t in (theta, theta + 1):
        node, psi = build(t, k, "")
        out.append(Tuple(Term((node,)), psi))
    return tuple(out)


def letter_completion(t, fx=None):
    """ψ̆: Y-ports replaced by the one-node trees 0 or 1."""
    fx = fx or potthoff_fixture()
    names = fx.H.names
    return leaf_completion(t.m, lambda x: names[t.psi[x]][0])


def potthoff_witnesses(theta, k=1, fx=None):
    fx = fx or potthoff_fixture()
    out = {}
    for t in p_family(theta, k, fx):
        s = letter_completion(t, fx)
        out[("J", fx.hom(s))] = s
    return out


# ---------------------------------------------------- boundary example


def boundary_fixture():
    """Forests over {a,b} where some node is an ancestor of exactly one b."""
    els = [(c, f) for f in (0, 1) for c in (0, 1, 2)]
    cap = lambda c: min(c, 2)
    plus = lambda x, y: (cap(x[0] + y[0]), x[1] | y[1])
    letters = {"a": lambda x: (x[0], x[1] | (x[0] == 1)),
               "b": lambda x: (cap(x[0] + 1), x[1] | (x[0] == 1))}
    raw = _build("boundary-raw", [f"c{c}f{f}" for c, f in els],
                 lambda a, b: "c%df%d" % plus(_cf(a), _cf(b)),
                 {k: (lambda g: lambda x: "c%df%d" % g(_cf(x)))(g) for k, g in letters.items()},
                 "c0f0")
    acc = frozenset(i for i, nm in enumerate(raw.H.names) if nm.endswith("f1"))
    q = syntactic_quotient(raw, acc)
    q.hom.algebra.name = q.hom.name = "boundary"
    fx = Fixture("boundary", q.hom, q.accepting)
    fx.raw = raw
    fx.proj = q.proj
    return fx


def _cf(nm):
    return int(nm[1]), int(nm[3])


BOUNDARY_M = "a(a(?x1:h+?x2:h)+a(?x3:h+?x4:h))"
BOUNDARY_PSI = {"t": {"x1": "a", "x2": "b", "x3": "a", "x4": "b"},
                "t'": {"x1": "a", "x2": "a", "x3": "b", "x4": "b"}}


def boundary_tuples(fx=None):
    """The tuples t, t′; every port carries the same class tag."""
    fx = fx or boundary_fixture()
    m = fx.parse(BOUNDARY_M)
    out = []
    for key in ("t", "t'"):
        psi = {x: fx.hom(fx.parse(v)) for x, v in BOUNDARY_PSI[key].items()}
        out.append(Tuple(m, psi, mu={x: "h" for x in psi}))
    return tuple(out)


def boundary_forest(t, fx=None):
    fx = fx or boundary_fixture()
    key = "t" if t.psi["x2"] == t.psi["x4"] else "t'"
    return leaf_completion(t.m, BOUNDARY_PSI[key])


# ------------------------------------------------------------------ registry


FIXTURES = {
    "boolean": boolean_fixture,
    "duplex": duplex_fixture,
    "even-depth": even_depth_fixture,
    "zigzag": zigzag012_fixture,
    "potthoff": potthoff_fixture,
    "boundary": boundary_fixture,
}

_cache = {}


def get_fixture(name):
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}")
    if name not in _cache:
        _cache[name] = FIXTURES[name]()
    return _cache[name]


# ------------------------------------------------------------ golden values


def golden_checks(name="all"):
    """(fixture, description, passed) for the documented anchor values."""
    from .algebra import monoid_aperiodic, scc, validate_algebra
    from .derived import extended_vertical_element, multivertical_threshold_period
    from .terms import nabla, port_paths
    out = []

    def check(fx_name, what, fn):
        if name not in ("all", fx_name):
            return
        try:
            ok = bool(fn())
        except Exception as e:       # a crashing check is a failed check
            ok = False
            what = f"{what} ({type(e).__name__}: {e})"
        out.append((fx_name, what, ok))

    for nm in FIXTURES:
        check(nm, "validate_algebra passes", lambda nm=nm: not validate_algebra(get_fixture(nm).algebra))

    b = lambda: get_fixture("boolean")
    check("boolean", "φ(∧) = 11 and φ(∨) = 00",
          lambda: b().hom(b().parse(AND)) == b().el("11") and b().hom(b().parse(OR)) == b().el("00"))
    check("boolean", "J = {00, 11} lies in one SCC",
          lambda: any(b().sets["J"] <= c for c in scc(b().algebra)))
    check("boolean", "the two circuit tuples evaluate to 00 and 11",
          lambda: all(t.value(b().hom) == j for (_, j), t in fig1_circuit(b()).items()))

    d = lambda: get_fixture("duplex")
    check("duplex", "seed trees carry their own class value",
          lambda: all(d().hom(s) == j for (_, j), s in duplex_seed_trees(d()).items()))
    check("duplex", "mismatched four-son ∩ evaluates to the absorbing element",
          lambda: d().hom(d().parse("∩(∪(0+1)+∪(0+0)+⊔(1+1)+⊔(1+1))")) == d().H.absorbing())

    e = lambda: get_fixture("even-depth")
    check("even-depth", "e+e = ee, o+o = oo, e+o = inf",
          lambda: (e().H.add(1, 1), e().H.add(2, 2), e().H.add(1, 2)) == (3, 4, 5))
    check("even-depth", "•□ sends oo to e", lambda: e().hom.letters[BULLET][4] == 1)
    check("even-depth", "vertical monoid aperiodic", lambda: monoid_aperiodic(e().algebra.V)[0])
    check("even-depth", "19 vertical maps away from 0",
          lambda: len(restricted_vertical(e().hom, [0])) == 19)
    check("even-depth", "multivertical period 2",
          lambda: multivertical_threshold_period(e().hom)[1] == 2)

    z = lambda: get_fixture("zigzag")
    zv = lambda text: z().H.names[z().hom(z().parse(text))]
    check("zigzag", "a(0+0) = T0, a(1+1) = T2, a(2+2) = inf",
          lambda: (zv("a(0+0)"), zv("a(1+1)"), zv("a(2+2)")) == ("T0", "T2", "inf"))
    check("zigzag", "b(2+2) = T0", lambda: zv("b(2+2)") == "T0")

    p = lambda: get_fixture("potthoff")
    pv = lambda text: p().H.names[p().hom(p().parse(text))]
    check("potthoff", "10 horizontal elements", lambda: len(p().H) == 10)
    check("potthoff", "⋓(0+0) = 1, ∆(0+⋓(0+1)) = 1, ∆(1+⋓(1+1)) = 0, ∆(0+⋓(0+0)) = ⊥",
          lambda: (pv(f"{DOTEQ}(0+0)"), pv(f"{TRI}(0+{DOTEQ}(0+1))"),
                   pv(f"{TRI}(1+{DOTEQ}(1+1))"), pv(f"{TRI}(0+{DOTEQ}(0+0))"))
          == ("U1", "1^", "0^", "bot"))

    def v_i(i):
        t = potthoff_t(i)
        nu = {"z": {p().el("0^")}, "y": {p().el("0^"), p().el("1^")}}
        return extended_vertical_element(p().hom, nabla(t, port_paths(t)["z"]), nu)
    check("potthoff", "v1({0^}) = {1^, bot}",
          lambda: v_i(1)({p().el("0^")}) == {p().el("1^"), p().el("bot")})
    check("potthoff", "v2({0^}) = {0^, bot}",
          lambda: v_i(2)({p().el("0^")}) == {p().el("0^"), p().el("bot")})
    check("potthoff", "p_θ alternates 0^/1^ with the parity of θ",
          lambda: all(p_family(th, 1, p())[0].value(p().hom) == p().el("0^" if th % 2 else "1^")
                      for th in range(1, 6)))
    return out
