"""Finite monoids, transformation monoids, forest algebras and homomorphisms.

Horizontal elements are indices into ``H.names``.  Vertical elements are
transformations of H stored as tuples: ``v[h]`` is the image of h, and the
product of contexts corresponds to ``compose(v, w) = v o w``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd

import networkx as nx

from . import _kernels as K
from .terms import BOX, Box, Node, Port, Term, NEUTRAL, iter_nodes, parse_term


class AlgebraError(ValueError):
    pass


class SearchExhausted(Exception):
    """A bounded search ran out of budget before reaching an answer."""


compose = K.compose


class FiniteMonoid:
    def __init__(self, names, table, identity=None):
        self.names = [str(x) for x in names]
        self.table = tuple(tuple(int(x) for x in row) for row in table)
        self.index = {nm: i for i, nm in enumerate(self.names)}
        if len(self.index) != len(self.names):
            raise AlgebraError("duplicate element names")
        n = len(self.names)
        if len(self.table) != n or any(len(r) != n for r in self.table):
            raise AlgebraError("addition table is not total")
        if any(not 0 <= x < n for r in self.table for x in r):
            raise AlgebraError("addition table leaves the carrier")
        if identity is None:
            cands = [e for e in range(n)
                     if all(self.table[e][x] == x == self.table[x][e] for x in range(n))]
            if not cands:
                raise AlgebraError("no identity element")
            identity = cands[0]
        self.identity = self.idx(identity)

    def __len__(self):
        return len(self.names)

    def __repr__(self):
        return f"FiniteMonoid({self.names})"

    def idx(self, x):
        if isinstance(x, int):
            return x
        return self.index[x]

    def add(self, a, b):
        return self.table[a][b]

    def sum(self, xs):
        acc = self.identity
        for x in xs:
            acc = self.table[acc][x]
        return acc

    def times(self, k, h):
        """k ⊙ h = h + ... + h."""
        acc = self.identity
        for _ in range(k):
            acc = self.table[acc][h]
        return acc

    def is_commutative(self):
        n = len(self)
        return all(self.table[a][b] == self.table[b][a] for a in range(n) for b in range(n))

    def absorbing(self):
        n = len(self)
        for z in range(n):
            if all(self.table[z][x] == z == self.table[x][z] for x in range(n)):
                return z
        return None


class TransformationMonoid:
    def __init__(self, n, elements):
        self.n = n
        self.elements = list(dict.fromkeys(tuple(e) for e in elements))
        self._set = set(self.elements)

    @classmethod
    def generated(cls, n, gens, budget=None):
        try:
            els = K.closure(list(gens), n, budget)
        except K.BudgetExceeded:
            raise SearchExhausted(f"closure exceeded {budget} elements") from None
        return cls(n, els)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, v):
        return tuple(v) in self._set

    @property
    def identity(self):
        return tuple(range(self.n))


class ForestAlgebra:
    """(H, V) with V given explicitly or generated by gens plus all translations."""

    def __init__(self, H, gens=(), V=None, name=""):
        self.H = H
        self.gens = [tuple(g) for g in gens]
        self.name = name
        self._V = V
        n = len(H)
        for g in self.gens:
            if len(g) != n or any(not 0 <= x < n for x in g):
                raise AlgebraError("vertical generator is not a map of H")

    def translation(self, u=None, v=None):
        """[u + ε + v] as a transformation."""
        H = self.H
        u = H.identity if u is None else u
        v = H.identity if v is None else v
        return tuple(H.table[H.table[u][h]][v] for h in range(len(H)))

    def translation_generators(self):
        H = self.H
        out = [self.translation(u, None) for u in range(len(H))]
        out += [self.translation(None, v) for v in range(len(H))]
        return list(dict.fromkeys(out))

    def vertical_generators(self):
        return list(dict.fromkeys(self.gens + self.translation_generators()))

    def vertical(self, budget=None):
        if self._V is None:
            self._V = TransformationMonoid.generated(len(self.H), self.vertical_generators(), budget)
        return self._V

    @property
    def V(self):
        return self.vertical()

    def vname(self, v):
        return "[" + " ".join(self.H.names[x] for x in v) + "]"


@dataclass(frozen=True)
class HLeaf:
    """Leaf label standing for a horizontal element (leaf extension)."""
    value: int
    name: str = ""

    def __str__(self):
        return self.name or f"#{self.value}"


class Homomorphism:
    def __init__(self, algebra, letters, leaves=None, name=""):
        self.algebra = algebra
        n = len(algebra.H)
        self.letters = {a: tuple(v) for a, v in letters.items()}
        ident = tuple(range(n))
        if NEUTRAL in self.letters and self.letters[NEUTRAL] != ident:
            raise AlgebraError("the neutral letter must act as the identity")
        self.letters[NEUTRAL] = ident
        self.leaves = dict(leaves or {})
        self.name = name

    @property
    def H(self):
        return self.algebra.H

    @property
    def alphabet(self):
        return set(self.letters)

    def action(self, a):
        try:
            return self.letters[a]
        except KeyError:
            raise AlgebraError(f"letter {a!r} has no action") from None

    def value(self, x):
        return self.H.idx(x)

    def eval(self, t):
        return hom_eval(self, t)

    def __call__(self, t):
        return hom_eval(self, t)

    def parse(self, text):
        return parse_term(text, self.alphabet)


def _forest_val(phi, nodes, hole):
    H = phi.algebra.H
    tab = H.table
    acc = H.identity
    for n in nodes:
        acc = tab[acc][_tree_val(phi, n, hole)]
    return acc


def _tree_val(phi, n, hole):
    if isinstance(n, Node):
        lab = n.label
        if isinstance(lab, HLeaf) and not n.children:
            return lab.value
        if not n.children and lab in phi.leaves:
            return phi.leaves[lab]
        act = phi.letters.get(lab)
        if act is None:
            raise AlgebraError(f"letter {lab!r} has no action")
        return act[_forest_val(phi, n.children, hole)]
    if isinstance(n, Port):
        if n.key in phi.leaves:
            return phi.leaves[n.key]
        if isinstance(n.key, HLeaf):
            return n.key.value
        raise AlgebraError(f"port {n.name!r} has no leaf extension")
    if hole is None:
        raise AlgebraError("box port in a forest evaluation")
    return hole


def hom_eval(phi, t):
    """Forest -> horizontal index; context (one box) -> transformation tuple."""
    if any(isinstance(n, Box) for _, n in iter_nodes(t)):
        return tuple(_forest_val(phi, t.roots, h) for h in range(len(phi.algebra.H)))
    return _forest_val(phi, t.roots, None)


# ------------------------------------------------------------ constructors


def counter_monoid(tau, pi):
    """N_{tau,pi}: {0..tau+pi-1} with capped, wrapping addition."""
    if tau < 0 or pi < 1:
        raise AlgebraError("need tau >= 0 and pi >= 1")
    n = tau + pi

    def canon(p):
        return p if p < tau else tau + (p - tau) % pi
    table = [[canon(a + b) for b in range(n)] for a in range(n)]
    return FiniteMonoid([str(i) for i in range(n)], table, 0)


def od_algebra(M, name=""):
    """One-dimensional algebra: V is the translation monoid of M."""
    return ForestAlgebra(M, (), name=name or "OD")


def od_hom(M, letter_values, name=""):
    """Letters act as left translations a ↦ [φ(a)+ε]."""
    A = od_algebra(M)
    letters = {a: A.translation(M.idx(g), None) for a, g in letter_values.items()}
    return Homomorphism(A, letters, name=name)


def trivial_algebra():
    return ForestAlgebra(FiniteMonoid(["0"], [[0]], 0), (), name="trivial")


# --------------------------------------------------------------- checking


def validate_algebra(A, budget=200000):
    """List of violations; empty means A is a forest algebra."""
    H = A.H
    n = len(H)
    tab = H.table
    out = []
    for x in range(n):
        if tab[H.identity][x] != x or tab[x][H.identity] != x:
            out.append(f"identity law fails at {H.names[x]}")
    for a in range(n):
        for b in range(n):
            ab = tab[a][b]
            for c in range(n):
                if tab[ab][c] != tab[a][tab[b][c]]:
                    out.append(f"associativity fails on ({H.names[a]}, {H.names[b]}, {H.names[c]})")
                    return out
    V = A.vertical(budget)
    if V.identity not in V:
        out.append("identity map missing from V")
    for u in range(n):
        for v in range(n):
            tr = A.translation(u, v)
            if tr not in V:
                out.append(f"missing translation [{H.names[u]}+ε+{H.names[v]}]")
    if A._V is not None and len(V) ** 2 <= budget * 50:
        for v in V:
            for w in V:
                if compose(v, w) not in V:
                    out.append(f"V not closed: {A.vname(v)} o {A.vname(w)}")
                    return out
    return out


def reachable(phi):
    """Horizontal elements that are images of forests."""
    H = phi.algebra.H
    acts = list(phi.letters.values())
    seen = {H.identity}
    while True:
        new = set()
        for h in seen:
            for a in acts:
                new.add(a[h])
            for g in seen:
                new.add(H.table[h][g])
        if new <= seen:
            return sorted(seen)
        seen |= new


def restrict(phi, keep):
    """Sub-algebra of phi's target on the element list keep (closed under ops)."""
    H = phi.algebra.H
    keep = list(keep)
    pos = {h: i for i, h in enumerate(keep)}
    table = [[pos[H.table[a][b]] for b in keep] for a in keep]
    M = FiniteMonoid([H.names[h] for h in keep], table, pos[H.identity])
    letters = {a: tuple(pos[v[h]] for h in keep) for a, v in phi.letters.items()}
    A = ForestAlgebra(M, [v for a, v in letters.items() if a != NEUTRAL], name=phi.algebra.name)
    leaves = {k: pos[v] for k, v in phi.leaves.items() if v in pos}
    return Homomorphism(A, letters, leaves, name=phi.name), pos


@dataclass
class Quotient:
    hom: Homomorphism
    proj: list           # original index -> quotient index (None if unreachable)
    accepting: frozenset


def syntactic_quotient(phi, F):
    """Coarsest congruence saturating F, by Moore-style partition refinement."""
    H0 = phi.algebra.H
    F = {H0.idx(f) for f in F}
    sub, pos = restrict(phi, reachable(phi))
    H = sub.algebra.H
    n = len(H)
    inF = [1 if h in F else 0 for h in sorted(pos, key=pos.get)]
    ops = [v for a, v in sub.letters.items() if a != NEUTRAL]
    ops += [tuple(H.table[g][h] for h in range(n)) for g in range(n)]
    ops += [tuple(H.table[h][g] for h in range(n)) for g in range(n)]
    block = inF[:]
    nb = len(set(block))
    while True:
        sig = [(block[h],) + tuple(block[f[h]] for f in ops) for h in range(n)]
        ids = {}
        block = [ids.setdefault(s, len(ids)) for s in sig]
        if len(ids) == nb:
            break
        nb = len(ids)
    # renumber blocks by first member so names are stable
    first = {}
    for h in range(n):
        first.setdefault(block[h], len(first))
    block = [first[b] for b in block]
    reps = [None] * len(first)
    for h in range(n):
        if reps[block[h]] is None:
            reps[block[h]] = h
    table = [[block[H.table[a][b]] for b in reps] for a in reps]
    M = FiniteMonoid([H.names[r] for r in reps], table, block[H.identity])
    letters = {a: tuple(block[v[r]] for r in reps) for a, v in sub.letters.items()}
    A = ForestAlgebra(M, [v for a, v in letters.items() if a != NEUTRAL], name=phi.algebra.name)
    leaves = {k: block[v] for k, v in sub.leaves.items()}
    qhom = Homomorphism(A, letters, leaves, name=phi.name)
    proj = [None] * len(H0)
    for h0, h in pos.items():
        proj[h0] = block[h]
    acc = frozenset(block[pos[f]] for f in F if f in pos)
    return Quotient(qhom, proj, acc)


# ---------------------------------------------------------------- division


def _submonoids(M, min_size, budget):
    """Submonoids of M by increasing size, each with a generating list."""
    n = len(M)

    def close(S):
        S = set(S) | {M.identity}
        frontier = list(S)
        while frontier:
            new = []
            for a in frontier:
                for b in list(S):
                    for c in (M.table[a][b], M.table[b][a]):
                        if c not in S:
                            S.add(c)
                            new.append(c)
            frontier = new
        return frozenset(S)

    found = {}
    base = close(())
    found[base] = ()
    frontier = [base]
    while frontier:
        nxt = []
        for S in frontier:
            for h in range(n):
                if h in S:
                    continue
                T = close(S | {h})
                if T not in found:
                    found[T] = found[S] + (h,)
                    nxt.append(T)
                    if budget is not None and len(found) > budget:
                        raise SearchExhausted("too many submonoids")
        frontier = nxt
    subs = [(S, g) for S, g in found.items() if len(S) >= min_size]
    subs.sort(key=lambda p: (len(p[0]), sorted(p[0])))
    return subs


def _homs_onto(M, S, gens, G, counter, budget):
    """Surjective monoid morphisms S -> G determined by generator images."""
    for imgs in itertools.product(range(len(G)), repeat=len(gens)):
        counter[0] += 1
        if budget is not None and counter[0] > budget:
            raise SearchExhausted("division search budget exceeded")
        alpha = {M.identity: G.identity}
        ok = True
        frontier = [M.identity]
        gi = list(zip(gens, imgs))
        while frontier and ok:
            new = []
            for x in frontier:
                for g, gimg in gi:
                    for y, yv in ((M.table[x][g], G.table[alpha[x]][gimg]),
                                  (M.table[g][x], G.table[gimg][alpha[x]])):
                        if y in alpha:
                            if alpha[y] != yv:
                                ok = False
                                break
                        else:
                            alpha[y] = yv
                            new.append(y)
                    if not ok:
                        break
                if not ok:
                    break
            frontier = new
        if not ok or set(alpha) != set(S):
            continue
        # full homomorphism check on the closed set
        if any(alpha[M.table[a][b]] != G.table[alpha[a]][alpha[b]] for a in S for b in S):
            continue
        if len(set(alpha.values())) == len(G):
            yield alpha


def divides(G, H, budget=100000):
    """Witness (subcarrier, map) if G is a morphic image of a subalgebra of H.

    Works on FiniteMonoids or ForestAlgebras.  None means no; raises
    SearchExhausted when the budget runs out.
    """
    algebras = isinstance(G, ForestAlgebra)
    GM = G.H if algebras else G
    HM = H.H if algebras else H
    counter = [0]
    if algebras:
        W = set(G.vertical(budget).elements)
        HV = H.vertical(budget).elements
    for S, gens in _submonoids(HM, len(GM), budget):
        for alpha in _homs_onto(HM, S, list(gens), GM, counter, budget):
            if not algebras:
                return sorted(S), alpha
            pre = {}
            for h in S:
                pre.setdefault(alpha[h], h)
            induced = set()
            for v in HV:
                if any(v[h] not in S for h in S):
                    continue
                # v must respect the kernel of alpha
                img = {}
                good = True
                for h in S:
                    g, gv = alpha[h], alpha[v[h]]
                    if img.setdefault(g, gv) != gv:
                        good = False
                        break
                if not good:
                    continue
                w = tuple(img[g] for g in range(len(GM)))
                if w in W:
                    induced.add(w)
            if induced == W:
                return sorted(S), alpha
    return None


# ----------------------------------------------------- accessibility, SCCs


def _graph(A):
    n = len(A.H)
    Gr = nx.DiGraph()
    Gr.add_nodes_from(range(n))
    for v in A.vertical_generators():
        for h in range(n):
            Gr.add_edge(h, v[h])
    return Gr


def scc(A):
    comps = [frozenset(c) for c in nx.strongly_connected_components(_graph(A))]
    return sorted(comps, key=lambda c: (min(c), len(c)))


def accessible(A, K):
    """W^{-1}K: elements g with wg in K for some w."""
    Gr = _graph(A)
    out = set()
    for k in K:
        k = A.H.idx(k)
        out.add(k)
        out |= nx.ancestors(Gr, k)
    return frozenset(out)


def ideal_complement(A, K):
    return frozenset(range(len(A.H))) - accessible(A, K)


# ------------------------------------------------ orbits and group structure


def elem_threshold_period(x, M=None):
    """Least (t, p), t >= 1, with x^(t+p) = x^t.

    x is a transformation tuple (M None) or an element index of FiniteMonoid M.
    """
    if M is None:
        return K.orbit(tuple(x), len(x))
    x = M.idx(x)
    pos = {}
    cur, k = x, 1
    while cur not in pos:
        pos[cur] = k
        cur = M.table[cur][x]
        k += 1
    return pos[cur], k - pos[cur]


def _elements_and_mul(M, budget):
    if isinstance(M, FiniteMonoid):
        return list(range(len(M))), (lambda a, b: M.table[a][b]), M.identity
    if isinstance(M, TransformationMonoid):
        return M.elements, compose, M.identity
    if isinstance(M, ForestAlgebra):
        V = M.vertical(budget)
        return V.elements, compose, V.identity
    # a list of generator transformations
    gens = [tuple(g) for g in M]
    n = len(gens[0]) if gens else 0
    V = TransformationMonoid.generated(n, gens, budget)
    return V.elements, compose, V.identity


def monoid_aperiodic(M, budget=100000):
    """(True, None) or (False, witness element of period > 1)."""
    els, mul, _ = _elements_and_mul(M, budget)
    for x in els:
        if isinstance(M, FiniteMonoid):
            _, p = elem_threshold_period(x, M)
        else:
            _, p = elem_threshold_period(x)
        if p > 1:
            return False, x
    return True, None


def _prime_factors(n):
    out, p = set(), 2
    while p * p <= n:
        while n % p == 0:
            out.add(p)
            n //= p
        p += 1
    if n > 1:
        out.add(n)
    return out


def maximal_groups(M, budget=100000):
    """The maximal subgroups (H-classes of idempotents), as (e, element list)."""
    els, mul, _ = _elements_and_mul(M, budget)
    out = []
    for e in els:
        if mul(e, e) != e:
            continue
        eMe = {mul(mul(e, x), e) for x in els}
        grp = [x for x in eMe if any(mul(x, y) == e == mul(y, x) for y in eMe)]
        out.append((e, grp))
    return out, mul


def _is_solvable(e, grp, mul):
    inv = {}
    for x in grp:
        for y in grp:
            if mul(x, y) == e:
                inv[x] = y
                break
    cur = set(grp)
    for _ in range(len(grp) + 1):
        if cur == {e}:
            return True
        comm = {mul(mul(inv[a], inv[b]), mul(a, b)) for a in cur for b in cur}
        # subgroup generated by commutators
        sub = set(comm) | {e}
        frontier = list(sub)
        while frontier:
            new = []
            for a in frontier:
                for b in list(sub):
                    c = mul(a, b)
                    if c not in sub:
                        sub.add(c)
                        new.append(c)
            frontier = new
        if sub == cur:
            return False
        cur = sub
    return cur == {e}


def monoid_solvable(M, tau=None, pi=None, budget=100000):
    """Every maximal group solvable with order built from primes dividing pi."""
    groups, mul = maximal_groups(M, budget)
    allowed = _prime_factors(pi) if pi else None
    for e, grp in groups:
        if len(grp) == 1:
            continue
        if not _is_solvable(e, grp, mul):
            return False, (e, grp)
        if allowed is not None and not _prime_factors(len(grp)) <= allowed:
            return False, (e, grp)
    return True, None


def lcm(a, b):
    return a * b // gcd(a, b)
