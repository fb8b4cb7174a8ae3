"""Algebras built from a homomorphism: mapping tables, the multivertical
monoid, the extended (powerset) algebra, and symbolic pumping."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

from . import _kernels as K
from .algebra import (AlgebraError, HLeaf, TransformationMonoid, elem_threshold_period,
                      lcm, compose)
from .congruence import as_tp
from .terms import (Box, Node, Port, Term, canonical_form, get_node, delta, nabla, ports,
                    pump, shape, z_key, insert_at_ports, interior_count, map_ports, NEUTRAL)


# ------------------------------------------------------------ evaluation


def eval_assign(phi, t, assign, hole=None):
    """Evaluate t with ports valued by assign(port) (an H index)."""
    H = phi.algebra.H
    tab = H.table
    letters = phi.letters

    def forest(nodes):
        acc = H.identity
        for n in nodes:
            acc = tab[acc][tree(n)]
        return acc

    def tree(n):
        if isinstance(n, Node):
            if isinstance(n.label, HLeaf) and not n.children:
                return n.label.value
            if not n.children and n.label in phi.leaves:
                return phi.leaves[n.label]
            act = letters.get(n.label)
            if act is None:
                raise AlgebraError(f"letter {n.label!r} has no action")
            return act[forest(n.children)]
        if isinstance(n, Port):
            return assign(n)
        if hole is None:
            raise AlgebraError("box port met in forest evaluation")
        return hole

    return forest(t.roots)


@dataclass(frozen=True)
class MappingTable:
    B: tuple
    k: int
    values: tuple     # indexed by itertools.product(range(k), repeat=len(B))

    def __call__(self, *xi):
        idx = 0
        for x in xi:
            idx = idx * self.k + x
        return self.values[idx]

    def curry(self, fixed):
        """Table of the last argument with the first N-1 fixed."""
        base = 0
        for x in fixed:
            base = base * self.k + x
        base *= self.k
        return tuple(self.values[base:base + self.k])


def mapping_table(phi, m, B=None, budget=64 ** 3):
    """γ[m]: all assignments of B-labelled ports, evaluated."""
    k = len(phi.algebra.H)
    if B is None:
        B = sorted({p.key for p in ports(m)}, key=str)
    B = tuple(B)
    pos = {b: i for i, b in enumerate(B)}
    for p in ports(m):
        if p.key not in pos:
            raise AlgebraError(f"port label {p.key!r} not in B")
    if k ** len(B) > budget:
        raise AlgebraError("mapping table exceeds budget")
    is_ctx = any(isinstance(n, Box) for n in _all_nodes(m))
    vals = []
    for xi in itertools.product(range(k), repeat=len(B)):
        f = lambda p: xi[pos[p.key]]
        if is_ctx:
            vals.append(tuple(eval_assign(phi, m, f, h) for h in range(k)))
        else:
            vals.append(eval_assign(phi, m, f))
    return MappingTable(B, k, tuple(vals))


def _all_nodes(t):
    from .terms import iter_nodes
    return [n for _, n in iter_nodes(t)]


def _node_label(n):
    if isinstance(n, Node):
        return ("n", n.label)
    if isinstance(n, Port):
        return ("p", n.key)
    return ("box",)


def node_equiv(phi, mx, my):
    (m, x), (m2, y) = mx, my
    nx_, ny_ = get_node(m, x), get_node(m2, y)
    if _node_label(nx_) != _node_label(ny_):
        return False
    B = sorted({p.key for p in ports(m)} | {p.key for p in ports(m2)}, key=str)
    if mapping_table(phi, delta(m, x), B) != mapping_table(phi, delta(m2, y), B):
        return False
    return mapping_table(phi, nabla(m, x), B) == mapping_table(phi, nabla(m2, y), B)


# ------------------------------------------------------ multivertical monoid


def additive_bound(H):
    t_H, p_H = 1, 1
    for h in range(len(H)):
        t, p = elem_threshold_period(h, H)
        t_H = max(t_H, t)
        p_H = lcm(p_H, p)
    return t_H, p_H


def multivertical_generators(phi):
    H = phi.algebra.H
    n = len(H)
    t_H, p_H = additive_bound(H)
    mult = [tuple(H.times(k, h) for h in range(n)) for k in range(1, t_H + p_H + 1)]
    vg = [tuple(range(n))] + phi.algebra.vertical_generators()
    vg += [v for a, v in phi.letters.items() if a != NEUTRAL]
    gens = []
    for v in dict.fromkeys(vg):
        for mu in mult:
            gens.append(compose(v, mu))
    return list(dict.fromkeys(gens))


def multivertical(phi, budget=200000):
    n = len(phi.algebra.H)
    return TransformationMonoid.generated(n, multivertical_generators(phi), budget)


def threshold_period_of(M):
    sigma, rho = 1, 1
    for x in M:
        t, p = elem_threshold_period(x)
        sigma = max(sigma, t)
        rho = lcm(rho, p)
    return sigma, rho


def multivertical_threshold_period(phi, budget=200000):
    return threshold_period_of(multivertical(phi, budget))


# ---------------------------------------------------------- extended algebra


def to_mask(S):
    m = 0
    for x in S:
        m |= 1 << x
    return m


def from_mask(m):
    out, i = [], 0
    while m >> i:
        if (m >> i) & 1:
            out.append(i)
        i += 1
    return frozenset(out)


def _kern(n):
    return K if n <= 64 else K.python_backend


def _nu_lookup(nu):
    def get(p):
        if p.name in nu:
            return nu[p.name]
        if p.key in nu:
            return nu[p.key]
        raise AlgebraError(f"port {p.name!r} has no subset")
    return get


def gpercent_mask(phi, m, nu, hole=None):
    """Image set (bitmask) of m over all completions allowed by nu."""
    H = phi.algebra.H
    kern = _kern(len(H))
    get = _nu_lookup(nu)
    tab = H.table
    cache = {}

    def forest(nodes):
        acc = 1 << H.identity
        for n in nodes:
            acc = kern.sumset(acc, tree(n), tab)
        return acc

    def tree(n):
        if isinstance(n, Node):
            if isinstance(n.label, HLeaf) and not n.children:
                return 1 << n.label.value
            if not n.children and n.label in phi.leaves:
                return 1 << phi.leaves[n.label]
            act = phi.letters.get(n.label)
            if act is None:
                raise AlgebraError(f"letter {n.label!r} has no action")
            return kern.imageset(forest(n.children), act)
        if isinstance(n, Port):
            s = get(n)
            m_ = s if isinstance(s, int) else to_mask(H.idx(x) for x in s)
            if not m_:
                raise AlgebraError("empty subset")
            return m_
        if hole is None:
            raise AlgebraError("box port met in forest evaluation")
        return hole

    return forest(m.roots)


def gpercent_image(phi, m, nu, hole=None):
    if hole is not None and not isinstance(hole, int):
        hole = to_mask(hole)
    return from_mask(gpercent_mask(phi, m, nu, hole))


@dataclass
class SubsetMap:
    """A transformation of (part of) the nonempty-subset lattice, on bitmasks."""
    img: dict

    def __call__(self, S):
        return from_mask(self.img[to_mask(S)])

    @property
    def domain(self):
        return sorted(self.img)

    def restricted_equal(self, other, dom=None):
        dom = dom if dom is not None else sorted(set(self.img) & set(other.img))
        return all(self.img[d] == other.img[d] for d in dom)

    def as_tuple(self, dom=None):
        dom = dom or self.domain
        pos = {d: i for i, d in enumerate(dom)}
        return tuple(pos[self.img[d]] for d in dom)

    def threshold_period(self):
        return elem_threshold_period(self.as_tuple())

    def then(self, other):
        """other o self."""
        return SubsetMap({d: other.img[v] for d, v in self.img.items() if v in other.img})


def extended_vertical_element(phi, w, nu, seeds=None, dense_limit=12):
    """F -> gpercent image of w with F at the box.

    Dense over all nonempty subsets when |G| <= dense_limit and no seeds are
    given; otherwise explored from the seeds.
    """
    n = len(phi.algebra.H)
    if seeds is None:
        if n > dense_limit:
            raise AlgebraError("lattice too large for a dense table; give seeds")
        todo = list(range(1, 1 << n))
    else:
        todo = [s if isinstance(s, int) else to_mask(s) for s in seeds]
    img = {}
    while todo:
        F = todo.pop()
        if F in img:
            continue
        G = gpercent_mask(phi, w, nu, F)
        img[F] = G
        if G not in img:
            todo.append(G)
    return SubsetMap(img)


def reachable_lattice(maps_fn, seeds):
    """Close seed masks under several mask->mask functions."""
    seen = set()
    todo = [s if isinstance(s, int) else to_mask(s) for s in seeds]
    while todo:
        F = todo.pop()
        if F in seen:
            continue
        seen.add(F)
        for f in maps_fn:
            todo.append(f(F))
    return sorted(seen)


# ------------------------------------------------------- symbolic pumping


class PumpError(ValueError):
    pass


@dataclass(frozen=True)
class PumpedTerm:
    """base^(exponent, Z) with optional uniform substitutions at other keys."""
    base: tuple
    zkey: object
    exponent: int
    inner: tuple = ()          # ((key, PumpedTerm), ...)

    @classmethod
    def of(cls, base, Z, exponent, inner=()):
        if isinstance(base, Term):
            base = (base,)
        base = tuple(base)
        key = z_key(base, Z)
        return cls(base, key, exponent, tuple(sorted(inner, key=lambda p: str(p[0]))))

    def family(self):
        return frozenset(shape(b) for b in self.base)

    def realize(self):
        zs = {p.name for b in self.base for p in ports(b) if p.key == self.zkey}
        out = []
        for t in pump(self.base, zs, self.exponent):
            for key, sub in self.inner:
                subs = sorted(sub.realize(), key=str)
                names = [p.name for p in ports(t) if p.key == key]
                if not names:
                    continue
                # uniform substitution: one inner term per key
                t = insert_at_ports(t, names, subs[0])
            out.append(t)
        return out

    def key(self, sigma, rho):
        c = as_tp((sigma, rho))
        return (self.family(), self.zkey, c.canon(self.exponent),
                tuple((k, sub.key(sigma, rho)) for k, sub in self.inner))

    def size(self):
        return max(interior_count(t) for t in self.realize())


def pump_equiv(p, q, sigma, rho):
    if p.family() != q.family():
        raise PumpError("pumped terms built from different base families")
    return p.key(sigma, rho) == q.key(sigma, rho)


def stable_keys(m):
    """Input keys whose ports all have the same context up to sibling order."""
    out = []
    by = {}
    for p in ports(m):
        by.setdefault(p.key, []).append(p.name)
    from .terms import port_paths
    paths = port_paths(m)
    for key, names in by.items():
        ctxs = {shape(nabla(m, paths[nm])) for nm in names}
        if len(ctxs) == 1:
            out.append(key)
    return sorted(out, key=str)


def pumped_family(base, size_budget, max_depth=2):
    """PumpedTerms over a single base term whose realisations fit the budget."""
    level1 = []
    for key in stable_keys(base):
        zs = [p.name for p in ports(base) if p.key == key]
        th = 1
        while True:
            pt = PumpedTerm.of(base, zs, th)
            if pt.size() > size_budget:
                break
            level1.append(pt)
            th += 1
    out = list(level1)
    if max_depth >= 2:
        for outer in level1:
            other = [p.key for p in ports(base) if p.key != outer.zkey]
            for key in dict.fromkeys(other):
                for sub in level1:
                    pt = PumpedTerm(outer.base, outer.zkey, outer.exponent, ((key, sub),))
                    if pt.size() <= size_budget:
                        out.append(pt)
    return out


def pump_falsify(phi, bases, sigma, rho, size_budget=12, max_depth=2):
    """Two pump-equivalent terms with different mapping tables, or None.

    Returns (None, stats) when none is found among realisations of at most
    size_budget interior nodes (neutral nodes not counted).
    """
    groups = {}
    checked = 0
    for base in bases:
        for pt in pumped_family(base, size_budget, max_depth):
            for t in pt.realize():
                B = sorted({p.key for p in ports(t)}, key=str)
                tab = mapping_table(phi, t, B)
                k = pt.key(sigma, rho)
                checked += 1
                if k in groups:
                    t0, tab0 = groups[k]
                    if tab0 != tab:
                        return (t0, t), checked
                else:
                    groups[k] = (t, tab)
    return None, checked
