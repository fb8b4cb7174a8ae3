"""Tuples, port counters, the star relations, witness construction,
circuit verification and the two proof searches (copy and pumping)."""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field

from .algebra import HLeaf, reachable, scc
from .congruence import (as_tp, cmp_tau_pi, equiv_n, idempotent_power, signature)
from .derived import eval_assign
from .terms import (Node, Port, Term, canonical_form, erase_ports, insert_at_ports,
                    leaf_completion, nabla, port_paths, ports, shape, node_key, NEUTRAL)


class ProofError(ValueError):
    pass


@dataclass
class PortInfo:
    local: object      # context of the port inside its own copy
    depth: int         # depth level of that copy (top copy = 1)
    copy: int


@dataclass
class Tuple:
    """t = (m, mu, psi): a multicontext with a tag and a target per port.

    psi values are horizontal element indices.  For tuples built by pumping,
    ``meta`` places each port in the copy structure and ``copies`` maps a
    copy id to (parent copy, depth, base shape).
    """
    m: Term
    psi: dict
    mu: dict = None
    inserted: dict = None
    zkey: object = None
    meta: dict = None
    copies: dict = None

    def nu(self, name):
        return self._ports()[name].key

    def _ports(self):
        pm = self.__dict__.get("_pmap")
        if pm is None:
            pm = self.__dict__["_pmap"] = {p.name: p for p in ports(self.m)}
        return pm

    def completion(self, phi=None):
        """ψ̆(m): ports replaced by leaves carrying their target element."""
        names = phi.algebra.H.names if phi is not None else None
        return leaf_completion(self.m, lambda x: HLeaf(self.psi[x], names[self.psi[x]] if names else ""))

    def mu_completion(self):
        if self.mu is None:
            raise ProofError("tuple has no mu labelling")
        return leaf_completion(self.m, lambda x: self.mu[x])

    def value(self, phi):
        return eval_assign(phi, self.m, lambda p: self._psi_of(p))

    def _psi_of(self, p):
        try:
            return self.psi[p.name]
        except KeyError:
            raise ProofError(f"port {p.name!r} lacks a psi value") from None


# ---------------------------------------------------------------- counters


def _exact_context(t, path):
    return canonical_form(erase_ports(nabla(t.m, path)))


def _copy_heights(t):
    """height of each copy: deepest Z-port copy below it minus its depth."""
    deepest = {}
    for nm, info in t.meta.items():
        if t.nu(nm) == t.zkey:
            c = info.copy
            while c is not None:
                deepest[c] = max(deepest.get(c, 0), info.depth)
                c = t.copies[c][0]
    return {c: deepest.get(c, t.copies[c][1]) - t.copies[c][1] for c in t.copies}


def counters(t, mode="exact", c=None):
    """Sparse port counter; mode is 'exact', ('signature', n) or ('pumped', sigma, rho)."""
    P = Counter()
    paths = port_paths(t.m)
    if not paths:
        return P
    if mode == "exact":
        for nm, path in paths.items():
            P[(_exact_context(t, path), t.nu(nm), t._psi_of(Port(nm)))] += 1
        return P
    kind = mode[0]
    if kind == "signature":
        n = mode[1]
        full = t.mu_completion()
        for nm, path in paths.items():
            if nm not in t.mu:
                raise ProofError(f"port {nm!r} lacks a mu value")
            ctx = signature(nabla(full, path), n, c)
            P[(t.mu[nm], ctx, t._psi_of(Port(nm)))] += 1
        return P
    if kind == "pumped":
        sigma, rho = mode[1], mode[2]
        cap = as_tp((sigma, rho)).canon
        if t.meta is None:
            raise ProofError("pumped counters need a tuple built by pumping")
        heights = _copy_heights(t)
        for nm in paths:
            info = t.meta[nm]
            key = (info.local, cap(info.depth), cap(heights[info.copy]), t.nu(nm), t._psi_of(Port(nm)))
            P[key] += 1
        return P
    raise ProofError(f"unknown counter mode {mode!r}")


def counters_equiv(P, Q, c):
    return all(cmp_tau_pi(P.get(k, 0), Q.get(k, 0), c) for k in set(P) | set(Q))


def zpart(P, zkey):
    return Counter({k: v for k, v in P.items() if k[3] == zkey})


# -------------------------------------------------------------------- star


def pump_structure_key(t, sigma, rho):
    """Copy tree of a pumped tuple with uniform chains collapsed and capped."""
    cap = as_tp((sigma, rho)).canon
    kids = {c: [] for c in t.copies}
    for c, (parent, _d, _b) in t.copies.items():
        if parent is not None:
            kids[parent].append(c)
    memo = {}

    def raw(c):
        if c in memo:
            return memo[c]
        base = t.copies[c][2]
        ks = [raw(k) for k in kids[c]]
        if not ks:
            r = ("chain", base, 1, None)
        elif all(k == ks[0] for k in ks):
            k0 = ks[0]
            if k0[0] == "chain" and k0[1] == base:
                r = ("chain", base, k0[2] + 1, k0[3])
            else:
                r = ("chain", base, 1, (len(ks), k0))
        else:
            r = ("node", base, frozenset(Counter(ks).items()))
        memo[c] = r
        return r

    def capped(r):
        if r is None:
            return None
        if r[0] == "chain":
            below = r[3]
            below = None if below is None else (below[0], capped(below[1]))
            return ("chain", r[1], cap(r[2]), below)
        return ("node", r[1], frozenset((capped(k), v) for k, v in r[2]))

    roots = [c for c, v in t.copies.items() if v[0] is None]
    return tuple(sorted((capped(raw(c)) for c in roots), key=repr))


def star(t, t2, mode="exact", c=None):
    c = as_tp(c)
    if mode == "exact":
        if shape(t.m) != shape(t2.m):
            return False
    elif mode[0] == "signature":
        n = mode[1]
        if not equiv_n(t.mu_completion(), t2.mu_completion(), n + 1, c):
            return False
    elif mode[0] == "pumped":
        if pump_structure_key(t, mode[1], mode[2]) != pump_structure_key(t2, mode[1], mode[2]):
            return False
    else:
        raise ProofError(f"unknown mode {mode!r}")
    return counters_equiv(counters(t, mode, c), counters(t2, mode, c), c)


# -------------------------------------------------------------- witnesses


@dataclass
class WitnessSet:
    forests: dict
    level: int
    trace: list = field(default_factory=list)


def insert_forests(t, S):
    """Fill every port x of t with e(S[(ν(x), ψ(x))])."""
    ps = ports(t.m)
    if not ps:
        return t.m
    keys = {}
    for p in ps:
        k = (p.key, t._psi_of(p))
        if k not in S:
            raise ProofError(f"inconsistent tuple: port {p.name!r} has no forest for input key {k!r}")
        keys[p.name] = k
    return insert_at_ports(t.m, list(keys), lambda nm: S[keys[nm]])


def build_witnesses(M, S0, n):
    """S^(n) = M^n · S^(0)."""
    S = dict(S0)
    trace = [{k: sum(1 for _ in _nodes(v)) for k, v in S.items()}]
    for _ in range(n):
        S = {key: insert_forests(t, S) for key, t in M.items()}
        trace.append({k: sum(1 for _ in _nodes(v)) for k, v in S.items()})
    return WitnessSet(S, n, trace)


def _nodes(t):
    from .terms import iter_nodes
    return iter_nodes(t)


def verify_witnesses(S, phi, n, c=None):
    """Violations (empty list = ok): diagonality and pairwise ≈ⁿ per class."""
    forests = S.forests if isinstance(S, WitnessSet) else S
    c = as_tp(c)
    names = phi.algebra.H.names
    out = []
    groups = {}
    for key, s in forests.items():
        J, j = key
        v = phi(s)
        if v != j:
            out.append(f"image of witness {J}/{names[j]} is {names[v]}")
        groups.setdefault(J, []).append((key, s))
    for J, items in groups.items():
        sigs = [(key, signature(s, n, c)) for key, s in items]
        k0, s0 = sigs[0]
        for key, s in sigs[1:]:
            if s is not s0:
                out.append(f"level {n}: witnesses {J}/{names[k0[1]]} and {J}/{names[key[1]]} differ")
    return out


def rc_verify(M, S0, n, phi, c=None):
    """Check the recursive-circuit condition at level n; [] means ok.

    Path A derives mu from the level-n witnesses and checks the image and
    star conditions; path B checks that M^(n+1)·S0 are level-(n+1)
    witnesses.  A pass of A with a failure of B is reported as a mismatch.
    """
    c = as_tp(c)
    names = phi.algebra.H.names
    Sn = build_witnesses(M, S0, n).forests
    out = []
    tuples = {}
    for key, t in M.items():
        J, j = key
        mu, ins = {}, {}
        for p in ports(t.m):
            k = (p.key, t._psi_of(p))
            if k not in Sn:
                raise ProofError(f"inconsistent tuple: port {p.name!r} has no witness {k!r}")
            r = Sn[k]
            if phi(r) != k[1]:
                raise ProofError(f"inconsistent tuple: port {p.name!r} witness has the wrong image")
            mu[p.name] = signature(r, n, c)
            ins[p.name] = r
        tt = Tuple(t.m, t.psi, mu, ins)
        if t.value(phi) != j:
            out.append(f"image: component {J}/{names[j]} evaluates to {names[t.value(phi)]}")
        tuples[key] = tt
    groups = {}
    for key, tt in tuples.items():
        groups.setdefault(key[0], []).append((key, tt))
    for J, items in groups.items():
        for (k1, t1), (k2, t2) in itertools.combinations(items, 2):
            if not equiv_n(t1.mu_completion(), t2.mu_completion(), n + 1, c):
                out.append(f"structure: {J}/{names[k1[1]]} vs {J}/{names[k2[1]]} differ at level {n + 1}")
            elif not counters_equiv(counters(t1, ("signature", n), c), counters(t2, ("signature", n), c), c):
                out.append(f"counters: {J}/{names[k1[1]]} vs {J}/{names[k2[1]]}")
    path_b = verify_witnesses(build_witnesses(M, S0, n + 1), phi, n + 1, c)
    if not out and path_b:
        out.append("cross-check mismatch: " + "; ".join(path_b))
    return out


# ------------------------------------------------------------ copy search


_PORT = Port("", ())


def _shapes(labels, i, p, _cache={}):
    key = (labels, i, p)
    if key in _cache:
        return _cache[key]
    res = []

    def trees(i, p):
        out = []
        if i == 0:
            return [_PORT] if p == 1 else []
        for a in labels:
            for f in _shapes(labels, i - 1, p):
                out.append(Node(a, f))
        return out

    def rec(i, p, bound, acc):
        if i == 0 and p == 0:
            res.append(tuple(acc))
            return
        for i1 in range(i, -1, -1):
            for p1 in range(p, -1, -1):
                if i1 == 0 and p1 != 1:
                    continue
                if (i1, p1) == (0, 0):
                    continue
                for tr in trees(i1, p1):
                    k = ((i1, p1), node_key(tr))
                    if bound is not None and k > bound:
                        continue
                    rec(i - i1, p - p1, k, acc + [tr])

    rec(i, p, None, [])
    _cache[key] = res
    return res


def _name_ports(roots):
    counter = itertools.count(1)

    def go(n):
        if isinstance(n, Port):
            return Port(f"x{next(counter)}", ("J",))
        if isinstance(n, Node) and n.children:
            return Node(n.label, tuple(go(c) for c in n.children))
        return n
    return Term(tuple(go(r) for r in roots))


def search_copy(phi, J, c=None, node_budget=7, width_budget=4, labels=None, jname="J"):
    """First slender copy circuit over J, or None when the budget is exhausted."""
    c = as_tp(c)
    H = phi.algebra.H
    J = sorted(H.idx(j) for j in J)
    if len(J) < 2:
        return None
    if not any(set(J) <= comp for comp in scc(phi.algebra)):
        return None
    if not set(J) <= set(reachable(phi)):
        return None
    if labels is None:
        labels = sorted(a for a in phi.letters if a != NEUTRAL)
    labels = tuple(labels)
    cands = []
    for i in range(1, node_budget + 1):
        for p in range(1, width_budget + 1):
            shapes = sorted(_shapes(labels, i, p), key=lambda roots: str(Term(roots)))
            for roots in shapes:
                m = _name_ports(roots)
                found = _try_shape(phi, m, J, c)
                if found is not None:
                    return {(jname, j): Tuple(m, psi) for j, psi in found.items()}
    return None


def _try_shape(phi, m, J, c):
    paths = port_paths(m)
    names = list(paths)
    ctx = {nm: _exact_context(Tuple(m, {}), paths[nm]) for nm in names}
    classes = sorted(set(ctx.values()), key=str)
    cidx = {v: i for i, v in enumerate(classes)}
    by_counter = {}
    for combo in itertools.product(J, repeat=len(names)):
        psi = dict(zip(names, combo))
        v = eval_assign(phi, m, lambda p: psi[p.name])
        if v not in J:
            continue
        cnt = Counter((cidx[ctx[nm]], psi[nm]) for nm in names)
        key = frozenset((k, c.canon(x)) for k, x in cnt.items())
        slot = by_counter.setdefault(key, {})
        slot.setdefault(v, psi)
        if len(slot) == len(J):
            return slot
    return None


# ------------------------------------------------------- pumped subcircuit


def base_tuple(m, psi, zkey):
    """A one-copy tuple with port placement metadata."""
    paths = port_paths(m)
    base = shape(m)
    meta = {nm: PortInfo(shape(nabla(m, paths[nm])), 1, 0) for nm in paths}
    return Tuple(m, dict(psi), zkey=zkey, meta=meta, copies={0: (None, 1, base)})


def _insert_tuples(t, chooser):
    """At each Z-port x with chooser(x) not None, insert that tuple's term."""
    zs = [p.name for p in ports(t.m) if p.key == t.zkey and chooser(p.name) is not None]
    if not zs:
        return t
    new_psi = {nm: v for nm, v in t.psi.items() if nm not in zs}
    new_meta = {nm: v for nm, v in t.meta.items() if nm not in zs}
    copies = dict(t.copies)
    subs = {nm: chooser(nm) for nm in zs}
    m2 = insert_at_ports(t.m, zs, lambda nm: subs[nm].m)
    old = set(t._ports())
    used = set(port_paths(m2))
    multi = len(zs) > 1
    next_copy = max(copies) + 1
    for k, nm in enumerate(zs, 1):
        u = subs[nm]
        base_depth = t.meta[nm].depth
        parent = t.meta[nm].copy
        remap = {}
        for cid in sorted(u.copies):
            remap[cid] = next_copy
            next_copy += 1
        for cid, (par, d, b) in u.copies.items():
            copies[remap[cid]] = (parent if par is None else remap[par], d + base_depth, b)
        for q in ports(u.m):
            newname = _renamed(q.name, k, multi, used, old, zs)
            info = u.meta[q.name]
            new_meta[newname] = PortInfo(info.local, info.depth + base_depth, remap[info.copy])
            new_psi[newname] = u.psi[q.name]
    present = set(port_paths(m2))
    assert present == set(new_meta), "port bookkeeping out of sync"
    return Tuple(m2, new_psi, zkey=t.zkey, meta=new_meta, copies=copies)


def _renamed(name, k, multi, used, old, zs):
    cand = f"{name}{k}" if multi else name
    if cand in used and (cand not in old or cand in zs):
        return cand
    raise ProofError(f"cannot track renamed port {name!r}")


def consistent_pump(top, j, levels):
    """Pump the top tuples: each Z-port x gets a copy of top[ψ(x)]."""
    t = top[j]
    for _ in range(levels - 1):
        t = _insert_tuples(t, lambda nm, t=t: top[t.psi[nm]])
    return t


@dataclass
class PumpedSubcircuit:
    tuples: dict
    A: tuple
    omega: int
    eta: int
    post_ok: bool


def build_pumped_subcircuit(T, chi, c, top=None):
    """The three-step pumped construction; period must be 1."""
    c = as_tp(c)
    if c.pi != 1:
        raise ProofError("the pumped construction is stated for period 1 only")
    top = top or T
    order = sorted(T)
    idx = {j: i for i, j in enumerate(order)}
    zkey = next(iter(T.values())).zkey
    A = [[0] * len(order) for _ in order]
    for j, t in top.items():
        for p in ports(t.m):
            if p.key == zkey:
                A[idx[j]][idx[t.psi[p.name]]] += 1
    omega, _ = idempotent_power(A, c)
    eta = omega
    while eta < c.tau + chi:
        eta += omega
    out = {}
    for j in order:
        t = consistent_pump(top, j, chi)                                # i
        t = _insert_tuples(t, lambda nm, t=t: T[t.psi[nm]])             # ii
        t = _insert_tuples(t, lambda nm, t=t: consistent_pump(top, t.psi[nm], eta))   # iii
        out[j] = t
    Ps = [zpart(counters(out[j], ("pumped", chi, 1), c), zkey) for j in order]
    post = all(counters_equiv(Ps[0], P, c) for P in Ps[1:])
    return PumpedSubcircuit(out, tuple(map(tuple, A)), omega, eta, post)
