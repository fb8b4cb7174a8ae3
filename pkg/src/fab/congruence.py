"""Threshold/period counting and the iterated relabelling congruences.

``signature(t, n, c)`` returns an interned value that is equal for two
forests (or two contexts) exactly when they are ≈ⁿ_{τ,π}-equivalent.

Level 1 is the capped multiset of labels.  Level k+1 is the level-k value
together with the capped multiset of node relabellings

    (label, holes below the node, sig_k(Δ), sig_k(∇))

where holes are named: the box of a context is hole 0 and the hole created
when computing level k+1 is hole k.  For contexts the "holes below" tag is
what separates trunk nodes from the rest.  Neutral e-nodes are contracted
first, since every homomorphism sends e□ to the identity.
"""
from __future__ import annotations

import hashlib
import sys
import threading
from collections import Counter
from dataclasses import dataclass

from . import _kernels as K
from .terms import Box, Node, Port, Term, contract_neutral, canonical_form, NEUTRAL


@dataclass(frozen=True)
class TauPi:
    tau: int = 1
    pi: int = 1

    def __post_init__(self):
        if self.tau < 0 or self.pi < 1:
            raise ValueError("need tau >= 0 and pi >= 1")

    def canon(self, p):
        return p if p < self.tau else self.tau + (p - self.tau) % self.pi

    def __iter__(self):
        return iter((self.tau, self.pi))


def as_tp(c):
    if isinstance(c, TauPi):
        return c
    if c is None:
        return TauPi()
    return TauPi(*c)


def cmp_tau_pi(p, q, c):
    tau, pi = as_tp(c)
    return p == q or (p >= tau and q >= tau and (p - q) % pi == 0)


# ------------------------------------------------------------ interning


class Signature:
    __slots__ = ("level", "kind", "id", "payload", "_digest")

    def __init__(self, level, kind, id_, payload):
        self.level = level
        self.kind = kind
        self.id = id_
        self.payload = payload
        self._digest = None

    def __repr__(self):
        return f"Sig{self.level}{'c' if self.kind == 'context' else 'f'}#{self.id}"

    __str__ = __repr__

    def __hash__(self):
        return self.id

    def __eq__(self, other):
        return self is other

    def project(self, k):
        """The level-k signature this one determines (k <= level)."""
        s = self
        if k > s.level or k < 1:
            raise ValueError("can only project to a lower level")
        while s.level > k:
            s = s.payload[1]
        return s

    def digest(self):
        """Session-independent hash of the payload."""
        if self._digest is None:
            self._digest = hashlib.sha1(_stable(self.payload).encode()).hexdigest()[:16]
        return self._digest


def _stable(x):
    if isinstance(x, Signature):
        return "S" + x.digest()
    if isinstance(x, frozenset):
        return "{" + ",".join(sorted(_stable(y) for y in x)) + "}"
    if isinstance(x, tuple):
        return "(" + ",".join(_stable(y) for y in x) + ")"
    return repr(x)


class SignatureTable:
    """Append-only get-or-insert registry."""

    def __init__(self):
        self._by_payload = {}
        self._lock = threading.Lock()

    def intern(self, level, kind, payload):
        key = (kind, payload)
        s = self._by_payload.get(key)
        if s is not None:
            return s
        with self._lock:
            s = self._by_payload.get(key)
            if s is None:
                s = Signature(level, kind, len(self._by_payload), payload)
                self._by_payload[key] = s
        return s

    def __len__(self):
        return len(self._by_payload)


TABLE = SignatureTable()


# ---------------------------------------------------------- computation


class SignatureError(ValueError):
    pass


class _Flat:
    """Preorder arrays of a term with e-nodes contracted."""

    def __init__(self, t, extensions=None):
        t = contract_neutral(t)
        self.label = []
        self.end = []
        self.hole = None
        roots = []
        stack = []

        def visit(n):
            i = len(self.label)
            if isinstance(n, Node):
                self.label.append(n.label)
                self.end.append(None)
                for c in n.children:
                    visit(c)
            elif isinstance(n, Port):
                if extensions is None:
                    lab = ("?", n.key)
                else:
                    try:
                        lab = extensions[n.key]
                    except KeyError:
                        raise SignatureError(f"port {n.name!r} has no extension") from None
                self.label.append(lab)
                self.end.append(None)
            else:
                if self.hole is not None:
                    raise SignatureError("more than one box")
                self.hole = i
                self.label.append(None)
                self.end.append(None)
            self.end[i] = len(self.label)
            return i

        if sys.getrecursionlimit() < 10000:
            sys.setrecursionlimit(10000)
        for r in t.roots:
            roots.append(visit(r))
        self.n = len(self.label)
        # inclusive subtree counts
        self.incl = [None] * self.n
        for i in range(self.n - 1, -1, -1):
            c = Counter()
            if self.label[i] is not None:
                c[self.label[i]] += 1
            j = i + 1
            while j < self.end[i]:
                c.update(self.incl[j])
                j = self.end[j]
            self.incl[i] = c
        tot = Counter()
        for r in roots:
            tot.update(self.incl[r])
        self.total = tot


class _Computer:
    def __init__(self, flat, c):
        self.f = flat
        self.c = c
        self.memo = {}

    def cap(self, counts):
        canon = self.c.canon
        return frozenset((k, canon(v)) for k, v in counts.items() if v > 0)

    def below(self, h, y):
        """Is node h strictly below node y?  (y == -1 is the virtual root.)"""
        return y < 0 or (y < h < self.f.end[y])

    def region(self, r, holes):
        f = self.f
        hs = {h for h, _ in holes}
        i = 0 if r < 0 else r + 1
        stop = f.n if r < 0 else f.end[r]
        while i < stop:
            if i in hs:
                i = f.end[i]
                continue
            yield i
            i += 1

    def sig(self, j, r, holes):
        key = (j, r, holes)
        s = self.memo.get(key)
        if s is not None:
            return s
        kind = "context" if any(nm == 0 for _, nm in holes) else "forest"
        f = self.f
        if j == 1:
            counts = Counter(f.total if r < 0 else f.incl[r])
            if r >= 0 and f.label[r] is not None:
                counts[f.label[r]] -= 1
            for h, _ in holes:
                counts.subtract(f.incl[h])
            names = tuple(sorted(nm for _, nm in holes))
            s = TABLE.intern(1, kind, (1, names, self.cap(counts)))
        else:
            prev = self.sig(j - 1, r, holes)
            rel = Counter()
            for y in self.region(r, holes):
                under = tuple(hn for hn in holes if self.below(hn[0], y))
                over = tuple(hn for hn in holes if not self.below(hn[0], y))
                tags = tuple(sorted(nm for _, nm in under))
                d = self.sig(j - 1, y, under)
                u = self.sig(j - 1, r, tuple(sorted(over + ((y, j - 1),))))
                rel[(f.label[y], tags, d, u)] += 1
            s = TABLE.intern(j, kind, (j, prev, self.cap(rel)))
        self.memo[key] = s
        return s


def signature(t, n, c=None, extensions=None):
    """Level-n signature of a forest or one-box context.

    Ports are read as leaves labelled by their input key unless
    ``extensions`` (key -> label) is given, in which case unmapped ports
    are an error.
    """
    if n < 1:
        raise ValueError("level must be >= 1")
    f = _Flat(t, extensions)
    comp = _Computer(f, as_tp(c))
    holes = ((f.hole, 0),) if f.hole is not None else ()
    return comp.sig(n, -1, holes)


def equiv_n(s, t, n, c=None, extensions=None):
    return signature(s, n, c, extensions) is signature(t, n, c, extensions)


# --------------------------------------------------------- falsification


def enumerate_forests(letters, size):
    """All forests with exactly `size` nodes over letters, up to sibling order."""
    letters = sorted(letters)
    return _forests(tuple(letters), size)


_tree_cache = {}
_forest_cache = {}


def _trees(letters, size):
    key = (letters, size)
    if key not in _tree_cache:
        out = []
        for a in letters:
            for kids in _forests(letters, size - 1):
                out.append(Node(a, kids.roots))
        _tree_cache[key] = out
    return _tree_cache[key]


def _forests(letters, size):
    key = (letters, size)
    if key in _forest_cache:
        return _forest_cache[key]
    from .terms import node_key
    if size == 0:
        res = [Term(())]
    else:
        res = []
        # multisets of trees: first tree has the largest (size, key)
        def rec(remaining, max_key, acc):
            if remaining == 0:
                res.append(Term(tuple(acc)))
                return
            for s in range(min(remaining, max_key[0] if max_key else remaining), 0, -1):
                for tr in _trees(letters, s):
                    k = (s, node_key(tr))
                    if max_key is not None and k > max_key:
                        continue
                    rec(remaining - s, k, acc + [tr])
        rec(size, None, [])
    _forest_cache[key] = res
    return res


def refinement_falsify(phi, n, c=None, size_budget=8, letters=None):
    """Two forests with equal level-n signature but different images, or None."""
    c = as_tp(c)
    if letters is None:
        letters = sorted(a for a in phi.letters if a != NEUTRAL)
    seen = {}
    for size in range(0, size_budget + 1):
        for t in enumerate_forests(letters, size):
            s = signature(t, n, c)
            v = phi(t)
            if s in seen:
                t0, v0 = seen[s]
                if v0 != v:
                    return t0, t
            else:
                seen[s] = (t, v)
    return None


# ------------------------------------------------------- counter matrices


def mat_mul(A, B, c):
    tau, pi = as_tp(c)
    if len(A[0]) != len(B):
        raise ValueError("dimension mismatch")
    return K.mat_mul(A, B, tau, pi)


def canon_matrix(A, c):
    c = as_tp(c)
    return tuple(tuple(c.canon(x) for x in row) for row in A)


def idempotent_power(A, c):
    """(ω, A^ω) with ω the least exponent such that A^{2ω} = A^ω."""
    c = as_tp(c)
    A = canon_matrix(A, c)
    powers = [None, A]
    w = 1
    while True:
        while len(powers) <= 2 * w:
            powers.append(mat_mul(powers[-1], A, c))
        if powers[2 * w] == powers[w]:
            return w, powers[w]
        w += 1
