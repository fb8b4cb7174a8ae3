"""Forests, contexts and multicontexts.

A Term is an ordered sequence of root nodes.  Nodes are frozen dataclasses:
``Node(label, children)`` for interior nodes, ``Port(name, labels)`` for
insertion points and the singleton ``BOX`` for the distinguished hole.

Concrete syntax::

    forest := tree ("+" tree)* | "0"
    tree   := LETTER ["(" forest ")" | tree] | "?" NAME (":" NAME)* | "_"

A letter immediately followed by another tree is its father, so ``ab+c`` is
``a(b)+c`` and ``a_`` is the context ``a(_)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

NEUTRAL = "e"
_DELIMS = set(" \t\n+():?")


class TermError(ValueError):
    pass


class TermSyntaxError(TermError):
    def __init__(self, msg, pos=None):
        self.pos = pos
        if pos is not None:
            msg = f"{msg} at position {pos}"
        super().__init__(msg)


@dataclass(frozen=True, slots=True)
class Node:
    label: object
    children: tuple = ()


@dataclass(frozen=True, slots=True)
class Port:
    name: str
    labels: tuple = ()

    @property
    def key(self):
        """Input key: the extra label(s) if any, else the name."""
        if not self.labels:
            return self.name
        if len(self.labels) == 1:
            return self.labels[0]
        return tuple(self.labels)


@dataclass(frozen=True, slots=True)
class Box:
    pass


BOX = Box()


@dataclass(frozen=True, slots=True)
class Term:
    roots: tuple = ()

    def __str__(self):
        return format_term(self)

    def __add__(self, other):
        return Term(self.roots + other.roots)

    def __len__(self):
        return size(self)


def forest(*roots):
    return Term(tuple(roots))


def leaf(label):
    return Node(label, ())


# ---------------------------------------------------------------- parsing


class _Parser:
    def __init__(self, text, alphabet):
        self.s = text
        self.i = 0
        self.alphabet = None
        if alphabet is not None:
            self.alphabet = sorted(set(alphabet) | {NEUTRAL}, key=lambda a: (-len(a), a))
        self.port_names = set()
        self.boxes = 0

    def peek(self):
        while self.i < len(self.s) and self.s[self.i].isspace():
            self.i += 1
        return self.s[self.i] if self.i < len(self.s) else ""

    def letter(self):
        s, i = self.s, self.i
        if self.alphabet is None:
            c = s[i]
            if c in _DELIMS or c == "_":
                raise TermSyntaxError(f"unexpected {c!r}", i)
            self.i += 1
            return c
        for a in self.alphabet:
            if s.startswith(a, i):
                self.i += len(a)
                return a
        raise TermSyntaxError(f"unknown letter at {s[i:i+8]!r}", i)

    def name(self):
        j = self.i
        while j < len(self.s) and self.s[j] not in _DELIMS:
            j += 1
        if j == self.i:
            raise TermSyntaxError("expected a name", self.i)
        nm = self.s[self.i:j]
        self.i = j
        return nm

    def forest(self):
        c = self.peek()
        if c in ("", ")"):
            return ()
        out = [self.tree()]
        while self.peek() == "+":
            self.i += 1
            out.append(self.tree())
        return tuple(out)

    def tree(self):
        c = self.peek()
        if c == "?":
            pos = self.i
            self.i += 1
            nm = self.name()
            labels = []
            while self.i < len(self.s) and self.s[self.i] == ":":
                self.i += 1
                labels.append(self.name())
            if nm in self.port_names:
                raise TermSyntaxError(f"duplicate port name {nm!r}", pos)
            self.port_names.add(nm)
            return Port(nm, tuple(labels))
        if c == "_":
            self.boxes += 1
            if self.boxes > 1:
                raise TermSyntaxError("two box ports", self.i)
            self.i += 1
            return BOX
        if c == "":
            raise TermSyntaxError("unexpected end of input", self.i)
        lab = self.letter()
        # no whitespace skipping here: juxtaposition must be tight
        nxt = self.s[self.i] if self.i < len(self.s) else ""
        if nxt == "(":
            self.i += 1
            kids = self.forest()
            if self.peek() != ")":
                raise TermSyntaxError("expected ')'", self.i)
            self.i += 1
            return Node(lab, kids)
        if nxt and nxt not in _DELIMS:
            return Node(lab, (self.tree(),))
        if nxt == "?":
            return Node(lab, (self.tree(),))
        return Node(lab, ())


def parse_term(text, alphabet=None):
    """Parse term syntax.  Without an alphabet every letter is one character."""
    stripped = text.strip()
    if stripped in ("", "()") or (stripped == "0" and (alphabet is None or "0" not in alphabet)):
        return Term(())
    p = _Parser(text, alphabet)
    roots = p.forest()
    if p.peek() != "":
        raise TermSyntaxError(f"trailing input {p.s[p.i:p.i+8]!r}", p.i)
    return Term(roots)


def _fmt(node):
    if isinstance(node, Node):
        lab = str(node.label)
        if node.children:
            return lab + "(" + "+".join(_fmt(c) for c in node.children) + ")"
        return lab
    if isinstance(node, Port):
        return "?" + node.name + "".join(":" + str(l) for l in node.labels)
    return "_"


def format_term(t):
    if not t.roots:
        return "0"
    return "+".join(_fmt(r) for r in t.roots)


# ----------------------------------------------------------- canonical form


def _lk(label):
    return (0, label) if isinstance(label, str) else (1, repr(label))


def node_key(node):
    if isinstance(node, Node):
        return (0, _lk(node.label), tuple(node_key(c) for c in node.children))
    if isinstance(node, Port):
        return (1, node.name, tuple(_lk(l) for l in node.labels))
    return (2,)


def _canon(node):
    if isinstance(node, Node) and node.children:
        kids = sorted((_canon(c) for c in node.children), key=node_key)
        return Node(node.label, tuple(kids))
    return node


def canonical_form(t):
    return Term(tuple(sorted((_canon(r) for r in t.roots), key=node_key)))


def shape(t):
    """Drop port names, keeping input keys; used for comparisons up to renaming."""
    def go(n):
        if isinstance(n, Port):
            return Port("", (n.key,))
        if isinstance(n, Node) and n.children:
            return Node(n.label, tuple(go(c) for c in n.children))
        return n
    return canonical_form(Term(tuple(go(r) for r in t.roots)))


# -------------------------------------------------------------- traversal


def iter_nodes(t):
    """Preorder (path, node) pairs; a path is (root index, child index, ...)."""
    stack = [((i,), r) for i, r in reversed(list(enumerate(t.roots)))]
    while stack:
        path, n = stack.pop()
        yield path, n
        if isinstance(n, Node):
            for j in range(len(n.children) - 1, -1, -1):
                stack.append((path + (j,), n.children[j]))


def ports(t):
    return [n for _, n in iter_nodes(t) if isinstance(n, Port)]


def port_paths(t):
    return {n.name: p for p, n in iter_nodes(t) if isinstance(n, Port)}


def has_box(t):
    return any(n is BOX or isinstance(n, Box) for _, n in iter_nodes(t))


def size(t):
    return sum(1 for _ in iter_nodes(t))


def interior_count(t, skip_neutral=True):
    return sum(1 for _, n in iter_nodes(t)
               if isinstance(n, Node) and not (skip_neutral and n.label == NEUTRAL))


def get_node(t, path):
    try:
        n = t.roots[path[0]]
        for j in path[1:]:
            n = n.children[j]
    except (IndexError, AttributeError, TypeError):
        raise TermError(f"unresolved node reference {path!r}") from None
    return n


def _splice(nodes, path, repl):
    i = path[0]
    if i >= len(nodes):
        raise TermError(f"unresolved node reference {path!r}")
    if len(path) == 1:
        return nodes[:i] + tuple(repl) + nodes[i + 1:]
    n = nodes[i]
    if not isinstance(n, Node):
        raise TermError(f"unresolved node reference {path!r}")
    kids = _splice(n.children, path[1:], repl)
    return nodes[:i] + (Node(n.label, kids),) + nodes[i + 1:]


def splice(t, path, repl):
    """Replace the node at path by the node sequence repl."""
    return Term(_splice(t.roots, path, repl))


def delta(t, x):
    n = get_node(t, x)
    return Term(n.children if isinstance(n, Node) else ())


def delta_plus(t, x):
    return Term((get_node(t, x),))


def nabla(t, x):
    get_node(t, x)
    if has_box(t):
        raise TermError("term already has a box port")
    return splice(t, x, (BOX,))


def box_path(t):
    for p, n in iter_nodes(t):
        if isinstance(n, Box):
            return p
    return None


def _map_ports(nodes, fn):
    out = []
    for n in nodes:
        if isinstance(n, Port):
            r = fn(n)
            if r is None:
                out.append(n)
            else:
                out.extend(r)
        elif isinstance(n, Node) and n.children:
            out.append(Node(n.label, tuple(_map_ports(n.children, fn))))
        else:
            out.append(n)
    return tuple(out)


def map_ports(t, fn):
    """Rebuild t, replacing each port p by the node sequence fn(p) (None keeps p)."""
    return Term(_map_ports(t.roots, fn))


def rename_ports(t, mapping):
    def fn(p):
        new = mapping.get(p.name, p.name)
        if new == p.name:
            return None
        return (Port(new, p.labels or (p.name,)),)
    return map_ports(t, fn)


def _fresh(name, used):
    cand, k = name, 0
    while cand in used:
        k += 1
        cand = f"{name}_{k}"
    return cand


def insert_context(s, t):
    """s·t: the box of s replaced by (a copy of) t."""
    bp = box_path(s)
    if bp is None:
        raise TermError("insert_context needs a box port")
    used = {p.name for p in ports(s)}
    mapping = {}
    for p in ports(t):
        if p.name in used:
            mapping[p.name] = _fresh(p.name, used | set(mapping.values()))
    if mapping:
        t = rename_ports(t, mapping)
    return splice(s, bp, t.roots)


def insert_at_ports(m1, Z, chooser, fresh=True):
    """At each port x of m1 named in Z put e(chooser(x)).

    With several insertions the k-th copy gets suffix k on its port names.
    """
    if isinstance(chooser, Mapping):
        chooser = chooser.__getitem__
    elif isinstance(chooser, Term):
        const = chooser
        chooser = lambda _n: const
    Z = set(Z)
    targets = [p.name for p in ports(m1) if p.name in Z]
    if not targets:
        raise TermError("no port of the term lies in Z")
    used = {p.name for p in ports(m1) if p.name not in Z}
    multi = len(targets) > 1
    repl = {}
    for k, name in enumerate(targets, 1):
        sub = chooser(name)
        if has_box(sub):
            raise TermError("cannot insert a context at a port")
        mapping = {}
        for q in ports(sub):
            cand = f"{q.name}{k}" if multi else q.name
            if cand in used:
                if not fresh:
                    raise TermError(f"port name collision on {cand!r}")
                cand = _fresh(cand, used)
            mapping[q.name] = cand
            used.add(cand)
        repl[name] = (Node(NEUTRAL, rename_ports(sub, mapping).roots),)
    return map_ports(m1, lambda p: repl.get(p.name))


def z_key(ms, Z):
    """The single input key carried by the Z ports; checks Z is its full preimage."""
    Z = set(Z)
    keys = {p.key for m in ms for p in ports(m) if p.name in Z}
    if len(keys) != 1:
        raise TermError(f"Z must name ports of exactly one input label, got {sorted(map(str, keys))}")
    key = keys.pop()
    for m in ms:
        for p in ports(m):
            if p.key == key and p.name not in Z:
                raise TermError(f"Z is not the full preimage of {key!r}: {p.name} missing")
    return key


def pump(M, Z, theta):
    """M^(theta,Z): theta-fold insertion of the family M into itself at Z."""
    M = list(dict.fromkeys(M))
    if theta < 1:
        raise ValueError("theta must be positive")
    key = z_key(M, Z)
    cur = list(M)
    for _ in range(theta - 1):
        nxt = []
        for m in cur:
            zs = [p.name for p in ports(m) if p.key == key]
            if not zs:
                nxt.append(m)
                continue
            for choice in itertools.product(M, repeat=len(zs)):
                nxt.append(insert_at_ports(m, zs, dict(zip(zs, choice))))
        cur = list(dict.fromkeys(nxt))
    return frozenset(cur)


def circuit_insert(M, S):
    """M·S: every port x of every component replaced by e(S[key(x)])."""
    out = {}
    for c, m in M.items():
        ps = ports(m)
        if not ps:
            out[c] = m
            continue
        missing = [p.key for p in ps if p.key not in S]
        if missing:
            raise KeyError(f"no entry for input key {missing[0]!r}")
        keys = {p.name: p.key for p in ps}
        out[c] = insert_at_ports(m, keys, lambda nm: S[keys[nm]])
    return out


def leaf_completion(m, chi):
    """Each port x becomes a one-node leaf labelled chi(x); the box stays."""
    get = chi.__getitem__ if isinstance(chi, Mapping) else chi

    def fn(p):
        try:
            return (Node(get(p.name), ()),)
        except KeyError:
            raise TermError(f"no completion value for port {p.name!r}") from None
    return map_ports(m, fn)


def erase_ports(t, keep=()):
    """Replace every port not in keep by a leaf labelled with the neutral letter."""
    keep = set(keep)
    return map_ports(t, lambda p: None if p.name in keep else (Node(NEUTRAL, ()),))


def contract_neutral(t):
    """Remove e-nodes, splicing their children in place (e acts as identity)."""
    def go(nodes):
        out = []
        for n in nodes:
            if isinstance(n, Node):
                kids = go(n.children)
                if n.label == NEUTRAL:
                    out.extend(kids)
                else:
                    out.append(Node(n.label, tuple(kids)))
            else:
                out.append(n)
        return out
    return Term(tuple(go(t.roots)))


def labels_of(t):
    return {n.label for _, n in iter_nodes(t) if isinstance(n, Node)}


def is_context(t):
    return has_box(t)


def nodes_list(t) -> list:
    return list(iter_nodes(t))


def as_term(x, alphabet=None):
    if isinstance(x, Term):
        return x
    return parse_term(x, alphabet)


def union_alphabet(terms: Iterable[Term]):
    out = {NEUTRAL}
    for t in terms:
        out |= {l for l in labels_of(t) if isinstance(l, str)}
    return out
