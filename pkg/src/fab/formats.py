"""Line-oriented text formats: algebras (.fa), circuits (.fc), seed
families (.fs) and key:value reports.

An algebra file::

    name: boolean
    horizontal: 10 00 11 01
    identity: 10
    10 | 10 00 11 01
    00 | 00 00 01 01
    ...
    letters:
    ∧ = 11 00 11 11
    vertical-generators:
    g = ...
    accepting: 11
    sets:
    J = 00 11

Addition rows are ``x | x+h for h in order``; a letter or generator line
lists the images of the horizontal elements in order.  Circuits and seed
families are blocks headed ``[class element]`` followed by ``term:`` and,
for circuits, ``psi: port=element ...``.
"""
from __future__ import annotations

import re

from .algebra import FiniteMonoid, ForestAlgebra, Homomorphism, AlgebraError
from .proofsearch import Tuple
from .terms import format_term, parse_term, ports, NEUTRAL


class FormatError(ValueError):
    pass


# ----------------------------------------------------------------- algebra


def write_fa(phi, accepting=(), sets=None, name=None):
    H = phi.algebra.H
    nm = H.names
    out = [f"name: {name or phi.name or phi.algebra.name or 'algebra'}",
           "horizontal: " + " ".join(nm),
           f"identity: {nm[H.identity]}"]
    for a in range(len(H)):
        out.append(f"{nm[a]} | " + " ".join(nm[x] for x in H.table[a]))
    out.append("letters:")
    for a in sorted(phi.letters):
        if a == NEUTRAL:
            continue
        out.append(f"{a} = " + " ".join(nm[x] for x in phi.letters[a]))
    extra = [g for g in phi.algebra.gens if g not in set(phi.letters.values())]
    if extra:
        out.append("vertical-generators:")
        for i, g in enumerate(extra):
            out.append(f"g{i} = " + " ".join(nm[x] for x in g))
    out.append("accepting: " + " ".join(nm[x] for x in sorted(accepting)))
    if sets:
        out.append("sets:")
        for k in sorted(sets):
            out.append(f"{k} = " + " ".join(nm[x] for x in sorted(sets[k])))
    return "\n".join(out) + "\n"


def read_fa(text):
    """(Homomorphism, accepting set, named sets)."""
    name, names, ident = "", None, None
    rows, letters, gens, sets = {}, {}, {}, {}
    accepting = ()
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head = re.match(r"^(name|horizontal|identity|accepting):\s*(.*)$", line)
        if head:
            key, val = head.groups()
            # the identity line may sit between the header and the rows
            if key != "identity":
                section = None
            if key == "name":
                name = val
            elif key == "horizontal":
                names = val.split()
                section = "rows"
            elif key == "identity":
                ident = val
            else:
                accepting = tuple(val.split())
            continue
        if line in ("letters:", "vertical-generators:", "sets:"):
            section = line[:-1]
            continue
        if section == "rows" and "|" in line:
            x, rest = line.split("|", 1)
            rows[x.strip()] = rest.split()
        elif section in ("letters", "vertical-generators", "sets") and "=" in line:
            k, rest = line.split("=", 1)
            {"letters": letters, "vertical-generators": gens, "sets": sets}[section][k.strip()] = rest.split()
        else:
            raise FormatError(f"line {lineno}: cannot parse {raw!r}")
    if names is None:
        raise FormatError("missing horizontal: section")
    pos = {x: i for i, x in enumerate(names)}

    def idxs(vals, what, total=True):
        try:
            out = [pos[v] for v in vals]
        except KeyError as e:
            raise FormatError(f"{what}: unknown element {e.args[0]!r}") from None
        if total and len(out) != len(names):
            raise FormatError(f"{what}: expected {len(names)} entries, got {len(out)}")
        return out

    if set(rows) != set(names):
        missing = sorted(set(names) - set(rows))
        raise FormatError(f"addition table is not total (missing rows {missing})")
    table = [idxs(rows[x], f"row {x}") for x in names]
    try:
        M = FiniteMonoid(names, table, ident)
    except (AlgebraError, KeyError) as e:
        raise FormatError(str(e)) from None
    acts = {a: tuple(idxs(v, f"letter {a}")) for a, v in letters.items()}
    extra = [tuple(idxs(v, f"generator {g}")) for g, v in gens.items()]
    A = ForestAlgebra(M, list(acts.values()) + extra, name=name)
    phi = Homomorphism(A, acts, name=name)
    acc = frozenset(idxs(accepting, "accepting", total=False))
    named = {k: frozenset(idxs(v, f"set {k}", total=False)) for k, v in sets.items()}
    return phi, acc, named


# --------------------------------------------------------- circuits, seeds


def _blocks(text):
    out, cur = [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = re.match(r"^\[(\S+)\s+(\S+)\]$", line)
        if m:
            cur = {"key": m.groups(), "line": lineno}
            out.append(cur)
            continue
        m = re.match(r"^(algebra|term|psi):\s*(.*)$", line)
        if not m:
            raise FormatError(f"line {lineno}: cannot parse {raw!r}")
        k, v = m.groups()
        if k == "algebra":
            out.append({"algebra": v})
            continue
        if cur is None:
            raise FormatError(f"line {lineno}: {k}: outside a block")
        cur[k] = v
    return out


def _header(text):
    for b in _blocks(text):
        if "algebra" in b:
            return b["algebra"]
    return None


def read_fc(text, phi):
    H = phi.algebra.H
    out = {}
    for b in _blocks(text):
        if "key" not in b:
            continue
        J, j = b["key"]
        if "term" not in b:
            raise FormatError(f"block [{J} {j}] has no term")
        m = parse_term(b["term"], phi.alphabet)
        psi = {}
        for item in b.get("psi", "").split():
            x, _, v = item.partition("=")
            if v not in H.index:
                raise FormatError(f"block [{J} {j}]: unknown element {v!r}")
            psi[x] = H.index[v]
        missing = [p.name for p in ports(m) if p.name not in psi]
        if missing:
            raise FormatError(f"block [{J} {j}]: no psi for ports {missing}")
        out[(J, _el(H, j))] = Tuple(m, psi)
    return out


def _el(H, j):
    if j not in H.index:
        raise FormatError(f"unknown element {j!r}")
    return H.index[j]


def write_fc(circuit, phi, algebra=None):
    names = phi.algebra.H.names
    out = [f"algebra: {algebra}"] if algebra else []
    for (J, j), t in sorted(circuit.items(), key=lambda kv: (str(kv[0][0]), kv[0][1])):
        out += [f"[{J} {names[j]}]", f"term: {format_term(t.m)}",
                "psi: " + " ".join(f"{x}={names[v]}" for x, v in t.psi.items())]
    return "\n".join(out) + "\n"


def read_fs(text, phi):
    H = phi.algebra.H
    out = {}
    for b in _blocks(text):
        if "key" not in b:
            continue
        J, j = b["key"]
        if "term" not in b:
            raise FormatError(f"block [{J} {j}] has no term")
        out[(J, _el(H, j))] = parse_term(b["term"], phi.alphabet)
    return out


def write_fs(seeds, phi, algebra=None):
    names = phi.algebra.H.names
    out = [f"algebra: {algebra}"] if algebra else []
    for (J, j), s in sorted(seeds.items(), key=lambda kv: (str(kv[0][0]), kv[0][1])):
        out += [f"[{J} {names[j]}]", f"term: {format_term(s)}"]
    return "\n".join(out) + "\n"


algebra_of = _header


# ----------------------------------------------------------------- reports


OUTCOMES = ("found", "refuted", "holds", "violated", "exhausted")


def write_report(fields):
    """key: value lines; list values become key.0, key.1, ..."""
    out = []
    for k, v in fields.items():
        if isinstance(v, (list, tuple)):
            for i, x in enumerate(v):
                out.append(f"{k}.{i}: {_one_line(x)}")
        else:
            out.append(f"{k}: {_one_line(v)}")
    return "\n".join(out) + "\n"


def _one_line(v):
    s = format_term(v) if hasattr(v, "roots") else str(v)
    return s.replace("\n", " ")


def parse_report(text):
    out = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        k, sep, v = line.partition(": ")
        if not sep:
            k, sep, v = line.partition(":")
            if not sep:
                raise FormatError(f"not a report line: {line!r}")
        out[k.strip()] = v.strip()
    return out
