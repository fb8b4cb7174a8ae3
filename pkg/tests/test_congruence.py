import itertools
from collections import Counter, defaultdict

import pytest
from hypothesis import given, settings, strategies as st

from fab.algebra import counter_monoid, od_hom, trivial_algebra, Homomorphism
from fab.congruence import (SignatureError, TauPi, cmp_tau_pi, enumerate_forests, equiv_n,
                            idempotent_power, mat_mul, refinement_falsify, signature)
from fab.fixtures import get_fixture
from fab.terms import (BOX, Box, Node, Port, Term, insert_context, iter_nodes, nabla,
                       parse_term)

from conftest import contexts, forests, shuffle

P = parse_term


# ------------------------------------------------------ brute-force oracle
#
# Straight from the recursive definition: terms are rebuilt explicitly for
# every Δ and ∇, holes are named leaves, nothing is memoised.


def _to_oracle(nodes):
    out = []
    for n in nodes:
        if isinstance(n, Node):
            kids = _to_oracle(n.children)
            if n.label == "e":
                out.extend(kids)
            else:
                out.append(("n", n.label, tuple(kids)))
        elif isinstance(n, Port):
            out.append(("n", ("?", n.key), ()))
        else:
            out.append(("h", 0))
    return tuple(out)


def _walk(forest):
    """(node, replace-with) pairs for every interior node, preorder."""
    for i, n in enumerate(forest):
        if n[0] != "n":
            continue
        yield n, lambda r, i=i: forest[:i] + (r,) + forest[i + 1:]
        for sub, put in _walk(n[2]):
            yield sub, lambda r, put=put, i=i, n=n: forest[:i] + (("n", n[1], put(r)),) + forest[i + 1:]


def _holes(forest):
    out = []
    for n in forest:
        if n[0] == "h":
            out.append(n[1])
        else:
            out += _holes(n[2])
    return sorted(out)


def _labels(forest):
    c = Counter()
    for n in forest:
        if n[0] == "n":
            c[n[1]] += 1
            c.update(_labels(n[2]))
    return c


def oracle_key(forest, n, c):
    cap = lambda cnt: frozenset((k, c.canon(v)) for k, v in cnt.items() if v)
    if n == 1:
        return (1, tuple(_holes(forest)), cap(_labels(forest)))
    rel = Counter()
    for node, put in _walk(forest):
        d = oracle_key(node[2], n - 1, c)
        u = oracle_key(put(("h", n - 1)), n - 1, c)
        rel[(node[1], tuple(_holes(node[2])), d, u)] += 1
    return (n, oracle_key(forest, n - 1, c), cap(rel))


def oracle_equiv(s, t, n, c):
    c = TauPi(*c)
    return oracle_key(_to_oracle(s.roots), n, c) == oracle_key(_to_oracle(t.roots), n, c)


def _small(letters, max_size):
    out = []
    for k in range(1, max_size + 1):
        out += enumerate_forests(letters, k)
    return out


def _partition(items, key):
    blocks = defaultdict(list)
    for i, x in enumerate(items):
        blocks[key(x)].append(i)
    return sorted(sorted(b) for b in blocks.values())


@pytest.mark.parametrize("n,tau,pi,size", [(1, 1, 1, 5), (2, 1, 1, 5), (3, 1, 1, 4),
                                           (2, 2, 1, 5), (2, 1, 2, 5), (3, 2, 1, 4)])
def test_signature_matches_oracle_on_forests(n, tau, pi, size):
    fs = _small(("a", "b"), size)
    got = _partition(fs, lambda t: signature(t, n, (tau, pi)))
    want = _partition(fs, lambda t: oracle_key(_to_oracle(t.roots), n, TauPi(tau, pi)))
    assert got == want


@pytest.mark.parametrize("n", [1, 2, 3])
def test_signature_matches_oracle_on_contexts(n):
    cs = [nabla(t, p) for t in _small(("a", "b"), 4) for p, _ in iter_nodes(t)]
    got = _partition(cs, lambda t: signature(t, n, (1, 1)))
    want = _partition(cs, lambda t: oracle_key(_to_oracle(t.roots), n, TauPi(1, 1)))
    assert got == want


@settings(max_examples=120)
@given(forests("ab", 2, 6), forests("ab", 2, 6), st.integers(1, 3))
def test_signature_matches_oracle_random(s, t, n):
    assert equiv_n(s, t, n, (1, 1)) == oracle_equiv(s, t, n, (1, 1))


# ------------------------------------------------------------ anchors


def test_context_anchor():
    assert equiv_n(P("a+_"), P("a_"), 1, (1, 1))
    assert not equiv_n(P("a+_"), P("a_"), 2, (1, 1))
    assert oracle_equiv(P("a+_"), P("a_"), 1, (1, 1))
    assert not oracle_equiv(P("a+_"), P("a_"), 2, (1, 1))


def test_depth_versus_width():
    assert equiv_n(P("a(a)"), P("a+a"), 1, (2, 1))
    assert not equiv_n(P("a(a)"), P("a+a"), 2, (2, 1))
    assert oracle_equiv(P("a(a)"), P("a+a"), 1, (2, 1))
    assert not oracle_equiv(P("a(a)"), P("a+a"), 2, (2, 1))


def test_signature_deterministic_and_digest():
    t = P("a(b+c(a))+b")
    s1, s2 = signature(t, 3, (2, 1)), signature(t, 3, (2, 1))
    assert s1 is s2 and s1.digest() == s2.digest()
    assert s1.project(1) is signature(t, 1, (2, 1))
    assert s1.kind == "forest" and signature(P("a_"), 2).kind == "context"


def test_neutral_nodes_are_invisible():
    assert equiv_n(P("a(e(b)+e)"), P("a(b)"), 3, (1, 1))


def test_extension_errors():
    with pytest.raises(SignatureError):
        signature(P("a(?x:h)"), 1, extensions={"k": "b"})
    assert equiv_n(P("a(?x:h)"), P("a(b)"), 2, extensions={"h": "b"})


@given(forests("abc", 3, 10), st.randoms(use_true_random=False), st.integers(1, 3))
def test_sibling_order_blind(t, rnd, n):
    assert equiv_n(t, shuffle(t, rnd), n, (2, 1))


# --------------------------------------------------------- properties


@pytest.mark.parametrize("n,size", [(1, 8), (2, 6)])
def test_downward_compatibility_exhaustive(n, size):
    fs = _small(("∧", "∨"), size)
    for c in ((1, 1), (2, 1)):
        sig = [signature(t, n + 1, c) for t in fs]
        low = [signature(t, n, c) for t in fs]
        block_of = {}
        for s, lo in zip(sig, low):
            assert block_of.setdefault(s, lo) is lo
            assert s.project(n) is lo


def _buckets(n, c, size=6):
    by = defaultdict(list)
    for t in _small(("a", "b"), size):
        by[signature(t, n, c)].append(t)
    return [b for b in by.values() if len(b) > 1]


_BUCKETS = {}


@settings(max_examples=120)
@given(st.sampled_from([(1, (1, 1)), (2, (1, 1)), (2, (2, 1))]), st.data())
def test_congruence_property(params, data):
    n, c = params
    if params not in _BUCKETS:
        _BUCKETS[params] = _buckets(n, c)
    bucket = data.draw(st.sampled_from(_BUCKETS[params]))
    s, t = data.draw(st.permutations(bucket))[:2]
    p = data.draw(contexts("ab", 5))
    assert equiv_n(s, t, n, c)
    assert equiv_n(insert_context(p, s), insert_context(p, t), n, c)
    # sums are covered by the context p+_
    q = data.draw(forests("ab", 2, 4))
    assert equiv_n(q + s, q + t, n, c)


@pytest.mark.parametrize("tau", [1, 2, 3])
def test_level_one_injective_below_threshold(tau):
    fs = _small(("a", "b"), tau)
    seen = {}
    for t in fs:
        labels = frozenset(Counter(n.label for _, n in iter_nodes(t)).items())
        s = signature(t, 1, (tau, 1))
        assert seen.setdefault(s, labels) == labels
    assert len(seen) == len({frozenset(Counter(n.label for _, n in iter_nodes(t)).items())
                             for t in fs})


# ------------------------------------------------------------ cmp_tau_pi


def test_cmp_examples():
    assert cmp_tau_pi(2, 5, (2, 1))
    assert cmp_tau_pi(1, 3, (1, 2))
    assert not cmp_tau_pi(1, 2, (1, 2))
    assert cmp_tau_pi(0, 0, (4, 3))


@pytest.mark.parametrize("tau,pi", [(t, p) for t in range(6) for p in range(1, 7) if t + p <= 6])
def test_cmp_congruence_exhaustive(tau, pi):
    c = (tau, pi)
    R = range(3 * (tau + pi) + 1)
    for p in R:
        assert cmp_tau_pi(p, p, c)
        for q in R:
            assert cmp_tau_pi(p, q, c) == cmp_tau_pi(q, p, c)
            if not cmp_tau_pi(p, q, c):
                continue
            for r in R:
                if cmp_tau_pi(q, r, c):
                    assert cmp_tau_pi(p, r, c)
                assert cmp_tau_pi(p + r, q + r, c)


# ------------------------------------------------------------ falsify


def test_refinement_falsify_boolean():
    phi = get_fixture("boolean").hom
    s, t = refinement_falsify(phi, 1, (1, 1), 6)
    assert equiv_n(s, t, 1, (1, 1)) and phi(s) != phi(t)
    s, t = refinement_falsify(phi, 2, (1, 1), 10)
    assert equiv_n(s, t, 2, (1, 1)) and phi(s) != phi(t)


def test_refinement_falsify_exhausted():
    triv = Homomorphism(trivial_algebra(), {"a": (0,), "b": (0,)})
    assert refinement_falsify(triv, 1, (1, 1), 6) is None
    od = od_hom(counter_monoid(1, 1), {"a": "1", "b": "0"})
    assert refinement_falsify(od, 1, (1, 1), 7) is None


# ---------------------------------------------------------- matrices


def naive_mul(A, B, c):
    c = TauPi(*c)
    n, m = len(A), len(B[0])
    return tuple(tuple(c.canon(sum(A[i][k] * B[k][j] for k in range(len(B)))) for j in range(m))
                 for i in range(n))


def test_idempotent_power_examples():
    assert idempotent_power([[1]], (1, 1)) == (1, ((1,),))
    w, Aw = idempotent_power([[0, 1], [1, 0]], (2, 1))
    assert w == 2 and Aw == ((1, 0), (0, 1))
    assert idempotent_power([[2, 2], [2, 2]], (2, 1))[0] == 1
    with pytest.raises(ValueError):
        mat_mul(((1, 0),), ((1, 0),), (1, 1))


@given(st.integers(1, 3).flatmap(lambda n: st.lists(st.lists(st.integers(0, 3), min_size=n, max_size=n),
                                                    min_size=n, max_size=n)),
       st.sampled_from([(1, 1), (2, 1), (3, 1), (1, 2)]))
def test_idempotent_power_oracle(A, c):
    A = tuple(tuple(TauPi(*c).canon(x) for x in row) for row in A)
    w, Aw = idempotent_power(A, c)
    pw = A
    for _ in range(w - 1):
        pw = naive_mul(pw, A, c)
    assert pw == Aw
    sq = Aw
    for _ in range(w):
        sq = naive_mul(sq, A, c)
    assert sq == Aw
    # no smaller exponent is idempotent
    p = A
    for k in range(1, w):
        q = p
        for _ in range(k):
            q = naive_mul(q, A, c)
        assert q != p
        p = naive_mul(p, A, c)
    assert mat_mul(A, A, c) == naive_mul(A, A, c)
