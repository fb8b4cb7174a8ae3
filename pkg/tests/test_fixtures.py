import os

import pytest

from fab.algebra import monoid_aperiodic, validate_algebra
from fab.fixtures import (AND, BULLET, DOTEQ, FIXTURES, OR, TRI, ZIGZAG_M, boolean_seeds,
                          duplex_circuit, duplex_seed_trees, fig1_circuit, get_fixture,
                          golden_checks, m_family, p_family, potthoff_t, restricted_vertical)
from fab.formats import read_fa, write_fa
from fab.terms import insert_at_ports, iter_nodes, leaf_completion, ports

CORPUS = os.path.join(os.path.dirname(__file__), os.pardir, "src", "fab", "corpus")


def test_golden_checks_all_pass():
    res = golden_checks("all")
    assert len(res) >= 20
    assert [(n, w) for n, w, ok in res if not ok] == []


def test_golden_checks_single_fixture():
    assert {n for n, _, _ in golden_checks("zigzag")} == {"zigzag"}


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_fixture_validates(name):
    assert validate_algebra(get_fixture(name).algebra) == []


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_corpus_parses_back(name):
    fx = get_fixture(name)
    with open(os.path.join(CORPUS, f"{name}.fa"), encoding="utf-8") as f:
        text = f.read()
    assert text == write_fa(fx.hom, fx.accepting, fx.sets, name=name)
    phi, acc, sets = read_fa(text)
    H = fx.H
    assert phi.algebra.H.names == H.names
    assert [list(r) for r in phi.algebra.H.table] == [list(r) for r in H.table]
    assert {a: tuple(v) for a, v in phi.letters.items() if a in fx.hom.letters} == \
        {a: tuple(v) for a, v in fx.hom.letters.items() if a in phi.letters}
    assert acc == fx.accepting and sets == dict(fx.sets)


def test_unknown_fixture():
    with pytest.raises(KeyError):
        get_fixture("nope")


# ------------------------------------------------------------ Boolean


def test_boolean_tables():
    B = get_fixture("boolean")
    assert B.hom(B.parse(AND)) == B.el("11")
    assert B.hom(B.parse(OR)) == B.el("00")
    for x in range(len(B.H)):
        assert B.H.add(B.el("10"), x) == x
        assert B.H.add(B.el("01"), x) == B.el("01")


def test_boolean_circuit_values():
    B = get_fixture("boolean")
    M = fig1_circuit(B)
    S0 = boolean_seeds(B)
    for (J, j), t in M.items():
        assert t.value(B.hom) == j
        filled = insert_at_ports(t.m, list(t.psi), {x: S0[("J", v)] for x, v in t.psi.items()})
        assert B.hom(filled) == j
    assert monoid_aperiodic(B.algebra.V)[0]


# ------------------------------------------------------------- duplex


def test_duplex_seeds_and_circuit():
    fx = get_fixture("duplex")
    seeds = duplex_seed_trees(fx)
    assert len(seeds) == 4 and len({cls for cls, _ in seeds}) == 2
    for (cls, j), s in seeds.items():
        assert fx.hom(s) == j
    M = duplex_circuit(fx)
    assert len(M) == 4
    for (cls, j), t in M.items():
        assert t.value(fx.hom) == j
        # four sons under the root, four ports each
        assert len(t.m.roots) == 1 and len(t.m.roots[0].children) == 4
        assert len(ports(t.m)) == 16


def test_duplex_mismatch_is_absorbing():
    fx = get_fixture("duplex")
    t = fx.parse("∩(∪(0+1)+∪(0+0)+⊔(1+1)+⊔(1+1))")
    assert fx.hom(t) == fx.H.absorbing()


# --------------------------------------------------------- even depth


def test_even_depth_rules():
    fx = get_fixture("even-depth")
    H, el = fx.H, fx.el
    assert H.add(el("e"), el("e")) == el("ee")
    assert H.add(el("o"), el("o")) == el("oo")
    assert H.add(el("e"), el("o")) == el("inf")
    bullet = fx.hom.letters[BULLET]
    assert bullet[el("oo")] == el("e") and bullet[el("ee")] == el("o") and bullet[el("0")] == el("o")


def test_even_depth_vertical_counts():
    fx = get_fixture("even-depth")
    assert len(restricted_vertical(fx.hom, [fx.el("0")])) == 19
    assert len(fx.algebra.V) == 25
    assert monoid_aperiodic(fx.algebra.V)[0]


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_m_family_shape(d):
    m = m_family(d)
    assert len(ports(m)) == 2 ** d
    assert sum(1 for _ in iter_nodes(m)) == 2 ** d - 1 + 2 ** d
    fx = get_fixture("even-depth")
    # full binary tree of depth d + 1 has leaves at depth d + 1
    t = leaf_completion(m, lambda x: BULLET)
    assert (fx.hom(t) == fx.el("e")) == (d % 2 == 1)
    with pytest.raises(ValueError):
        m_family(0)


# ------------------------------------------------------------- zigzag


@pytest.mark.parametrize("text,out", [("a(0+0)", "T0"), ("a(1+1)", "T2"), ("a(2+2)", "inf"),
                                      ("a(2+0)", "inf"), ("b(2+2)", "T0"), ("b(0+0)", "T1"),
                                      ("0+1", "inf"), ("0+0", "S00")])
def test_zigzag_tables(text, out):
    fx = get_fixture("zigzag")
    assert fx.H.names[fx.hom(fx.parse(text))] == out


def test_zigzag_horizontal_carrier():
    fx = get_fixture("zigzag")
    assert sorted(fx.H.names) == sorted(["0", "inf", "T0", "T1", "T2", "S00", "S11", "S22"])


def test_zigzag_multicontext_fill():
    fx = get_fixture("zigzag")
    m = fx.parse(ZIGZAG_M)
    assert len(ports(m)) == 4
    # b(2+2) = T0 and b(0+0) = T1; a sends S00 to T0 and S11 to T2
    val = lambda v: fx.H.names[fx.hom(leaf_completion(m, lambda x: v))]
    assert val("2") == "T0"
    assert val("0") == "T2"
    assert val("1") == "inf"


# ----------------------------------------------------------- Potthoff


def test_potthoff_tables():
    fx = get_fixture("potthoff")
    v = lambda text: fx.H.names[fx.hom(fx.parse(text))]
    assert len(fx.H) == 10
    assert v(f"{TRI}(0+{DOTEQ}(0+1))") == "1^"
    assert v(f"{TRI}(1+{DOTEQ}(1+1))") == "0^"
    assert v(f"{DOTEQ}(0+1)") == "U0"
    assert v(f"{DOTEQ}(0+0)") == "U1"
    assert monoid_aperiodic(fx.algebra.V)[0]


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("theta", range(1, 7))
def test_p_family_parity(theta, k):
    fx = get_fixture("potthoff")
    p, q = p_family(theta, k, fx)
    want = lambda th: fx.el("0^" if th % 2 else "1^")
    assert p.value(fx.hom) == want(theta)
    assert q.value(fx.hom) == want(theta + 1)


def test_p_family_sizes_and_bounds():
    fx = get_fixture("potthoff")
    p1, _ = p_family(3, 1, fx)
    p2, _ = p_family(3, 2, fx)
    assert len(p1.psi) == 6
    assert len(p2.psi) > len(p1.psi)
    with pytest.raises(ValueError):
        p_family(10, 1, fx)
    with pytest.raises(ValueError):
        p_family(1, 4, fx)


def test_potthoff_t_ports():
    t = potthoff_t(3)
    assert sorted(p.key for p in ports(t)) == ["y"] * 6 + ["z"]
