import itertools

import pytest
from hypothesis import given, settings, strategies as st

from fab.algebra import Homomorphism, trivial_algebra
from fab.congruence import signature
from fab.fixtures import (AND, BULLET, CAP, DOT, MINUS, OR, SCAP, boolean_seeds, boundary_forest,
                          boundary_tuples, duplex_circuit, duplex_seed_trees, fig1_circuit,
                          get_fixture, m_family, potthoff_witnesses)
from fab.proofsearch import (ProofError, Tuple, base_tuple, build_pumped_subcircuit,
                             build_witnesses, consistent_pump, counters, pump_structure_key,
                             rc_verify, search_copy, star, verify_witnesses, zpart)
from fab.terms import Node, Port, Term, iter_nodes, parse_term, ports, rename_ports

from conftest import forests, shuffle

B = get_fixture("boolean")


def with_mu(M, S0, n, c):
    """Circuit tuples labelled by the level-n signatures of their witnesses."""
    Sn = build_witnesses(M, S0, n).forests
    out = {}
    for key, t in M.items():
        mu = {p.name: signature(Sn[(p.key, t.psi[p.name])], n, c) for p in ports(t.m)}
        out[key] = Tuple(t.m, t.psi, mu)
    return out


def pairs(M):
    for (k1, t1), (k2, t2) in itertools.combinations(sorted(M.items(), key=str), 2):
        if k1[0] == k2[0]:
            yield t1, t2


# ----------------------------------------------------------- counters


def test_boolean_circuit_counters():
    M = fig1_circuit(B)
    t0, t1 = M[("J", B.el("00"))], M[("J", B.el("11"))]
    P0, P1 = counters(t0), counters(t1)
    assert len({k[0] for k in P0}) == 1
    assert sorted(P0.values()) == [2, 2]
    assert {k[2] for k in P0} == {B.el("00"), B.el("11")}
    assert P0 == P1
    assert counters(Tuple(parse_term("a"), {})) == {}


@pytest.mark.parametrize("tau", [1, 2, 3])
def test_boolean_circuit_star_exact(tau):
    M = fig1_circuit(B)
    t0, t1 = M[("J", B.el("00"))], M[("J", B.el("11"))]
    assert star(t0, t0, "exact", (tau, 1))
    assert star(t0, t1, "exact", (tau, 1))


def test_star_detects_count_difference():
    M = fig1_circuit(B)
    t0 = M[("J", B.el("00"))]
    t2 = Tuple(t0.m, dict(t0.psi, x3=B.el("00")))
    assert not star(t0, t2, "exact", (2, 1))
    # three versus two is invisible at threshold 1 ... but the 11 count drops to 1
    assert star(t0, t2, "exact", (1, 1))


@st.composite
def boolean_tuples(draw):
    f = draw(forests([AND, OR], 2, 7))
    count = [0]

    def go(n):
        if not n.children and draw(st.booleans()):
            count[0] += 1
            return Port(f"x{count[0]}", ("J",))
        return Node(n.label, tuple(go(c) for c in n.children))
    m = Term(tuple(go(r) for r in f.roots))
    names = [p.name for p in ports(m)]
    psi = {x: draw(st.sampled_from([B.el("00"), B.el("11")])) for x in names}
    mu = {x: draw(st.sampled_from(["u", "v"])) for x in names}
    return Tuple(m, psi, mu)


@settings(max_examples=150)
@given(boolean_tuples(), st.randoms(use_true_random=False))
def test_counters_invariant(t, rnd):
    names = list(t.psi)
    new = [f"y{i}" for i in range(len(names))]
    rnd.shuffle(new)
    ren = dict(zip(names, new))
    m2 = shuffle(rename_ports(t.m, ren), rnd)
    t2 = Tuple(m2, {ren[x]: v for x, v in t.psi.items()}, {ren[x]: v for x, v in t.mu.items()})
    assert counters(t) == counters(t2)
    for n in (1, 2):
        assert counters(t, ("signature", n)) == counters(t2, ("signature", n))
    assert star(t, t2, "exact", (1, 1))
    assert star(t, t2, ("signature", 2), (1, 1))


def test_counters_need_psi():
    with pytest.raises(ProofError):
        counters(Tuple(parse_term("a(?x)"), {}))


# ---------------------------------------------- boundary example (RC scope)


def test_boundary_example():
    fx = get_fixture("boundary")
    t, t2 = boundary_tuples(fx)
    assert star(t, t2, ("signature", 2), (2, 1))
    v, v2 = fx.hom(boundary_forest(t, fx)), fx.hom(boundary_forest(t2, fx))
    assert v != v2
    assert (v in fx.accepting) != (v2 in fx.accepting)
    assert t.value(fx.hom) == v and t2.value(fx.hom) == v2


# --------------------------------------------------------- witnesses


@pytest.mark.parametrize("n", [1, 2, 3])
def test_boolean_witnesses(n):
    W = build_witnesses(fig1_circuit(B), boolean_seeds(B), n)
    assert {B.hom(s) for s in W.forests.values()} == {B.el("00"), B.el("11")}
    assert verify_witnesses(W, B.hom, n, (1, 1)) == []
    assert len(W.trace) == n + 1


def test_boolean_witness_sizes():
    W = build_witnesses(fig1_circuit(B), boolean_seeds(B), 3)
    assert max(W.trace[-1].values()) <= 220


def test_build_witnesses_zero():
    S0 = boolean_seeds(B)
    assert build_witnesses(fig1_circuit(B), S0, 0).forests == S0


def test_duplex_witnesses():
    fx = get_fixture("duplex")
    W = build_witnesses(duplex_circuit(fx), duplex_seed_trees(fx), 1)
    assert len(W.forests) == 4
    for (cls, j), s in W.forests.items():
        assert s.roots[0].label == (CAP if cls == MINUS else SCAP)
        assert fx.hom(s) == j
    assert verify_witnesses(W, fx.hom, 1, (1, 1)) == []


def test_verify_witnesses_flags_counts():
    S = {("J", B.el("00")): parse_term("∨", B.alphabet),
         ("J", B.el("11")): parse_term("∧(∧(∧))", B.alphabet)}
    viol = verify_witnesses(S, B.hom, 1, (50, 1))
    assert any("level 1" in v for v in viol)


def test_verify_witnesses_flags_images():
    S = {("J", B.el("00")): parse_term("∧", B.alphabet)}
    assert verify_witnesses(S, B.hom, 1) == ["image of witness J/00 is 11"]


@pytest.mark.parametrize("theta,k", [(1, 1), (2, 1), (3, 1), (2, 2)])
def test_potthoff_witness_pairs(theta, k):
    fx = get_fixture("potthoff")
    S = potthoff_witnesses(theta, k, fx)
    assert len(S) == 2
    assert verify_witnesses(S, fx.hom, 1, (1, 1)) == []


# ---------------------------------------------------------- rc_verify


@pytest.mark.parametrize("n", [1, 2])
def test_rc_verify_boolean(n):
    assert rc_verify(fig1_circuit(B), boolean_seeds(B), n, B.hom, (1, 1)) == []


def test_rc_verify_counter_violation():
    M = fig1_circuit(B)
    t1 = M[("J", B.el("11"))]
    M[("J", B.el("11"))] = Tuple(t1.m, dict(t1.psi, x1=B.el("11")))
    viol = rc_verify(M, boolean_seeds(B), 1, B.hom, (2, 1))
    assert any(v.startswith("counters") for v in viol)


def test_rc_verify_inconsistent_tuple():
    M = fig1_circuit(B)
    t0 = M[("J", B.el("00"))]
    M[("J", B.el("00"))] = Tuple(t0.m, dict(t0.psi, x1=B.el("10")))
    with pytest.raises(ProofError, match="x1"):
        rc_verify(M, boolean_seeds(B), 1, B.hom, (1, 1))


def test_rc_verify_duplex():
    fx = get_fixture("duplex")
    assert rc_verify(duplex_circuit(fx), duplex_seed_trees(fx), 1, fx.hom, (1, 1)) == []


@pytest.mark.parametrize("name,n", [("boolean", 2), ("duplex", 1)])
def test_rc_implies_witnesses_up_to_next_level(name, n):
    if name == "boolean":
        phi, M, S0 = B.hom, fig1_circuit(B), boolean_seeds(B)
    else:
        fx = get_fixture("duplex")
        phi, M, S0 = fx.hom, duplex_circuit(fx), duplex_seed_trees(fx)
    assert rc_verify(M, S0, n, phi, (1, 1)) == []
    for k in range(1, n + 2):
        assert verify_witnesses(build_witnesses(M, S0, k), phi, k, (1, 1)) == []


def _fixture_circuits():
    fx = get_fixture("duplex")
    yield "boolean", B.hom, fig1_circuit(B), boolean_seeds(B)
    yield "duplex", fx.hom, duplex_circuit(fx), duplex_seed_trees(fx)
    found = search_copy(B.hom, B.sets["J"], (2, 1), 7)
    yield "search", B.hom, found, boolean_seeds(B)


@pytest.mark.parametrize("n", [1, 2])
def test_exact_star_implies_signature_star(n):
    checked = 0
    for name, phi, M, S0 in _fixture_circuits():
        if name == "duplex" and n == 2:
            continue
        for c in ((1, 1), (2, 1)):
            Mu = with_mu(M, S0, n, c)
            for t1, t2 in pairs(Mu):
                if star(t1, t2, "exact", c):
                    assert star(t1, t2, ("signature", n), c)
                    checked += 1
    assert checked >= 4


# --------------------------------------------------------- copy search


def test_search_copy_boolean():
    found = search_copy(B.hom, B.sets["J"], (2, 1), 7)
    assert found is not None
    assert {j for _, j in found} == {B.el("00"), B.el("11")}
    for n in (1, 2):
        assert rc_verify(found, boolean_seeds(B), n, B.hom, (2, 1)) == []
    again = search_copy(B.hom, B.sets["J"], (2, 1), 7)
    assert {k: (t.m, t.psi) for k, t in again.items()} == {k: (t.m, t.psi) for k, t in found.items()}


def test_search_copy_trivial_and_non_scc():
    triv = Homomorphism(trivial_algebra(), {"a": (0,)})
    assert search_copy(triv, {0}, (1, 1), 5) is None
    # 00 and 10 are not strongly connected
    assert search_copy(B.hom, {B.el("00"), B.el("10")}, (1, 1), 5) is None


@pytest.mark.slow
def test_search_copy_even_depth_exhausted():
    fx = get_fixture("even-depth")
    assert search_copy(fx.hom, fx.sets["J"], (2, 1), 6) is None


# ------------------------------------------------------ pumped circuits


def test_pumped_single_chain():
    m = parse_term("a(?z:z)")
    top = {0: base_tuple(m, {"z": 0}, "z")}
    chi, tau = 2, 1
    r = build_pumped_subcircuit(top, chi, (tau, 1))
    assert r.A == ((1,),) and r.omega == 1 and r.eta == tau + chi
    chain = sum(1 for _, n in iter_nodes(r.tuples[0].m) if isinstance(n, Node) and n.label == "a")
    # χ copies from step i, the T copy from step ii, η copies from step iii
    assert chain == chi + 1 + r.eta
    assert r.post_ok


def test_pumped_requires_period_one():
    m = parse_term("a(?z:z)")
    with pytest.raises(ProofError):
        build_pumped_subcircuit({0: base_tuple(m, {"z": 0}, "z")}, 2, (1, 2))


def _even_depth_pumped(chi=2, tau=1):
    fx = get_fixture("even-depth")
    e, o = fx.el("e"), fx.el("o")
    m = m_family(1)
    top = {e: base_tuple(m, {p.name: o for p in ports(m)}, "z"),
           o: base_tuple(m, {p.name: e for p in ports(m)}, "z")}
    T = {e: consistent_pump(top, e, 2), o: consistent_pump(top, o, 1)}
    return fx, top, build_pumped_subcircuit(T, chi, (tau, 1), top=top)


def test_even_depth_pumped_subcircuit():
    fx, top, r = _even_depth_pumped()
    e, o = fx.el("e"), fx.el("o")
    assert r.A == ((0, 2), (2, 0))
    assert r.omega == 2 and r.eta == 4
    assert r.post_ok
    assert r.tuples[e].value(fx.hom) == e and r.tuples[o].value(fx.hom) == o
    assert star(r.tuples[e], r.tuples[o], ("pumped", 2, 1), (1, 1))
    Pe = zpart(counters(r.tuples[e], ("pumped", 2, 1)), "z")
    Po = zpart(counters(r.tuples[o], ("pumped", 2, 1)), "z")
    assert set(Pe) == set(Po)


def test_pumped_structure_key_caps_depth():
    fx = get_fixture("even-depth")
    e, o = fx.el("e"), fx.el("o")
    m = m_family(1)
    top = {e: base_tuple(m, {p.name: o for p in ports(m)}, "z"),
           o: base_tuple(m, {p.name: e for p in ports(m)}, "z")}
    key = lambda k, s, r: pump_structure_key(consistent_pump(top, e, k), s, r)
    assert key(1, 2, 1) != key(2, 2, 1)
    assert key(2, 2, 1) == key(3, 2, 1) == key(5, 2, 1)
    # with period 2 the parity survives the cap
    assert key(2, 2, 2) != key(3, 2, 2)
    assert key(2, 2, 2) == key(4, 2, 2)
