import os

from hypothesis import HealthCheck, settings, strategies as st

from fab.terms import BOX, Node, Port, Term

settings.register_profile("default", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("quick", max_examples=25, deadline=None)
settings.load_profile(os.environ.get("FAB_HYPOTHESIS_PROFILE", "default"))


def trees(letters, max_leaves=8):
    leaf = st.sampled_from(letters).map(lambda a: Node(a, ()))
    return st.recursive(
        leaf,
        lambda kids: st.builds(lambda a, cs: Node(a, tuple(cs)), st.sampled_from(letters),
                               st.lists(kids, min_size=1, max_size=3)),
        max_leaves=max_leaves)


def forests(letters, max_trees=3, max_leaves=8):
    return st.lists(trees(letters, max_leaves), max_size=max_trees).map(lambda ts: Term(tuple(ts)))


def _with_box(tree_list, i):
    """Put a box under the i-th node in preorder (as a new last child)."""
    count = [0]

    def go(n):
        k = count[0]
        count[0] += 1
        kids = tuple(go(c) for c in n.children)
        if k == i:
            kids = kids + (BOX,)
        return Node(n.label, kids)
    return tuple(go(n) for n in tree_list)


@st.composite
def contexts(draw, letters, max_leaves=6):
    f = draw(forests(letters, 2, max_leaves))
    nodes = sum(1 for _ in _preorder(f.roots))
    i = draw(st.integers(-1, nodes - 1))
    if i < 0:
        k = draw(st.integers(0, len(f.roots)))
        return Term(f.roots[:k] + (BOX,) + f.roots[k:])
    return Term(_with_box(f.roots, i))


def shuffle(t, rnd):
    def go(n):
        if isinstance(n, Node) and n.children:
            kids = [go(c) for c in n.children]
            rnd.shuffle(kids)
            return Node(n.label, tuple(kids))
        return n
    roots = [go(r) for r in t.roots]
    rnd.shuffle(roots)
    return Term(tuple(roots))


def _preorder(nodes):
    for n in nodes:
        yield n
        yield from _preorder(n.children)


# acceptance results are collected here and echoed at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
