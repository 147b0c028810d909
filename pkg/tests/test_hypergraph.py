import pytest
from hypothesis import given, settings, strategies as st

from signedq.errors import InvalidWitness, TooManyNegativeEdges, UnsafeHypergraph
from signedq.frontend import parse_query
from signedq.hypergraph import (
    DEFINITION_GUARD,
    Edge,
    SignedHypergraph,
    SignedLeafWitness,
    elimination_sequence,
    find_signed_leaves,
    is_alpha_acyclic,
    is_beta_leaf,
    is_free_connex,
    is_free_connex_definition,
    is_signed_acyclic_definition,
    is_signed_acyclic_greedy,
    reduce,
    remove_leaf,
    signed_cycle_witness,
    validate_witness,
)

RUNNING = "Q(x1, x2, x3, x4) :- A(x1, x2, x3), U(x3, x4), !V(x4), !R(x2, x3, x4), !S(x1, x2, x3, x4)."


def H(*edges):
    """Hypergraph from ``(sign, vertices)`` pairs; sign is '+' or '-'."""
    es = tuple(Edge(i, frozenset(vs), sign == "+") for i, (sign, vs) in enumerate(edges))
    verts = sorted(set().union(*(e.vertices for e in es)))
    return SignedHypergraph(tuple(verts), es)


@st.composite
def hypergraphs(draw, max_vertices=6, max_edges=6):
    n = draw(st.integers(1, max_vertices))
    subsets = st.frozensets(st.integers(1, n), min_size=1, max_size=n)
    edges = draw(st.lists(st.tuples(st.booleans(), subsets), min_size=1, max_size=max_edges))
    covered = set().union(*(vs for pos, vs in edges if pos)) if edges else set()
    missing = frozenset(range(1, n + 1)) - covered
    if missing:
        edges.append((True, missing))
    es = tuple(Edge(i, vs, pos) for i, (pos, vs) in enumerate(edges))
    return SignedHypergraph(tuple(range(1, n + 1)), es)


def test_running_example_sequence_and_witnesses():
    q = parse_query(RUNNING)
    h = q.hypergraph
    seq = elimination_sequence(h)
    assert seq.order == (1, 2, 3, 4)
    steps = list(seq.steps())
    v, w = steps[0]
    assert v == 4
    assert h.edge(w.pivot).atom == "U"
    assert [h.edge(c).atom for c in w.chain] == ["R", "S"]
    assert is_signed_acyclic_definition(h)
    assert is_free_connex(h, q.free)


def test_safety_is_enforced():
    with pytest.raises(UnsafeHypergraph):
        H(("+", {1}), ("-", {1, 2}))


def test_alpha_acyclicity_and_join_tree():
    ok, tree = is_alpha_acyclic([{1, 2}, {2, 3}, {3, 4}])
    assert ok and len(tree) == 2
    assert is_alpha_acyclic([{1, 2}, {2, 3}, {1, 3}]) == (False, None)
    assert is_alpha_acyclic([{1, 2}, {2, 3}, {1, 3}, {1, 2, 3}])[0]
    assert is_alpha_acyclic([])[0]


def test_negated_triangle_is_not_signed_acyclic():
    h = H(("+", {1, 2}), ("+", {2, 3}), ("-", {1, 3}))
    assert is_alpha_acyclic([e.vertices for e in h.pos_edges])[0]
    assert signed_cycle_witness(h) == (2,)
    assert not is_signed_acyclic_greedy(h)
    assert elimination_sequence(h) is None


def test_path_projection_is_not_free_connex():
    q = parse_query("Q(x, z) :- R(x, y), S(y, z).")
    h = q.hypergraph
    assert is_signed_acyclic_greedy(h)
    assert not is_free_connex(h, q.free)
    assert not is_free_connex_definition(h, q.free)
    assert is_free_connex(h, [q.vertex["x"], q.vertex["y"]])


def test_prefix_vertices_come_first():
    q = parse_query("Q(z, y) :- R(x, y), S(y, z).")
    h = q.hypergraph
    seq = elimination_sequence(h.with_negative_edge(q.free), prefix=q.free)
    assert set(seq.order[:2]) == set(q.free)


def test_reduce_and_beta_leaf():
    h = H(("+", {1, 2, 3}), ("+", {1, 2}), ("-", {2}), ("-", {3, 4}), ("+", {4}))
    r = reduce(h)
    assert {e.id for e in r.edges} == {0, 3, 4}
    assert is_beta_leaf(h, 1)
    assert not is_beta_leaf(H(("+", {1, 2}), ("+", {1, 3})), 1)


def test_validate_witness_rejects_bad_chains():
    h = H(("+", {1, 2}), ("-", {1, 2, 3}), ("+", {3}), ("-", {1, 3}))
    with pytest.raises(InvalidWitness):
        validate_witness(h, SignedLeafWitness(1, 0, (1,)))
    with pytest.raises(InvalidWitness):
        validate_witness(h, SignedLeafWitness(1, 1, ()))
    with pytest.raises(InvalidWitness):
        validate_witness(h, SignedLeafWitness(9, 0, ()))
    assert not any(w.vertex == 1 for w in find_signed_leaves(h))


def test_guard_on_negative_edges():
    edges = [("+", {1})] + [("-", {1, i}) for i in range(2, DEFINITION_GUARD + 3)]
    edges += [("+", {i}) for i in range(2, DEFINITION_GUARD + 3)]
    with pytest.raises(TooManyNegativeEdges):
        signed_cycle_witness(H(*edges))


@settings(max_examples=300, deadline=None)
@given(hypergraphs())
def test_greedy_agrees_with_definition(h):
    assert is_signed_acyclic_greedy(h) == is_signed_acyclic_definition(h)


@settings(max_examples=200, deadline=None)
@given(hypergraphs(), st.data())
def test_free_connex_agrees_with_definition(h, data):
    free = data.draw(st.frozensets(st.sampled_from(h.vertices)))
    assert is_free_connex(h, free) == is_free_connex_definition(h, free)


@settings(max_examples=200, deadline=None)
@given(hypergraphs())
def test_sequences_are_valid_and_removal_keeps_acyclicity(h):
    seq = elimination_sequence(h)
    if seq is None:
        return
    assert sorted(seq.order) == sorted(h.vertices)
    cur = h
    for v, w in seq.steps():
        validate_witness(cur, w)
        cur = remove_leaf(cur, w)
        assert v not in cur.vertices
        assert is_signed_acyclic_definition(cur)
    assert not cur.vertices and not cur.edges
