"""Signed hypergraphs: acyclicity tests, signed leaves and elimination orders.

A signed hypergraph has one hyperedge per atom of a query.  Positive atoms
give positive edges, negated atoms give negative edges.  Edges form a
multiset, so every edge carries a stable integer id and duplicates are
allowed.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InvalidWitness, TooManyNegativeEdges, UnsafeHypergraph

DEFINITION_GUARD = 20


@dataclass(frozen=True)
class Edge:
    id: int
    vertices: frozenset
    positive: bool
    atom: str | None = None

    def __repr__(self) -> str:
        sign = "+" if self.positive else "-"
        body = ",".join(str(v) for v in sorted(self.vertices))
        return f"{sign}{self.id}{{{body}}}"


@dataclass(frozen=True)
class SignedHypergraph:
    vertices: tuple
    edges: tuple = ()
    _pos: tuple = field(init=False, repr=False, compare=False)
    _neg: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate edge ids")
        covered: set = set()
        for e in self.edges:
            if not e.vertices:
                raise ValueError(f"edge {e.id} is empty")
            if not e.vertices <= vset:
                raise ValueError(f"edge {e.id} mentions unknown vertices")
            if e.positive:
                covered |= e.vertices
        if covered != vset:
            missing = sorted(vset - covered, key=str)
            raise UnsafeHypergraph(f"vertices {missing} occur in no positive edge")
        object.__setattr__(self, "_pos", tuple(e for e in self.edges if e.positive))
        object.__setattr__(self, "_neg", tuple(e for e in self.edges if not e.positive))

    @classmethod
    def build(
        cls,
        pos: Iterable[Iterable[int]],
        neg: Iterable[Iterable[int]] = (),
        vertices: Sequence[int] | None = None,
    ) -> "SignedHypergraph":
        """Number positive edges first, then negative ones, from id 0."""
        edges = []
        for vs in pos:
            edges.append(Edge(len(edges), frozenset(vs), True))
        for vs in neg:
            edges.append(Edge(len(edges), frozenset(vs), False))
        if vertices is None:
            vertices = sorted(set().union(*(e.vertices for e in edges))) if edges else []
        return cls(tuple(vertices), tuple(edges))

    @property
    def pos_edges(self) -> tuple:
        return self._pos

    @property
    def neg_edges(self) -> tuple:
        return self._neg

    def edge(self, edge_id: int) -> Edge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise KeyError(edge_id)

    def with_negative_edge(self, vertices: Iterable[int], atom: str | None = None) -> "SignedHypergraph":
        new_id = max((e.id for e in self.edges), default=-1) + 1
        extra = Edge(new_id, frozenset(vertices), False, atom)
        return SignedHypergraph(self.vertices, self.edges + (extra,))

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class SignedLeafWitness:
    vertex: int
    pivot: int
    chain: tuple = ()


@dataclass(frozen=True)
class EliminationSequence:
    """``order[i]`` is eliminated after every vertex behind it.

    ``witnesses[i]`` certifies that ``order[i]`` is a signed leaf of the
    hypergraph left once ``order[i+1:]`` have been removed.
    """

    order: tuple
    witnesses: tuple

    def steps(self):
        """Yield ``(vertex, witness)`` in elimination order (last vertex first)."""
        for v, w in zip(reversed(self.order), reversed(self.witnesses)):
            yield v, w

    def __len__(self) -> int:
        return len(self.order)


# ---------------------------------------------------------------------------
# alpha-acyclicity


def is_alpha_acyclic(edges: Iterable[Iterable]) -> tuple[bool, list | None]:
    """GYO reduction.

    Returns ``(True, join_tree)`` where ``join_tree`` lists ``(child, parent)``
    pairs over the indices of ``edges``, or ``(False, None)``.
    """
    sets = [set(e) for e in edges]
    alive = list(range(len(sets)))
    parent: list = []
    changed = True
    while changed and len(alive) > 1:
        changed = False
        counts = Counter(v for i in alive for v in sets[i])
        for i in alive:
            ears = {v for v in sets[i] if counts[v] == 1}
            if ears:
                sets[i] -= ears
                changed = True
        for i in list(alive):
            for j in alive:
                if j != i and sets[i] <= sets[j]:
                    alive.remove(i)
                    parent.append((i, j))
                    changed = True
                    break
    if len(alive) <= 1:
        return True, parent
    return False, None


# ---------------------------------------------------------------------------
# reduction and leaves


def reduce(h: SignedHypergraph) -> SignedHypergraph:
    """Drop every edge contained in some *other* positive edge, to a fixpoint."""
    edges = list(h.edges)
    changed = True
    while changed:
        changed = False
        for e in edges:
            if any(p.positive and p.id != e.id and e.vertices <= p.vertices for p in edges):
                edges.remove(e)
                changed = True
                break
    return SignedHypergraph(h.vertices, tuple(edges))


def is_beta_leaf(h: SignedHypergraph, x) -> bool:
    """The edges containing ``x`` are linearly ordered by inclusion."""
    around = sorted((e.vertices for e in h.edges if x in e.vertices), key=len)
    return all(a <= b for a, b in zip(around, around[1:]))


def _witness_for(h: SignedHypergraph, x) -> SignedLeafWitness | None:
    pos = [e for e in h.pos_edges if x in e.vertices]
    if not pos:
        return None
    pivots = [u for u in pos if all(k.vertices <= u.vertices for k in pos)]
    if not pivots:
        return None
    u = min(pivots, key=lambda e: (len(e.vertices), e.id))
    chain = sorted(
        (n for n in h.neg_edges if x in n.vertices and not n.vertices <= u.vertices),
        key=lambda e: (len(e.vertices), e.id),
    )
    below = u.vertices
    for n in chain:
        if not below <= n.vertices:
            return None
        below = n.vertices
    return SignedLeafWitness(x, u.id, tuple(n.id for n in chain))


def leaf_witness(h: SignedHypergraph, x) -> SignedLeafWitness | None:
    """Witness for ``x`` if it is a signed leaf of ``h``, else None."""
    return _witness_for(h, x)


def find_signed_leaves(h: SignedHypergraph) -> list[SignedLeafWitness]:
    out = []
    for x in h.vertices:
        w = _witness_for(h, x)
        if w is not None:
            out.append(w)
    return out


def validate_witness(h: SignedHypergraph, w: SignedLeafWitness) -> None:
    v = w.vertex
    if v not in h.vertices:
        raise InvalidWitness(f"vertex {v} not in hypergraph")
    try:
        u = h.edge(w.pivot)
    except KeyError:
        raise InvalidWitness(f"pivot {w.pivot} is not an edge") from None
    if not u.positive or v not in u.vertices:
        raise InvalidWitness("pivot must be a positive edge containing the vertex")
    for k in h.pos_edges:
        if v in k.vertices and not k.vertices <= u.vertices:
            raise InvalidWitness(f"positive edge {k.id} escapes the pivot")
    expected = {n.id for n in h.neg_edges if v in n.vertices and not n.vertices <= u.vertices}
    if set(w.chain) != expected or len(w.chain) != len(expected):
        raise InvalidWitness("chain does not list exactly the escaping negative edges")
    below = u.vertices
    for nid in w.chain:
        n = h.edge(nid).vertices
        if not below <= n:
            raise InvalidWitness("chain is not ordered by inclusion above the pivot")
        below = n


def remove_leaf(h: SignedHypergraph, w: SignedLeafWitness) -> SignedHypergraph:
    validate_witness(h, w)
    v = w.vertex
    u = h.edge(w.pivot).vertices
    kept = []
    for e in h.edges:
        if v in e.vertices:
            if e.id != w.pivot and e.vertices <= u:
                continue
            rest = e.vertices - {v}
            if rest:
                kept.append(Edge(e.id, rest, e.positive, e.atom))
        else:
            kept.append(e)
    return SignedHypergraph(tuple(x for x in h.vertices if x != v), tuple(kept))


# ---------------------------------------------------------------------------
# elimination sequences and signed acyclicity


def elimination_sequence(h: SignedHypergraph, prefix: Iterable | None = None) -> EliminationSequence | None:
    """Greedy signed-elimination.

    Vertices of ``prefix`` are held back until nothing else is left, so they
    take the first positions of the returned order.  Among eligible leaves
    the largest vertex id is eliminated first, which makes the order read
    increasingly whenever possible.
    """
    held = set(prefix or ())
    if not held <= set(h.vertices):
        raise ValueError("prefix must be a subset of the vertices")
    cur = h
    gone: list = []
    wits: list = []
    while cur.vertices:
        leaves = find_signed_leaves(cur)
        if any(v not in held for v in cur.vertices):
            leaves = [w for w in leaves if w.vertex not in held]
        if not leaves:
            return None
        w = max(leaves, key=lambda lw: lw.vertex)
        gone.append(w.vertex)
        wits.append(w)
        cur = remove_leaf(cur, w)
    return EliminationSequence(tuple(reversed(gone)), tuple(reversed(wits)))


def signed_cycle_witness(h: SignedHypergraph) -> tuple | None:
    """Ids of a negative sub-multiset whose union with the positives is cyclic."""
    neg = h.neg_edges
    if len(neg) > DEFINITION_GUARD:
        raise TooManyNegativeEdges(f"{len(neg)} negative edges (limit {DEFINITION_GUARD})")
    pos = [e.vertices for e in h.pos_edges]
    for mask in range(1 << len(neg)):
        chosen = [neg[i] for i in range(len(neg)) if mask >> i & 1]
        ok, _ = is_alpha_acyclic(pos + [e.vertices for e in chosen])
        if not ok:
            return tuple(e.id for e in chosen)
    return None


def is_signed_acyclic_definition(h: SignedHypergraph) -> bool:
    return signed_cycle_witness(h) is None


def is_signed_acyclic_greedy(h: SignedHypergraph) -> bool:
    return elimination_sequence(h) is not None


def _augment(h: SignedHypergraph, free: Iterable) -> tuple[SignedHypergraph, frozenset]:
    f = frozenset(free)
    if not f <= set(h.vertices):
        raise ValueError("free variables must be vertices")
    return (h.with_negative_edge(f, atom=None) if f else h), f


def is_free_connex(h: SignedHypergraph, free: Iterable) -> bool:
    aug, f = _augment(h, free)
    return elimination_sequence(aug, prefix=f) is not None


def is_free_connex_definition(h: SignedHypergraph, free: Iterable) -> bool:
    aug, _ = _augment(h, free)
    return is_signed_acyclic_definition(aug)
