"""Linear preprocessing and constant-delay enumeration for signed-acyclic CQs.

Each eliminated vertex ``v`` gets a :class:`SkipListIndex`: for every key over
``U - {v}`` (``U`` the pivot edge) a doubly linked list of the ``v`` values
that survive the pivot's semijoins and antijoins.  Negative edges above the
pivot install labelled bypass links so that, given an assignment to the
earlier vertices, walking the list only ever visits values that extend to an
answer.

Relations inside the engine are keyed by edge id and use the sorted vertex
ids of their edge as schema.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import FreeConnexViolation, InvalidSequence, InvalidWitness
from .frontend import Query
from .hypergraph import (
    EliminationSequence,
    SignedHypergraph,
    elimination_sequence,
    remove_leaf,
    signed_cycle_witness,
    validate_witness,
)
from .instrument import COUNTER
from .storage import Database, Relation, _positions, antijoin, project, semijoin

_MISSING = object()
LEVEL0 = (0, ())


class SkipListIndex:
    """The per-vertex list structure.

    Nodes live in parallel arrays.  A node's links are dicts keyed by
    ``(level, label)``; a stored ``None`` is an explicit link to the end.
    Head sentinels have value ``None`` and may carry skip links too.
    """

    def __init__(self, v: int, u_vars: tuple, chain_vars: Sequence[tuple] = ()):
        self.v = v
        self.u_vars = tuple(u_vars)
        self.key_vars = tuple(x for x in self.u_vars if x != v)
        self.chain_vars = [tuple(c) for c in chain_vars]
        self.label_vars = [()] + [tuple(x for x in c if x != v) for c in self.chain_vars]
        self.values: list = []
        self.nxt: list[dict] = []
        self.prv: list[dict] = []
        self.heads: dict = {}
        self.tails: dict = {}
        self.book: dict = {}

    # -- construction -------------------------------------------------------

    def _new_node(self, value) -> int:
        self.values.append(value)
        self.nxt.append({})
        self.prv.append({})
        return len(self.values) - 1

    @classmethod
    def build(cls, v: int, pivot: Relation, chain_vars: Sequence[tuple] = ()) -> "SkipListIndex":
        """Level-0 lists, one per key, in row-scan order."""
        idx = cls(v, pivot.schema, chain_vars)
        key_pos = _positions(pivot.schema, idx.key_vars)
        v_pos = pivot.schema.index(v)
        for row in pivot.rows:
            key = tuple(row[i] for i in key_pos)
            tail = idx.tails.get(key)
            if tail is None:
                head = idx._new_node(None)
                idx.heads[key] = head
                idx.nxt[head][LEVEL0] = None
                tail = head
            node = idx._new_node(row[v_pos])
            idx.nxt[tail][LEVEL0] = node
            idx.prv[node][LEVEL0] = tail
            idx.nxt[node][LEVEL0] = None
            idx.tails[key] = node
            idx.book[row] = node
        COUNTER.ops += len(pivot.rows)
        return idx

    def labels_for(self, schema: tuple, row: tuple, top: int | None = None) -> list:
        """Labels of every level available from ``row`` (None where unavailable)."""
        at = {x: i for i, x in enumerate(schema)}
        out = []
        for i, lv in enumerate(self.label_vars):
            if top is not None and i > top:
                out.append(None)
                continue
            try:
                out.append(tuple(row[at[x]] for x in lv))
            except KeyError:
                out.append(None)
        return out

    def next_m(self, node: int, labels: Sequence) -> int | None:
        links = self.nxt[node]
        for i in range(len(self.label_vars) - 1, 0, -1):
            lab = labels[i]
            if lab is None:
                continue
            COUNTER.probes += 1
            hit = links.get((i, lab), _MISSING)
            if hit is not _MISSING:
                return hit
        COUNTER.probes += 1
        return links.get(LEVEL0)

    def prev_m(self, node: int, labels: Sequence) -> int | None:
        links = self.prv[node]
        for i in range(len(self.label_vars) - 1, 0, -1):
            lab = labels[i]
            if lab is None:
                continue
            COUNTER.probes += 1
            hit = links.get((i, lab), _MISSING)
            if hit is not _MISSING:
                return hit
        COUNTER.probes += 1
        return links.get(LEVEL0)

    def extend_list(self, i: int, rel: Relation, earlier: Sequence[Relation]) -> None:
        """Install level-``i`` bypasses for the tuples of the ``i``-th chain relation."""
        schema = rel.schema
        u_pos = _positions(schema, self.u_vars)
        earlier_pos = [(_positions(schema, r.schema), r) for r in earlier]
        label_pos = _positions(schema, self.label_vars[i])
        for a in rel.rows:
            COUNTER.ops += 1 + len(earlier_pos)
            node = self.book.get(tuple(a[j] for j in u_pos))
            if node is None:
                continue
            if any(tuple(a[j] for j in pos) in r for pos, r in earlier_pos):
                continue
            labels = self.labels_for(schema, a, top=i)
            p = self.prev_m(node, labels)
            q = self.next_m(node, labels)
            label = (i, tuple(a[j] for j in label_pos))
            self.nxt[p][label] = q
            if q is not None:
                self.prv[q][label] = p

    # -- traversal ----------------------------------------------------------

    def first(self, key: tuple, labels: Sequence) -> int | None:
        head = self.heads.get(key)
        if head is None:
            return None
        return self.next_m(head, labels)

    def iterate(self, key: tuple, labels: Sequence) -> Iterator:
        node = self.first(key, labels)
        while node is not None:
            yield self.values[node]
            node = self.next_m(node, labels)

    def level0(self, key: tuple) -> list:
        out = []
        head = self.heads.get(key)
        node = None if head is None else self.nxt[head].get(LEVEL0)
        while node is not None:
            out.append(self.values[node])
            node = self.nxt[node].get(LEVEL0)
        return out

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class PreprocessedQuery:
    order: tuple
    lists: dict
    empty: bool = False
    snapshots: list = field(default_factory=list)

    def enumerate(self, k: int | None = None) -> Iterator[tuple]:
        """Answers restricted to the first ``k`` vertices of the order."""
        k = len(self.order) if k is None else k
        if self.empty:
            return
        if k == 0:
            yield ()
            return
        verts = self.order[:k]
        lists = [self.lists[v] for v in verts]
        asg: dict = {}
        keys: list = [None] * k
        labels: list = [None] * k
        cur: list = [None] * k

        def enter(d: int):
            lst = lists[d]
            keys[d] = tuple(asg[x] for x in lst.key_vars)
            labels[d] = [tuple(asg[x] for x in lv) for lv in lst.label_vars]
            return lst.first(keys[d], labels[d])

        cur[0] = enter(0)
        d = 0
        while d >= 0:
            node = cur[d]
            if node is None:
                d -= 1
                if d >= 0:
                    cur[d] = lists[d].next_m(cur[d], labels[d])
                continue
            asg[verts[d]] = lists[d].values[node]
            if d == k - 1:
                yield tuple(asg[x] for x in verts)
                cur[d] = lists[d].next_m(node, labels[d])
            else:
                d += 1
                cur[d] = enter(d)


def _edge_relation(schema_vars: Sequence[str], rel: Relation, vertex: dict) -> Relation:
    verts = [vertex[x] for x in schema_vars]
    order = sorted(range(len(verts)), key=lambda i: verts[i])
    return Relation(
        tuple(verts[i] for i in order),
        tuple(tuple(row[i] for i in order) for row in rel.rows),
    )


def prepare_relations(q: Query, db: Database) -> dict:
    """Edge id -> relation over sorted vertex ids, for every body literal."""
    out = {}
    for e, lit in enumerate(q.body):
        rel = db[lit.name]
        if not isinstance(rel, Relation):
            rel = rel.relation()
        if len(rel.schema) != len(lit.args):
            raise ValueError(f"atom {lit.name} has arity {len(lit.args)}, data has {len(rel.schema)}")
        out[e] = _edge_relation(lit.args, rel, q.vertex)
    return out


def _snapshot(h: SignedHypergraph, rels: dict) -> dict:
    return {e.atom if e.atom is not None else f"#{e.id}": rels[e.id] for e in h.edges}


def preprocess_full(
    h: SignedHypergraph,
    rels: dict,
    seq: EliminationSequence,
    keep_snapshots: bool = False,
) -> PreprocessedQuery:
    """Eliminate the vertices of ``seq`` last-first, building one list per vertex."""
    if sorted(seq.order) != sorted(h.vertices):
        raise InvalidSequence("sequence is not a permutation of the vertices")
    rels = dict(rels)
    cur = h
    lists: dict = {}
    empty = False
    snaps = [_snapshot(cur, rels)] if keep_snapshots else []
    for v, w in seq.steps():
        try:
            validate_witness(cur, w)
        except InvalidWitness as exc:
            raise InvalidSequence(f"step for vertex {v}: {exc}") from None
        if w.vertex != v:
            raise InvalidSequence("witness does not match the sequence")
        u_edge = cur.edge(w.pivot)
        r_u = rels[u_edge.id]
        for e in cur.edges:
            if e.id == u_edge.id or v not in e.vertices or not e.vertices <= u_edge.vertices:
                continue
            r_u = semijoin(r_u, rels[e.id]) if e.positive else antijoin(r_u, rels[e.id])
        chain = [cur.edge(c) for c in w.chain]
        lst = SkipListIndex.build(v, r_u, [tuple(sorted(c.vertices)) for c in chain])
        rest = tuple(x for x in r_u.schema if x != v)
        if not rest and not r_u.rows:
            empty = True
        new_rels = dict(rels)
        new_rels[u_edge.id] = project(r_u, rest)
        for i, c in enumerate(chain, start=1):
            lst.extend_list(i, rels[c.id], [rels[chain[j].id] for j in range(i - 1)])
        for i, c in enumerate(chain, start=1):
            src = rels[c.id]
            key_pos = _positions(src.schema, lst.key_vars)
            keep_vars = tuple(x for x in src.schema if x != v)
            keep_pos = _positions(src.schema, keep_vars)
            kept = []
            for a in src.rows:
                COUNTER.ops += 1
                key = tuple(a[j] for j in key_pos)
                if key not in lst.heads:
                    continue
                if lst.first(key, lst.labels_for(src.schema, a, top=i)) is None:
                    kept.append(tuple(a[j] for j in keep_pos))
            new_rels[c.id] = Relation(keep_vars, tuple(kept))
        nxt = remove_leaf(cur, w)
        survivors = {e.id for e in nxt.edges}
        rels = {e: r if e in survivors else None for e, r in new_rels.items()}
        rels = {e: r for e, r in rels.items() if r is not None}
        cur = nxt
        lists[v] = lst
        if keep_snapshots:
            snaps.append(_snapshot(cur, rels))
    return PreprocessedQuery(tuple(seq.order), lists, empty, snaps)


# ---------------------------------------------------------------------------
# query-level entry points


@dataclass
class Plan:
    query: Query
    hypergraph: SignedHypergraph
    sequence: EliminationSequence
    f_edge: int | None
    free_order: tuple


def plan(q: Query) -> Plan:
    h = q.hypergraph
    free = frozenset(q.free)
    f_edge = None
    if free and free != frozenset(h.vertices):
        h = h.with_negative_edge(free, atom=None)
        f_edge = max(e.id for e in h.edges)
    seq = elimination_sequence(h, prefix=free)
    if seq is None:
        witness = None
        try:
            witness = signed_cycle_witness(h)
        except Exception:
            witness = None
        raise FreeConnexViolation(
            "query is not free-connex signed-acyclic", witness
        )
    return Plan(q, h, seq, f_edge, tuple(seq.order[: len(free)]))


def preprocess(q: Query, db: Database, keep_snapshots: bool = False) -> tuple[Plan, PreprocessedQuery]:
    pl = plan(q)
    rels = prepare_relations(q, db)
    if pl.f_edge is not None:
        rels[pl.f_edge] = Relation(tuple(sorted(q.free)), ())
    pre = preprocess_full(pl.hypergraph, rels, pl.sequence, keep_snapshots)
    return pl, pre


def enumerate_full(p: PreprocessedQuery) -> Iterator[tuple]:
    return p.enumerate()


def enumerate_free_connex(q: Query, db: Database) -> Iterator[tuple]:
    """Answers as tuples of value ids in head-variable order."""
    pl, pre = preprocess(q, db)
    f = len(q.free)
    if f == 0:
        for _ in pre.enumerate():
            yield ()
            return
        return
    head_pos = [pl.free_order.index(x) for x in q.free]
    for t in pre.enumerate(f):
        yield tuple(t[i] for i in head_pos)
