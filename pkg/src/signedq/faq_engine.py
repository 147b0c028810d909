"""Aggregation over semirings for signed-acyclic queries with negation.

A query is held as an expression tree over named weighted factors:

* ``Times(children)`` multiplies its children,
* ``Guard(factor, body)`` returns the factor's stored weight when the point
  is in its table and falls through to ``body`` otherwise,
* ``Leaf(factor)`` is a positive factor (zero off its table),
* ``Const(value)`` is a nonzero constant.

Vertices are eliminated one at a time.  Each step rewrites the tree so the
eliminated vertex sits on a single path of guards ending in its pivot leaf
(:func:`refactor`), builds range-sum oracles along that path and sums the
vertex out (:func:`aggregate_leaf`).  A full expression is finally turned into
a plain signed query whose answers are exactly the nonzero points.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence

from .algebra import Semiring, instance
from .errors import (
    FreeConnexViolation,
    InvalidSequence,
    InvalidWitness,
    MissingDefault,
    QueryError,
    StructureViolation,
    UnboundVariable,
)
from .frontend import Literal, Query
from .hypergraph import (
    Edge,
    EliminationSequence,
    SignedHypergraph,
    SignedLeafWitness,
    elimination_sequence,
    leaf_witness,
    signed_cycle_witness,
    validate_witness,
)
from .instrument import COUNTER
from .rangesum import ChainLevel, OracleFamily, build_oracle
from .storage import Database, Factor, Relation

_MISSING = object()


# ---------------------------------------------------------------------------
# expression tree


@dataclass(frozen=True)
class Const:
    value: Any


@dataclass(frozen=True)
class Leaf:
    factor: str


@dataclass(frozen=True)
class Times:
    children: tuple = ()


@dataclass(frozen=True)
class Guard:
    factor: str
    body: Times


@dataclass(frozen=True)
class WFactor:
    """Weighted factor over sorted vertex ids; ``table`` may hold zeros."""

    vars: tuple
    table: dict
    positive: bool = True


@dataclass
class FaqDatabase:
    semiring: Semiring
    factors: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> WFactor:
        return self.factors[name]

    def size(self) -> int:
        return sum(len(f.table) for f in self.factors.values())

    def fresh(self, base: str, taken=()) -> str:
        name = base + "'"
        while name in self.factors or name in taken:
            name += "'"
        return name


def factor_names(node) -> Iterator[str]:
    if isinstance(node, Leaf):
        yield node.factor
    elif isinstance(node, Guard):
        yield node.factor
        yield from factor_names(node.body)
    elif isinstance(node, Times):
        for c in node.children:
            yield from factor_names(c)


def node_vars(node, fdb: FaqDatabase) -> frozenset:
    out: set = set()
    for name in factor_names(node):
        out.update(fdb[name].vars)
    return frozenset(out)


def ast_size(node) -> int:
    if isinstance(node, Times):
        return 1 + sum(ast_size(c) for c in node.children)
    if isinstance(node, Guard):
        return 1 + ast_size(node.body)
    return 1


def check_ast(ast, fdb: FaqDatabase) -> None:
    """Shape rules the pipeline relies on.

    The root is a Times node, guard bodies are Times nodes whose variables
    stay inside the guard's factor, every factor occurs once, constants are
    nonzero and every variable is covered by some positive leaf.
    """
    s = fdb.semiring
    if not isinstance(ast, Times):
        raise StructureViolation("root must be a Times node")
    seen: set = set()
    covered: set = set()
    used: set = set()

    def walk(node) -> None:
        if isinstance(node, Times):
            for c in node.children:
                walk(c)
        elif isinstance(node, Const):
            if s.is_zero(node.value):
                raise StructureViolation("constant leaves must be nonzero")
        elif isinstance(node, (Leaf, Guard)):
            if node.factor in seen:
                raise StructureViolation(f"factor {node.factor} occurs twice")
            seen.add(node.factor)
            f = fdb[node.factor]
            used.update(f.vars)
            if isinstance(node, Leaf):
                covered.update(f.vars)
            else:
                if not isinstance(node.body, Times):
                    raise StructureViolation("guard bodies must be Times nodes")
                if not node_vars(node.body, fdb) <= set(f.vars):
                    raise StructureViolation(f"body of guard {node.factor} leaves its variables")
                walk(node.body)
        else:
            raise StructureViolation(f"unknown node {node!r}")

    walk(ast)
    if not used <= covered:
        raise StructureViolation(f"variables {sorted(used - covered)} are not under a positive leaf")


def hypergraph_of(ast, fdb: FaqDatabase) -> SignedHypergraph:
    """Positive edges for leaves, negative edges for guards; nullary factors skipped."""
    edges = []

    def walk(node) -> None:
        if isinstance(node, Times):
            for c in node.children:
                walk(c)
        elif isinstance(node, Leaf):
            vs = fdb[node.factor].vars
            if vs:
                edges.append(Edge(len(edges), frozenset(vs), True, node.factor))
        elif isinstance(node, Guard):
            vs = fdb[node.factor].vars
            if vs:
                edges.append(Edge(len(edges), frozenset(vs), False, node.factor))
            walk(node.body)

    walk(ast)
    verts = sorted(set().union(*(e.vertices for e in edges))) if edges else []
    return SignedHypergraph(tuple(verts), tuple(edges))


def evaluate_point(node, a: dict, fdb: FaqDatabase):
    """Weight of the point ``a`` (vertex id -> value id)."""
    s = fdb.semiring
    if isinstance(node, Times):
        acc = s.one
        for c in node.children:
            acc = s.times(acc, evaluate_point(c, a, fdb))
        return acc
    if isinstance(node, Const):
        return node.value
    f = fdb[node.factor]
    try:
        key = tuple(a[v] for v in f.vars)
    except KeyError as exc:
        raise UnboundVariable(f"vertex {exc.args[0]} is not assigned") from None
    COUNTER.ops += 1
    if isinstance(node, Leaf):
        return f.table.get(key, s.zero)
    w = f.table.get(key, _MISSING)
    if w is not _MISSING:
        return w
    return evaluate_point(node.body, a, fdb)


# ---------------------------------------------------------------------------
# building the flat tree from a parsed query


def _to_vertex_table(args: Sequence[str], vertex: dict, rows: dict) -> tuple[tuple, dict]:
    verts = [vertex[x] for x in args]
    order = sorted(range(len(verts)), key=lambda i: verts[i])
    vs = tuple(verts[i] for i in order)
    return vs, {tuple(k[i] for i in order): w for k, w in rows.items()}


def _weights(obj, s: Semiring, unweighted) -> dict:
    if isinstance(obj, Factor):
        return dict(obj.table)
    return {row: unweighted for row in obj.rows}


def faq_to_nestfaq(
    q: Query,
    db: Database,
    s: Semiring | None = None,
    defaults: dict | None = None,
) -> tuple[Times, FaqDatabase]:
    """Flat tree: positive leaves, then one ``Guard(R_N, Const(c_N))`` per negated atom.

    Unweighted positive files get weight one; unweighted negated files store
    zero, so their rows block the point.  ``defaults`` overrides ``@default``.
    """
    s = s or instance(q.semiring_name)
    raw_defaults = q.default_map
    fdb = FaqDatabase(s)
    leaves = []
    guards = []
    for lit in q.body:
        if lit.positive:
            vs, table = _to_vertex_table(lit.args, q.vertex, _weights(db[lit.name], s, s.one))
            fdb.factors[lit.name] = WFactor(vs, table, True)
            leaves.append(Leaf(lit.name))
            continue
        if defaults is not None and lit.name in defaults:
            c = defaults[lit.name]
        elif lit.name in raw_defaults:
            c = s.parse(raw_defaults[lit.name])
        else:
            raise MissingDefault(f"negated atom {lit.name} needs '@default {lit.name} = <value>'")
        if s.is_zero(c):
            raise QueryError(f"default for {lit.name} must be nonzero")
        vs, table = _to_vertex_table(lit.args, q.vertex, _weights(db[lit.name], s, s.zero))
        fdb.factors[lit.name] = WFactor(vs, table, False)
        guards.append(Guard(lit.name, Times((Const(c),))))
    return Times(tuple(leaves + guards)), fdb


# ---------------------------------------------------------------------------
# refactor


def _mentions(node, n: int, fdb: FaqDatabase) -> bool:
    return not isinstance(node, Const) and n in node_vars(node, fdb)


def _edge_size(node, fdb: FaqDatabase) -> int:
    return len(fdb[node.factor].vars)


def _scaled(f: WFactor, extra: Times, fdb: FaqDatabase) -> dict:
    s = fdb.semiring
    out = {}
    for key, w in f.table.items():
        a = dict(zip(f.vars, key))
        out[key] = s.times(w, evaluate_point(extra, a, fdb))
    return out


def _refactor_terms(terms: list, n: int, pivot: str, fdb: FaqDatabase, new: dict, dropped: set) -> Times:
    outside = [t for t in terms if not isinstance(t, Const) and not _mentions(t, n, fdb)]
    consts = [t for t in terms if isinstance(t, Const)]
    stash = [t for t in terms if _mentions(t, n, fdb)]
    for t in stash:
        if not isinstance(t, (Leaf, Guard)):
            raise StructureViolation("only factors may mention the eliminated vertex")
    stash.sort(key=lambda t: (-_edge_size(t, fdb), not (isinstance(t, Leaf) and t.factor == pivot), t.factor))
    if not stash:
        raise InvalidWitness(f"pivot {pivot} is not reachable")
    top, rest = stash[0], stash[1:]
    f = fdb[top.factor]
    if isinstance(top, Leaf):
        if top.factor != pivot:
            raise InvalidWitness(f"positive factor {top.factor} is not covered by the pivot")
        extra = Times(tuple(rest + consts))
        name = fdb.fresh(top.factor, new)
        new[name] = WFactor(f.vars, _scaled(f, extra, fdb), True)
        dropped.add(top.factor)
        dropped.update(factor_names(extra))
        COUNTER.ops += len(f.table) * max(1, ast_size(extra))
        return Times(tuple(outside) + (Leaf(name),))
    extra = Times(tuple(rest + consts))
    name = fdb.fresh(top.factor, new)
    new[name] = WFactor(f.vars, _scaled(f, extra, fdb), False)
    dropped.add(top.factor)
    COUNTER.ops += len(f.table) * max(1, ast_size(extra))
    body = _refactor_terms(list(rest) + consts + list(top.body.children), n, pivot, fdb, new, dropped)
    return Times(tuple(outside) + (Guard(name, body),))


def refactor(ast: Times, n: int, w: SignedLeafWitness, fdb: FaqDatabase) -> tuple[Times, FaqDatabase]:
    """Rewrite ``ast`` so ``n`` lies on one guard path ending at the pivot leaf.

    Factors inside the pivot's edge are absorbed into the pivot's weights,
    and each guard on the path absorbs everything below it into its stored
    weights; guard rows keep their key set.
    """
    h = hypergraph_of(ast, fdb)
    validate_witness(h, w)
    pivot = h.edge(w.pivot).atom
    new: dict = {}
    dropped: set = set()
    out = _refactor_terms(list(ast.children), n, pivot, fdb, new, dropped)
    factors = {k: v for k, v in fdb.factors.items() if k not in dropped}
    factors.update(new)
    live = set(factor_names(out))
    factors = {k: v for k, v in factors.items() if k in live}
    return out, FaqDatabase(fdb.semiring, factors)


# ---------------------------------------------------------------------------
# oracles and aggregation


@dataclass
class ChainView:
    """The guard path of a refactored tree, outermost guard first."""

    outside: tuple
    guards: list
    siblings: list
    pivot: str


def chain_view(ast: Times, n: int, fdb: FaqDatabase) -> ChainView:
    outside = tuple(c for c in ast.children if not _mentions(c, n, fdb))
    inside = [c for c in ast.children if _mentions(c, n, fdb)]
    if len(inside) != 1:
        raise StructureViolation(f"vertex {n} must appear under exactly one child of the root")
    guards: list = []
    siblings: list = []
    node = inside[0]
    while isinstance(node, Guard):
        guards.append(node)
        sib = tuple(c for c in node.body.children if not _mentions(c, n, fdb))
        nxt = [c for c in node.body.children if _mentions(c, n, fdb)]
        if len(nxt) != 1:
            raise StructureViolation(f"guard {node.factor} body must continue the path exactly once")
        siblings.append(sib)
        node = nxt[0]
    if not isinstance(node, Leaf):
        raise StructureViolation("the path must end at a leaf")
    return ChainView(outside, guards, siblings, node.factor)


def build_oracles(ast: Times, n: int, fdb: FaqDatabase, backend: str | None = None) -> OracleFamily:
    view = chain_view(ast, n, fdb)
    s = fdb.semiring
    piv = fdb[view.pivot]
    levels = []
    for g, sib in zip(reversed(view.guards), reversed(view.siblings)):
        f = fdb[g.factor]
        key_vars = tuple(v for v in f.vars if v != n)
        prod = Times(sib)

        def mu(key, key_vars=key_vars, prod=prod):
            if not prod.children:
                return s.one
            return evaluate_point(prod, dict(zip(key_vars, key)), fdb)

        levels.append(ChainLevel(f.vars, f.table, mu))
    return build_oracle(n, piv.vars, piv.table, levels, s, backend)


def aggregate_leaf(
    ast: Times, n: int, family: OracleFamily, fdb: FaqDatabase
) -> tuple[Times, FaqDatabase]:
    """Sum ``n`` out of a refactored tree using the oracles of ``family``."""
    s = fdb.semiring
    view = chain_view(ast, n, fdb)
    factors = dict(fdb.factors)

    piv = fdb[view.pivot]
    t0 = family.levels[0]
    rest = tuple(v for v in piv.vars if v != n)
    at = piv.vars.index(n)
    keys = dict.fromkeys(k[:at] + k[at + 1:] for k in piv.table)
    del factors[view.pivot]
    if rest:
        name = _fresh(factors, view.pivot)
        factors[name] = WFactor(rest, {k: t0.query(k) for k in keys}, True)
        node = Leaf(name)
    else:
        total = t0.query(()) if () in t0 else s.zero
        if s.is_zero(total):
            name = _fresh(factors, view.pivot)
            factors[name] = WFactor((), {}, True)
            node = Leaf(name)
        else:
            node = Const(total)
    COUNTER.ops += len(piv.table)

    for depth in range(len(view.guards) - 1, -1, -1):
        g = view.guards[depth]
        level = family.levels[len(view.guards) - depth]
        f = fdb[g.factor]
        at = f.vars.index(n)
        keys = dict.fromkeys(k[:at] + k[at + 1:] for k in f.table)
        del factors[g.factor]
        name = _fresh(factors, g.factor)
        factors[name] = WFactor(
            tuple(v for v in f.vars if v != n), {k: level.query(k) for k in keys}, False
        )
        COUNTER.ops += len(f.table)
        node = Guard(name, Times(view.siblings[depth] + (node,)))
    return Times(view.outside + (node,)), FaqDatabase(s, factors)


def _fresh(factors: dict, base: str) -> str:
    name = base + "'"
    while name in factors:
        name += "'"
    return name


# ---------------------------------------------------------------------------
# the pipeline


def eliminate(
    ast: Times,
    fdb: FaqDatabase,
    order: Sequence[int],
    f: int,
    backend: str | None = None,
    trace: list | None = None,
) -> tuple[Times, FaqDatabase]:
    """Sum out ``order[f:]`` last vertex first."""
    for n in reversed(tuple(order)[f:]):
        h = hypergraph_of(ast, fdb)
        if n not in h.vertices:
            raise InvalidSequence(f"vertex {n} no longer occurs")
        w = leaf_witness(h, n)
        if w is None:
            raise InvalidSequence(f"vertex {n} is not a signed leaf at its turn")
        before = (ast_size(ast), fdb.size())
        ast, fdb = refactor(ast, n, w, fdb)
        family = build_oracles(ast, n, fdb, backend)
        if trace is not None:
            trace.append({"vertex": n, "refactored": ast, "refactored_db": fdb, "oracles": family})
        ast, fdb = aggregate_leaf(ast, n, family, fdb)
        assert ast_size(ast) <= before[0] + 1 and fdb.size() <= before[1], "size bound violated"
    return ast, fdb


@dataclass
class Reduced:
    query: Query | None
    db: Database
    empty: bool
    names: dict


def reduce_to_cq(ast: Times, fdb: FaqDatabase, head: Sequence[int]) -> Reduced:
    """Plain signed query whose answers are the nonzero points of a full tree.

    Positive atoms keep the nonzero rows of each leaf, negated atoms hold the
    stored zero rows of each guard.  Nullary factors decide emptiness.
    """
    s = fdb.semiring
    body = []
    db = Database()
    names: dict = {}
    empty = False
    var = {v: f"x{v}" for v in head}

    def walk(node) -> None:
        nonlocal empty
        if isinstance(node, Times):
            for c in node.children:
                walk(c)
            return
        if isinstance(node, Const):
            return
        f = fdb[node.factor]
        positive = isinstance(node, Leaf)
        if positive:
            rows = tuple(k for k, w in f.table.items() if not s.is_zero(w))
        else:
            rows = tuple(k for k, w in f.table.items() if s.is_zero(w))
        COUNTER.ops += len(f.table)
        if not f.vars:
            if (positive and not rows) or (not positive and rows):
                empty = True
        else:
            atom = f"F{len(body)}"
            names[atom] = node.factor
            args = tuple(var[v] for v in f.vars)
            body.append(Literal(atom, args, positive))
            db.atoms[atom] = Relation(args, rows)
        if isinstance(node, Guard):
            walk(node.body)

    walk(ast)
    if not head:
        return Reduced(None, db, empty, names)
    q = Query("Qstar", tuple(var[v] for v in head), tuple(body))
    return Reduced(q, db, empty, names)


def faq_plan(q: Query) -> EliminationSequence:
    h = q.hypergraph
    free = frozenset(q.free)
    if free and free != frozenset(h.vertices):
        h = h.with_negative_edge(free)
    seq = elimination_sequence(h, prefix=free)
    if seq is None:
        try:
            witness = signed_cycle_witness(h)
        except Exception:
            witness = None
        raise FreeConnexViolation("query is not free-connex signed-acyclic", witness)
    return seq


def enumerate_faq(
    q: Query,
    db: Database,
    s: Semiring | None = None,
    backend: str | None = None,
    defaults: dict | None = None,
) -> Iterator[tuple[tuple, Any]]:
    """Nonzero answers ``(head tuple of value ids, weight)``."""
    from . import cq_engine

    s = s or instance(q.semiring_name)
    seq = faq_plan(q)
    ast, fdb = faq_to_nestfaq(q, db, s, defaults)
    f = len(q.free)
    ast, fdb = eliminate(ast, fdb, seq.order, f, backend)
    head = tuple(q.free)
    red = reduce_to_cq(ast, fdb, head)
    if red.empty:
        return
    if not head:
        v = evaluate_point(ast, {}, fdb)
        if not s.is_zero(v):
            yield (), v
        return
    for t in cq_engine.enumerate_free_connex(red.query, red.db):
        v = evaluate_point(ast, dict(zip(head, t)), fdb)
        if not s.is_zero(v):
            yield t, v
