"""Random instance generators shared by the test modules."""
from __future__ import annotations

import math
import random
from typing import Iterator

from signedq.algebra import Semiring
from signedq.errors import UnsafeHypergraph
from signedq.frontend import Literal, Query
from signedq.hypergraph import Edge, SignedHypergraph, is_free_connex
from signedq.storage import Database, Factor, Relation


def random_hypergraph(rng: random.Random, max_vertices: int = 8, max_edges: int = 6) -> SignedHypergraph:
    """A safe signed hypergraph; unsafe draws are repaired with a positive edge."""
    n = rng.randint(1, max_vertices)
    k = rng.randint(1, max_edges)
    edges = []
    for i in range(k):
        size = rng.randint(1, min(n, 4))
        vs = frozenset(rng.sample(range(1, n + 1), size))
        edges.append(Edge(i, vs, rng.random() < 0.55))
    covered = set().union(*(e.vertices for e in edges if e.positive)) if edges else set()
    missing = frozenset(range(1, n + 1)) - covered
    if missing:
        edges.append(Edge(len(edges), missing, True))
    return SignedHypergraph(tuple(range(1, n + 1)), tuple(edges))


def sorted_signed_matrices(n: int, k: int) -> Iterator[list]:
    """Signed incidence matrices with k rows over n vertices, up to symmetry.

    Rows are ``(sign, bit_1..bit_n)`` in nonincreasing order and vertex
    columns are nonincreasing top to bottom.  The row-major maximum over all
    row and vertex-column permutations of any matrix has both properties, so
    every signed hypergraph is represented at least once.
    """
    rows_all = sorted(
        ((sign,) + tuple((m >> (n - 1 - j)) & 1 for j in range(n)) for sign in (0, 1) for m in range(1, 1 << n)),
        reverse=True,
    )
    rows: list = []

    def rec(state: tuple):
        if len(rows) == k:
            yield list(rows)
            return
        for r in rows_all:
            if rows and r > rows[-1]:
                continue
            new_state = list(state)
            ok = True
            for j in range(n - 1):
                if state[j]:
                    continue
                a, b = r[1 + j], r[2 + j]
                if a < b:
                    ok = False
                    break
                if a > b:
                    new_state[j] = True
            if not ok:
                continue
            rows.append(r)
            yield from rec(tuple(new_state))
            rows.pop()

    yield from rec(tuple([False] * max(n - 1, 0)))


def matrix_hypergraph(n: int, rows: list) -> SignedHypergraph | None:
    edges = tuple(
        Edge(i, frozenset(j + 1 for j in range(n) if r[1 + j]), bool(r[0])) for i, r in enumerate(rows)
    )
    try:
        return SignedHypergraph(tuple(range(1, n + 1)), edges)
    except UnsafeHypergraph:
        return None


def exhaustive_hypergraphs(max_vertices: int = 5, max_edges: int = 5) -> Iterator[SignedHypergraph]:
    for n in range(1, max_vertices + 1):
        for k in range(1, max_edges + 1):
            for rows in sorted_signed_matrices(n, k):
                h = matrix_hypergraph(n, rows)
                if h is not None:
                    yield h


# ---------------------------------------------------------------------------
# random queries and databases


def random_query(
    rng: random.Random,
    max_atoms: int = 5,
    max_vars: int = 5,
    neg_prob: float = 0.4,
    full: bool | None = None,
    free_connex: bool = True,
) -> Query:
    """A safe query; by default rejection-sampled until free-connex signed-acyclic."""
    while True:
        nv = rng.randint(1, max_vars)
        na = rng.randint(1, max_atoms)
        names = [f"x{i}" for i in range(1, nv + 1)]
        body = []
        for i in range(na):
            args = rng.sample(names, rng.randint(1, min(nv, 4)))
            positive = i == 0 or rng.random() >= neg_prob
            body.append(Literal(f"R{i}", tuple(args), positive))
        covered = {x for lit in body if lit.positive for x in lit.args}
        used = {x for lit in body for x in lit.args}
        if covered != used:
            continue
        used_names = [x for x in names if x in used]
        if full is True:
            head = list(used_names)
        elif full is False:
            head = rng.sample(used_names, rng.randint(0, len(used_names) - 1)) if len(used_names) > 1 else []
        else:
            head = rng.sample(used_names, rng.randint(0, len(used_names)))
        rng.shuffle(head)
        q = Query("Q", tuple(head), tuple(body))
        if not free_connex or is_free_connex(q.hypergraph, q.free):
            return q


def random_rows(rng: random.Random, arity: int, domain: int, count: int) -> list:
    cap = domain ** arity
    count = min(count, cap)
    rows: dict = {}
    while len(rows) < count:
        rows[tuple(rng.randrange(domain) for _ in range(arity))] = None
    return list(rows)


def random_database(rng: random.Random, q: Query, domain: int | None = None, max_rows: int = 200) -> Database:
    domain = domain or rng.choice((2, 3, 3, 4, 4, 5, 6))
    db = Database()
    for lit, n in zip(q.body, _row_counts(rng, q, max_rows, domain)):
        db.atoms[lit.name] = Relation(lit.args, tuple(random_rows(rng, len(lit.args), domain, n)))
    return db


def _row_counts(rng: random.Random, q: Query, max_rows: int, domain: int) -> list:
    """Dense positive atoms and sparser negated ones, at most ``max_rows`` in total.

    A negated atom never covers more than half of its tuple space, otherwise
    most instances would come out empty.
    """
    per = max(1, max_rows // max(1, len(q.body)))
    out = []
    for lit in q.body:
        if lit.positive:
            out.append(rng.randint(max(1, per // 2), per))
        else:
            out.append(rng.randint(0, min(per // 2, domain ** len(lit.args) // 2)))
    return out


def random_weight(rng: random.Random, s: Semiring, positive: bool, allow_zero: bool = True):
    """Weights that keep products and sums of nonzero values nonzero."""
    if allow_zero and rng.random() < 0.15:
        return s.zero
    name = s.name
    if name == "boolean":
        return True
    if name == "counting":
        return rng.randint(1, 4)
    if name in ("tropical", "max_tropical"):
        return float(rng.randint(0, 6))
    if name == "setunion":
        return frozenset(x for x in range(4) if rng.random() < 0.4)
    raise ValueError(name)


def random_faq_instance(
    rng: random.Random, s: Semiring, max_atoms: int = 5, max_vars: int = 5, max_rows: int = 120
) -> tuple[Query, Database, dict]:
    q = random_query(rng, max_atoms, max_vars)
    domain = rng.randint(2, 5)
    db = Database()
    defaults = {}
    for lit, n in zip(q.body, _row_counts(rng, q, max_rows, domain)):
        rows = random_rows(rng, len(lit.args), domain, n)
        db.atoms[lit.name] = Factor(lit.args, {r: random_weight(rng, s, lit.positive) for r in rows})
        if not lit.positive:
            defaults[lit.name] = random_weight(rng, s, False, allow_zero=False)
    return q, db, defaults


def full_version(q: Query) -> Query:
    return Query(q.head_name, q.variables, q.body, q.semiring, q.defaults)


def tropical_close(a, b) -> bool:
    return a == b or (math.isinf(a) and math.isinf(b) and (a > 0) == (b > 0))


def random_nestfaq(rng: random.Random, s: Semiring, max_vertices: int = 4, domain: int = 3):
    """A random full expression tree with nested guards.

    Guard bodies only use the guard's own vertices, every vertex sits under
    some positive leaf, and stored guard weights are zeroed wherever the body
    is zero, so a nonzero stored weight always sits above a nonzero body.
    """
    from signedq.faq_engine import Const, FaqDatabase, Guard, Leaf, Times, WFactor, evaluate_point

    nv = rng.randint(1, max_vertices)
    factors: dict = {}
    fdb = FaqDatabase(s, factors)

    def table(vs: tuple) -> dict:
        rows = random_rows(rng, len(vs), domain, rng.randint(1, domain ** len(vs)))
        return {r: random_weight(rng, s, True) for r in rows}

    def build(scope: list, depth: int) -> Times:
        children = []
        for _ in range(rng.randint(1, 3)):
            vs = tuple(sorted(rng.sample(scope, rng.randint(1, len(scope)))))
            name = f"F{len(factors)}"
            if depth < 3 and rng.random() < 0.5:
                factors[name] = WFactor(vs, table(vs), False)
                children.append(Guard(name, build(list(vs), depth + 1)))
            else:
                factors[name] = WFactor(vs, table(vs), True)
                children.append(Leaf(name))
        if rng.random() < 0.3:
            children.append(Const(random_weight(rng, s, True, allow_zero=False)))
        return Times(tuple(children))

    ast = build(list(range(1, nv + 1)), 0)
    covered = {v for f in factors.values() if f.positive for v in f.vars}
    missing = tuple(v for v in range(1, nv + 1) if v not in covered)
    if missing:
        factors["Fcover"] = WFactor(missing, table(missing), True)
        ast = Times(ast.children + (Leaf("Fcover"),))

    def settle(node) -> None:
        if isinstance(node, Times):
            for c in node.children:
                settle(c)
        elif isinstance(node, Guard):
            settle(node.body)
            f = factors[node.factor]
            for key, w in f.table.items():
                if not s.is_zero(w) and s.is_zero(evaluate_point(node.body, dict(zip(f.vars, key)), fdb)):
                    f.table[key] = s.zero

    settle(ast)
    return ast, fdb, tuple(range(1, nv + 1))


def guard_depth(node) -> int:
    from signedq.faq_engine import Guard, Times

    if isinstance(node, Times):
        return max((guard_depth(c) for c in node.children), default=0)
    if isinstance(node, Guard):
        return 1 + guard_depth(node.body)
    return 0
