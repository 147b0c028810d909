"""Brute-force reference evaluators and the inclusion-exclusion counter.

Nothing here shares code with the engines beyond the data containers: the
evaluators walk every assignment over the active domains and apply the
query semantics directly.
"""
from __future__ import annotations

from itertools import combinations

from .algebra import COUNTING, Semiring, instance
from .errors import MissingDefault, NotSignedAcyclic, TooLarge, TooManyNegativeEdges
from .frontend import Literal, Query
from .hypergraph import DEFINITION_GUARD, is_alpha_acyclic
from .storage import Database, Factor

LIMIT = 10**7


def _rows(obj) -> tuple:
    return tuple(obj.table) if isinstance(obj, Factor) else obj.rows


def _domains(q: Query, db: Database) -> dict:
    dom: dict = {x: set() for x in q.variables}
    for lit in q.body:
        for row in _rows(db[lit.name]):
            for x, val in zip(lit.args, row):
                dom[x].add(val)
    return {x: sorted(vals) for x, vals in dom.items()}


def _assignments(q: Query, db: Database, check):
    """Backtracking over active domains; ``check(lit, row)`` prunes as soon as
    every variable of a literal is bound."""
    dom = _domains(q, db)
    total = 1
    for vals in dom.values():
        total *= max(len(vals), 1)
    if total > LIMIT:
        raise TooLarge(f"{total} assignments exceed the brute-force limit {LIMIT}")
    order = list(q.variables)
    ready: list[list] = [[] for _ in order]
    for lit in q.body:
        last = max(order.index(x) for x in lit.args)
        ready[last].append(lit)
    asg: dict = {}

    def rec(i: int):
        if i == len(order):
            yield dict(asg)
            return
        x = order[i]
        for val in dom[x]:
            asg[x] = val
            if all(check(lit, tuple(asg[y] for y in lit.args)) for lit in ready[i]):
                yield from rec(i + 1)
        asg.pop(x, None)

    yield from rec(0)


def brute_force_cq(q: Query, db: Database) -> set:
    """Answers as tuples of value ids in head-variable order."""
    sets = {lit.name: frozenset(_rows(db[lit.name])) for lit in q.body}

    def check(lit: Literal, row: tuple) -> bool:
        return (row in sets[lit.name]) == lit.positive

    return {tuple(a[x] for x in q.head_vars) for a in _assignments(q, db, check)}


def brute_force_faq(
    q: Query,
    db: Database,
    s: Semiring | None = None,
    defaults: dict | None = None,
) -> dict:
    """Map head tuple -> nonzero weight.

    The weight of a full assignment multiplies every positive atom's weight
    (zero when absent, one for unweighted files) and every negated atom's
    stored weight when present (zero for unweighted files) or its default.
    """
    s = s or instance(q.semiring_name)
    raw = q.default_map
    consts: dict = {}
    tables: dict = {}
    for lit in q.body:
        obj = db[lit.name]
        if isinstance(obj, Factor):
            tables[lit.name] = dict(obj.table)
        else:
            tables[lit.name] = {r: (s.one if lit.positive else s.zero) for r in obj.rows}
        if not lit.positive:
            if defaults is not None and lit.name in defaults:
                consts[lit.name] = defaults[lit.name]
            elif lit.name in raw:
                consts[lit.name] = s.parse(raw[lit.name])
            else:
                raise MissingDefault(lit.name)

    def check(lit: Literal, row: tuple) -> bool:
        if lit.positive:
            return row in tables[lit.name] and not s.is_zero(tables[lit.name][row])
        return True

    out: dict = {}
    for a in _assignments(q, db, check):
        w = s.one
        for lit in q.body:
            row = tuple(a[x] for x in lit.args)
            t = tables[lit.name]
            if lit.positive:
                w = s.times(w, t.get(row, s.zero))
            elif row in t:
                w = s.times(w, t[row])
            else:
                w = s.times(w, consts[lit.name])
        key = tuple(a[x] for x in q.head_vars)
        out[key] = s.plus(out[key], w) if key in out else w
    return {k: v for k, v in out.items() if not s.is_zero(v)}


def brute_force_ast(ast, fdb, free: tuple, domains: dict | None = None) -> dict:
    """Fold an expression tree over every assignment of its vertices.

    ``domains`` defaults to the values seen in each vertex's factor columns.
    """
    from . import faq_engine as fe

    s = fdb.semiring
    names = list(fe.factor_names(ast))
    verts: set = set()
    for n in names:
        verts.update(fdb[n].vars)
    if domains is None:
        domains = {v: set() for v in verts}
        for n in names:
            f = fdb[n]
            for key in f.table:
                for v, x in zip(f.vars, key):
                    domains[v].add(x)
        domains = {v: sorted(xs) for v, xs in domains.items()}
    order = sorted(verts)
    total = 1
    for v in order:
        total *= max(len(domains[v]), 1)
    if total > LIMIT:
        raise TooLarge(f"{total} assignments exceed the brute-force limit {LIMIT}")

    def value(node, a):
        if isinstance(node, fe.Times):
            acc = s.one
            for c in node.children:
                acc = s.times(acc, value(c, a))
            return acc
        if isinstance(node, fe.Const):
            return node.value
        f = fdb[node.factor]
        key = tuple(a[v] for v in f.vars)
        if isinstance(node, fe.Leaf):
            return f.table[key] if key in f.table else s.zero
        if key in f.table:
            return f.table[key]
        return value(node.body, a)

    out: dict = {}
    asg: dict = {}

    def rec(i: int):
        if i == len(order):
            w = value(ast, asg)
            key = tuple(asg[v] for v in free)
            out[key] = s.plus(out[key], w) if key in out else w
            return
        for x in domains[order[i]]:
            asg[order[i]] = x
            rec(i + 1)

    rec(0)
    return {k: v for k, v in out.items() if not s.is_zero(v)}


def _positive_count(q: Query, db: Database) -> int:
    from .faq_engine import enumerate_faq

    out = list(enumerate_faq(q, db, COUNTING))
    return out[0][1] if out else 0


def count_inclusion_exclusion(q: Query, db: Database) -> int:
    """Number of satisfying assignments of the full body.

    Sums ``(-1)^|S| * #Q_S`` over every subset ``S`` of the negated atoms,
    where ``Q_S`` keeps the positive atoms plus ``S`` made positive.  Each
    ``#Q_S`` is computed by the counting-semiring aggregation with no free
    variables.
    """
    pos = [lit for lit in q.body if lit.positive]
    neg = [lit for lit in q.body if not lit.positive]
    if len(neg) > DEFINITION_GUARD:
        raise TooManyNegativeEdges(f"{len(neg)} negated atoms (limit {DEFINITION_GUARD})")
    total = 0
    for k in range(len(neg) + 1):
        for subset in combinations(neg, k):
            body = tuple(pos) + tuple(Literal(l.name, l.args, True) for l in subset)
            edges = [frozenset(l.args) for l in body]
            ok, _ = is_alpha_acyclic(edges)
            if not ok:
                raise NotSignedAcyclic(f"adding {[l.name for l in subset]} makes the query cyclic")
            qs = Query("Qs", (), body)
            c = _positive_count(qs, db)
            total += -c if k % 2 else c
    return total


def count_faq(q: Query, db: Database) -> int:
    """Full-body count through the counting semiring with zero-weight negations."""
    from .faq_engine import enumerate_faq

    qb = Query(q.head_name, (), q.body)
    defaults = {lit.name: 1 for lit in q.body if not lit.positive}
    out = list(enumerate_faq(qb, db, COUNTING, defaults=defaults))
    return out[0][1] if out else 0


def count_answers_faq(q: Query, db: Database) -> int:
    """Distinct head answers: nonzero points of the counting aggregation."""
    from .faq_engine import enumerate_faq

    defaults = {lit.name: 1 for lit in q.body if not lit.positive}
    return sum(1 for _ in enumerate_faq(q, db, COUNTING, defaults=defaults))
