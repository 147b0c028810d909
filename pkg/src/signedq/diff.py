"""Difference of two full conjunctive queries.

``Q1 - Q2`` is the union, over the atoms ``R_e`` of ``Q2``, of the branches
``Q1 and not R_e``.  Each branch is a full signed-acyclic query when ``Q1`` is
acyclic and stays acyclic with any single ``R_e`` added.  Branch outputs can
overlap, so the union keeps a seen-set.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .cq_engine import preprocess
from .errors import StructureViolation
from .frontend import Literal, Query
from .hypergraph import is_alpha_acyclic
from .storage import Database


@dataclass(frozen=True)
class Branch:
    query: Query
    source: str
    alias: str


def rewrite_diff(q1: Query, q2: Query) -> list[Branch]:
    if not (q1.is_full and q2.is_full):
        raise StructureViolation("both queries must be full")
    if set(q1.variables) != set(q2.variables):
        raise StructureViolation("queries must range over the same variables")
    for q in (q1, q2):
        if any(not lit.positive for lit in q.body):
            raise StructureViolation(f"{q.head_name} must not contain negated atoms")
    pos = [frozenset(lit.args) for lit in q1.body]
    if not is_alpha_acyclic(pos)[0]:
        raise StructureViolation(f"{q1.head_name} is not acyclic")
    taken = {lit.name for lit in q1.body}
    out = []
    for lit in q2.body:
        if not is_alpha_acyclic(pos + [frozenset(lit.args)])[0]:
            raise StructureViolation(f"adding {lit.name} to {q1.head_name} creates a cycle")
        alias = lit.name
        while alias in taken:
            alias += "_"
        body = q1.body + (Literal(alias, lit.args, False),)
        out.append(Branch(Query(q1.head_name, q1.head_vars, body), lit.name, alias))
    return out


def enumerate_diff(q1: Query, q2: Query, db: Database) -> Iterator[tuple]:
    """Tuples of ``Q1(D) - Q2(D)`` in ``q1``'s head order, each once."""
    branches = rewrite_diff(q1, q2)
    if not branches:
        yield from _all(q1, db)
        return
    streams = []
    for b in branches:
        view = Database(dict(db.atoms), db.interners)
        view.atoms[b.alias] = db[b.source]
        pl, pre = preprocess(b.query, view)
        pos = [pl.free_order.index(x) for x in b.query.free]
        streams.append((pre.enumerate(len(pos)), pos))
    seen: set = set()
    while streams:
        alive = []
        for it, pos in streams:
            t = next(it, None)
            if t is None:
                continue
            alive.append((it, pos))
            out = tuple(t[i] for i in pos)
            if out not in seen:
                seen.add(out)
                yield out
        streams = alive


def _all(q: Query, db: Database) -> Iterator[tuple]:
    pl, pre = preprocess(q, db)
    pos = [pl.free_order.index(x) for x in q.free]
    for t in pre.enumerate(len(pos)):
        yield tuple(t[i] for i in pos)
