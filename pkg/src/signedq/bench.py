"""Synthetic scaling workloads and measurement helpers for the ``bench`` command.

The ``example31`` family instantiates the running four-variable query with a
pivot ``U(x3, x4)`` and two nested negated atoms above it.  Every relation
grows linearly with the requested size, so preprocessing work should double
when the size doubles while the per-answer work stays flat.
"""
from __future__ import annotations

import os
import random
import time
from dataclasses import dataclass

from .algebra import instance
from .cq_engine import preprocess
from .errors import GeneratorError
from .faq_engine import enumerate_faq
from .frontend import Query, parse_query
from .instrument import COUNTER
from .storage import Database, Factor, Relation

EXAMPLE31 = "Q(x1, x2, x3, x4) :- A(x1, x2, x3), U(x3, x4), !V(x4), !R(x2, x3, x4), !S(x1, x2, x3, x4).\n"
EXAMPLE31_FAQ = (
    "@semiring counting\n@default V = 1\n@default R = 1\n@default S = 1\n"
    "Q(x1, x2) :- A(x1, x2, x3), U(x3, x4), !V(x4), !R(x2, x3, x4), !S(x1, x2, x3, x4).\n"
)
FAMILIES = ("example31",)


def default_seed() -> int:
    raw = os.environ.get("SQ_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise GeneratorError(f"SQ_SEED must be an integer, got {raw!r}") from None


def _intern(db: Database, var: str, label: str) -> int:
    return db.interner(var).intern(label)


def generate(family: str, size: int, seed: int | None = None, weighted: bool = False) -> tuple[Query, Database]:
    """Instance of roughly ``size`` rows in total."""
    if family not in FAMILIES:
        raise GeneratorError(f"unknown family {family!r}; choose from {FAMILIES}")
    if size < 0:
        raise GeneratorError("size must be nonnegative")
    rng = random.Random(default_seed() if seed is None else seed)
    q = parse_query(EXAMPLE31_FAQ if weighted else EXAMPLE31)
    db = Database()
    # A, U, R and S get ``per`` rows each and V an eighth of that
    per = size * 8 // 33
    fan = 8
    nc = max(1, per // fan)
    nd = max(1, per // 2)

    def a(i):
        return _intern(db, "x1", f"a{i}")

    def b(i):
        return _intern(db, "x2", f"b{i}")

    def c(i):
        return _intern(db, "x3", f"c{i}")

    def d(i):
        return _intern(db, "x4", f"d{i}")

    a_rows = [(a(i), b(i), c(i % nc)) for i in range(per)]
    u_rows = []
    for j in range(nc):
        for t in range(fan):
            if len(u_rows) < per:
                u_rows.append((c(j), d((j * fan + t) % nd)))
    v_rows = [(d(rng.randrange(nd)),) for _ in range(per // 8)] if per else []
    r_rows = []
    s_rows = []
    for _ in range(per):
        i = rng.randrange(per)
        cj = i % nc
        dl = (cj * fan + rng.randrange(fan)) % nd
        r_rows.append((b(i), c(cj), d(dl)))
        i = rng.randrange(per)
        cj = i % nc
        dl = (cj * fan + rng.randrange(fan)) % nd
        s_rows.append((a(i), b(i), c(cj), d(dl)))

    if weighted:
        def weights(rows, lo):
            return {r: rng.randint(lo, 3) for r in rows}

        db.atoms["A"] = Factor(("x1", "x2", "x3"), weights(a_rows, 1))
        db.atoms["U"] = Factor(("x3", "x4"), weights(u_rows, 1))
        db.atoms["V"] = Factor(("x4",), weights(v_rows, 0))
        db.atoms["R"] = Factor(("x2", "x3", "x4"), weights(r_rows, 0))
        db.atoms["S"] = Factor(("x1", "x2", "x3", "x4"), weights(s_rows, 0))
    else:
        db.atoms["A"] = Relation(("x1", "x2", "x3"), tuple(a_rows))
        db.atoms["U"] = Relation(("x3", "x4"), tuple(u_rows))
        db.atoms["V"] = Relation(("x4",), tuple(v_rows))
        db.atoms["R"] = Relation(("x2", "x3", "x4"), tuple(r_rows))
        db.atoms["S"] = Relation(("x1", "x2", "x3", "x4"), tuple(s_rows))
    return q, db


@dataclass
class Measurement:
    size: int
    preprocess_ns: int
    preprocess_ops: int
    answers: int
    max_delay_ns: int
    mean_delay_ns: float
    max_delay_probes: int
    mean_delay_probes: float

    HEADER = (
        "size", "preprocess_ns", "preprocess_ops", "answers",
        "max_delay_ns", "mean_delay_ns", "max_delay_probes", "mean_delay_probes",
    )

    def row(self) -> tuple:
        return (
            self.size, self.preprocess_ns, self.preprocess_ops, self.answers,
            self.max_delay_ns, round(self.mean_delay_ns, 1),
            self.max_delay_probes, round(self.mean_delay_probes, 3),
        )


def measure_cq(q: Query, db: Database) -> Measurement:
    """Preprocess once, then time and probe-count every gap between answers."""
    COUNTER.reset()
    t0 = time.perf_counter_ns()
    _, pre = preprocess(q, db)
    prep_ns = time.perf_counter_ns() - t0
    prep_ops = COUNTER.ops
    COUNTER.reset()
    gaps_ns: list = []
    gaps_probes: list = []
    it = pre.enumerate(len(q.free))
    last_t = time.perf_counter_ns()
    last_p = 0
    answers = 0
    while True:
        t = next(it, None)
        now = time.perf_counter_ns()
        gaps_ns.append(now - last_t)
        gaps_probes.append(COUNTER.probes - last_p)
        last_t, last_p = now, COUNTER.probes
        if t is None:
            break
        answers += 1
    return Measurement(
        db.size(), prep_ns, prep_ops, answers,
        max(gaps_ns), sum(gaps_ns) / len(gaps_ns),
        max(gaps_probes), sum(gaps_probes) / len(gaps_probes),
    )


def aggregate_ops(q: Query, db: Database, backend: str | None = None) -> int:
    """Work units spent by the aggregation pipeline, enumeration included."""
    s = instance(q.semiring_name)
    COUNTER.reset()
    for _ in enumerate_faq(q, db, s, backend):
        pass
    return COUNTER.ops
