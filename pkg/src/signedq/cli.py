"""Command-line entry point (``signedq``).

Exit codes: 0 success, 1 query outside the supported class or an
``--oracle`` mismatch, 2 malformed input.
"""
from __future__ import annotations

import csv
import sys
from itertools import islice

import click

from . import bench as bench_mod
from . import cq_engine, diff as diff_mod, faq_engine, oracle
from .algebra import instance, names as semiring_names
from .errors import (
    FreeConnexViolation,
    GeneratorError,
    NotSignedAcyclic,
    ParseError,
    QueryError,
    SignedQError,
    StructureViolation,
    TooManyNegativeEdges,
)
from .frontend import Query, parse_file
from .hypergraph import (
    DEFINITION_GUARD,
    is_alpha_acyclic,
    is_free_connex,
    is_signed_acyclic_greedy,
    signed_cycle_witness,
    elimination_sequence,
)
from .rangesum import BACKENDS
from .storage import Database, load_dir

EXIT_OK, EXIT_UNSUPPORTED, EXIT_INPUT = 0, 1, 2


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_query(path: str) -> Query:
    try:
        return parse_file(path)
    except QueryError as exc:
        _fail(f"{path}: {exc}", EXIT_INPUT)
    except OSError as exc:
        _fail(str(exc), EXIT_INPUT)


def _load_data(q: Query, data_dir: str, semiring=None, db: Database | None = None) -> Database:
    try:
        return load_dir(data_dir, [(lit.name, lit.args) for lit in q.body], semiring, db)
    except (ParseError, OSError) as exc:
        _fail(str(exc), EXIT_INPUT)
    except SignedQError as exc:
        _fail(str(exc), EXIT_INPUT)


def _writer():
    return csv.writer(sys.stdout, lineterminator="\n")


def _decode(db: Database, vars_, t) -> list:
    return list(db.decode(vars_, t))


@click.group()
def main() -> None:
    """Evaluate conjunctive queries with negation over CSV data."""


@main.command()
@click.argument("query_file", type=click.Path(dir_okay=False))
def analyze(query_file: str) -> None:
    """Report acyclicity, free-connexity and an elimination order."""
    q = _load_query(query_file)
    h = q.hypergraph
    name = {i: x for x, i in q.vertex.items()}
    click.echo("safe: yes")
    click.echo(f"alpha-acyclic (positive atoms): {'yes' if is_alpha_acyclic([e.vertices for e in h.pos_edges])[0] else 'no'}")
    acyclic = is_signed_acyclic_greedy(h)
    click.echo(f"signed-acyclic: {'yes' if acyclic else 'no'}")
    free = set(q.free)
    connex = is_free_connex(h, free)
    click.echo(f"free-connex: {'yes' if connex else 'no'}")
    if not connex:
        aug = h.with_negative_edge(free) if free and free != set(h.vertices) else h
        if len(aug.neg_edges) <= DEFINITION_GUARD:
            wit = signed_cycle_witness(aug)
            if wit is not None:
                labels = [aug.edge(i).atom or "<free variables>" for i in wit]
                click.echo(f"witness: positive atoms with {{{', '.join(labels)}}} form a cycle")
        sys.exit(EXIT_UNSUPPORTED)
    aug = h.with_negative_edge(free) if free and free != set(h.vertices) else h
    seq = elimination_sequence(aug, prefix=free)
    click.echo("sequence: (" + ", ".join(name[v] for v in seq.order) + ")")
    for v, w in seq.steps():
        pivot = aug.edge(w.pivot).atom
        chain = [aug.edge(c).atom or "<free variables>" for c in w.chain]
        click.echo(f"  eliminate {name[v]}: pivot {pivot}, chain [{', '.join(chain)}]")
    summary = ["signed-acyclic" if acyclic else "not signed-acyclic", "free-connex"]
    click.echo(f"{'; '.join(summary)}; σ=(" + ",".join(name[v] for v in seq.order) + ")")


@main.command()
@click.argument("query_file", type=click.Path(dir_okay=False))
@click.argument("data_dir", type=click.Path(file_okay=False))
@click.option("--limit", type=int, default=None, help="Stop after N answers.")
@click.option("--oracle", "check", is_flag=True, help="Cross-check against brute force.")
def enumerate(query_file: str, data_dir: str, limit, check: bool) -> None:
    """Print the answers as CSV rows."""
    q = _load_query(query_file)
    db = _load_data(q, data_dir)
    try:
        stream = cq_engine.enumerate_free_connex(q, db)
        rows = list(islice(stream, limit) if limit is not None else stream)
    except FreeConnexViolation as exc:
        _fail(str(exc), EXIT_UNSUPPORTED)
    if check:
        expected = oracle.brute_force_cq(q, db)
        got = set(rows)
        bad = len(got) != len(rows) or not got <= expected or (limit is None and got != expected)
        if bad:
            _fail("engine output differs from brute force", EXIT_UNSUPPORTED)
    w = _writer()
    w.writerow(q.head_vars)
    for t in rows:
        w.writerow(_decode(db, q.head_vars, t))


@main.command()
@click.argument("query_file", type=click.Path(dir_okay=False))
@click.argument("data_dir", type=click.Path(file_okay=False))
@click.option("--semiring", "sr", type=click.Choice(semiring_names()), default=None)
@click.option("--backend", type=click.Choice(BACKENDS), default=None, help="Force a range-sum backend.")
@click.option("--limit", type=int, default=None)
@click.option("--oracle", "check", is_flag=True)
def aggregate(query_file: str, data_dir: str, sr, backend, limit, check: bool) -> None:
    """Print nonzero aggregated answers with a trailing weight column."""
    q = _load_query(query_file)
    s = instance(sr or q.semiring_name)
    db = _load_data(q, data_dir, s)
    try:
        stream = faq_engine.enumerate_faq(q, db, s, backend)
        rows = list(islice(stream, limit) if limit is not None else stream)
    except FreeConnexViolation as exc:
        _fail(str(exc), EXIT_UNSUPPORTED)
    except (SignedQError, ValueError) as exc:
        _fail(str(exc), EXIT_INPUT)
    if check:
        expected = oracle.brute_force_faq(q, db, s)
        got = dict(rows)
        bad = len(got) != len(rows) or any(expected.get(k) != v for k, v in got.items())
        if limit is None and got != expected:
            bad = True
        if bad:
            _fail("aggregation differs from brute force", EXIT_UNSUPPORTED)
    w = _writer()
    w.writerow(list(q.head_vars) + ["weight"])
    for t, v in rows:
        w.writerow(_decode(db, q.head_vars, t) + [s.format(v)])


@main.command()
@click.argument("query_file", type=click.Path(dir_okay=False))
@click.argument("data_dir", type=click.Path(file_okay=False))
@click.option("--oracle", "check", is_flag=True)
def count(query_file: str, data_dir: str, check: bool) -> None:
    """Print the number of answers.

    Full queries are counted by inclusion-exclusion over the negated atoms;
    other queries count the nonzero points of the counting aggregation.
    """
    q = _load_query(query_file)
    db = _load_data(q, data_dir)
    try:
        if q.is_full:
            n = oracle.count_inclusion_exclusion(q, db)
        else:
            n = oracle.count_answers_faq(q, db)
    except (NotSignedAcyclic, FreeConnexViolation, TooManyNegativeEdges) as exc:
        _fail(str(exc), EXIT_UNSUPPORTED)
    if check and n != len(oracle.brute_force_cq(q, db)):
        _fail("count differs from brute force", EXIT_UNSUPPORTED)
    click.echo(n)


@main.command()
@click.argument("q1_file", type=click.Path(dir_okay=False))
@click.argument("q2_file", type=click.Path(dir_okay=False))
@click.argument("data_dir", type=click.Path(file_okay=False))
@click.option("--limit", type=int, default=None)
@click.option("--oracle", "check", is_flag=True)
def diff(q1_file: str, q2_file: str, data_dir: str, limit, check: bool) -> None:
    """Print the tuples of Q1 that are not answers of Q2."""
    q1 = _load_query(q1_file)
    q2 = _load_query(q2_file)
    db = _load_data(q1, data_dir)
    db = _load_data(q2, data_dir, db=db)
    try:
        stream = diff_mod.enumerate_diff(q1, q2, db)
        rows = list(islice(stream, limit) if limit is not None else stream)
    except StructureViolation as exc:
        _fail(str(exc), EXIT_UNSUPPORTED)
    if check:
        q2_in_q1 = {tuple(t[q2.head_vars.index(x)] for x in q1.head_vars) for t in oracle.brute_force_cq(q2, db)}
        expected = oracle.brute_force_cq(q1, db) - q2_in_q1
        got = set(rows)
        if len(got) != len(rows) or not got <= expected or (limit is None and got != expected):
            _fail("difference differs from brute force", EXIT_UNSUPPORTED)
    w = _writer()
    w.writerow(q1.head_vars)
    for t in rows:
        w.writerow(_decode(db, q1.head_vars, t))


@main.command()
@click.option("--family", default="example31", show_default=True, help="Synthetic workload family.")
@click.option("--sizes", default="1000,2000,4000", show_default=True, help="Comma-separated total sizes.")
@click.option("--seed", type=int, default=None, help="Generator seed (default: SQ_SEED or 0).")
def bench(family: str, sizes: str, seed) -> None:
    """Measure preprocessing and per-answer delay on a scaling family."""
    try:
        ns = [int(x) for x in sizes.split(",") if x.strip()]
    except ValueError:
        _fail(f"bad --sizes {sizes!r}", EXIT_INPUT)
    w = _writer()
    w.writerow(bench_mod.Measurement.HEADER)
    try:
        for n in sorted(ns):
            q, db = bench_mod.generate(family, n, seed)
            w.writerow(bench_mod.measure_cq(q, db).row())
    except GeneratorError as exc:
        _fail(str(exc), EXIT_INPUT)


if __name__ == "__main__":
    main()
