"""Enumeration and semiring aggregation for signed-acyclic conjunctive queries."""
from .algebra import Semiring, instance
from .cq_engine import enumerate_free_connex, preprocess
from .diff import enumerate_diff
from .faq_engine import enumerate_faq
from .frontend import Query, parse_file, parse_query
from .hypergraph import SignedHypergraph, elimination_sequence
from .storage import Database, load_dir

__all__ = [
    "Database",
    "Query",
    "Semiring",
    "SignedHypergraph",
    "elimination_sequence",
    "enumerate_diff",
    "enumerate_faq",
    "enumerate_free_connex",
    "instance",
    "load_dir",
    "parse_file",
    "parse_query",
    "preprocess",
]
