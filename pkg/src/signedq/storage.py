"""Relations, weighted factors, CSV loading and hash-based relational operators.

Domain values are interned per variable: each distinct string seen for a
variable gets the next integer id.  Everything downstream works on those ids,
and the first-seen order doubles as the fixed value order the range-sum
arrays need.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .algebra import Semiring
from .errors import DuplicateFactorKey, ParseError, SchemaMismatch
from .instrument import COUNTER


class Interner:
    """Bidirectional map between strings and dense ids (first-seen order)."""

    def __init__(self) -> None:
        self._ids: dict[str, int] = {}
        self._values: list[str] = []

    def intern(self, value: str) -> int:
        i = self._ids.get(value)
        if i is None:
            i = len(self._values)
            self._ids[value] = i
            self._values.append(value)
        return i

    def lookup(self, value: str) -> int | None:
        return self._ids.get(value)

    def value(self, i: int) -> str:
        return self._values[i]

    def __len__(self) -> int:
        return len(self._values)


def _positions(schema: Sequence, vars_: Sequence) -> tuple[int, ...]:
    index = {v: i for i, v in enumerate(schema)}
    try:
        return tuple(index[v] for v in vars_)
    except KeyError as exc:
        raise SchemaMismatch(f"variable {exc.args[0]!r} not in schema {tuple(schema)}") from None


@dataclass(frozen=True)
class Relation:
    """Duplicate-free list of rows; row order is the insertion order."""

    schema: tuple
    rows: tuple = ()
    _set: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(set(self.schema)) != len(self.schema):
            raise SchemaMismatch(f"duplicate variables in schema {self.schema}")
        k = len(self.schema)
        for r in self.rows:
            if len(r) != k:
                raise SchemaMismatch(f"row {r} does not match schema {self.schema}")
        rows = tuple(dict.fromkeys(self.rows))
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "_set", frozenset(rows))

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __contains__(self, row) -> bool:
        return row in self._set

    def as_set(self) -> frozenset:
        return self._set


@dataclass(frozen=True)
class Factor:
    """Listing representation of a weighted atom.

    ``table`` may hold zero weights.  ``default`` is the off-table constant of
    a negated factor; positive factors leave it ``None`` (off-table means zero).
    """

    schema: tuple
    table: Mapping
    default: Any = None

    def __post_init__(self) -> None:
        if len(set(self.schema)) != len(self.schema):
            raise SchemaMismatch(f"duplicate variables in schema {self.schema}")
        for key in self.table:
            if len(key) != len(self.schema):
                raise SchemaMismatch(f"key {key} does not match schema {self.schema}")

    def __len__(self) -> int:
        return len(self.table)

    @property
    def rows(self) -> tuple:
        return tuple(self.table)

    def relation(self) -> Relation:
        return Relation(self.schema, tuple(self.table))


@dataclass
class Database:
    atoms: dict = field(default_factory=dict)
    interners: dict = field(default_factory=dict)

    def interner(self, var: str) -> Interner:
        it = self.interners.get(var)
        if it is None:
            it = self.interners[var] = Interner()
        return it

    def __getitem__(self, name: str):
        return self.atoms[name]

    def __contains__(self, name: str) -> bool:
        return name in self.atoms

    def size(self) -> int:
        return sum(len(a) for a in self.atoms.values())

    def decode(self, vars_: Sequence[str], row: Sequence[int]) -> tuple:
        return tuple(self.interners[v].value(x) for v, x in zip(vars_, row))

    def encode(self, vars_: Sequence[str], row: Sequence[str]) -> tuple:
        return tuple(self.interner(v).intern(x) for v, x in zip(vars_, row))


# ---------------------------------------------------------------------------
# CSV


def load_csv(
    path: str | Path,
    schema: Sequence[str],
    weighted: bool = False,
    semiring: Semiring | None = None,
    db: Database | None = None,
) -> Relation | Factor:
    """Read a relation (or a weighted factor) whose columns bind ``schema``.

    The header must have one column per schema variable, plus a trailing
    ``weight`` column when ``weighted``.  Values are interned through ``db``.
    """
    db = db if db is not None else Database()
    schema = tuple(schema)
    if weighted and semiring is None:
        raise ValueError("weighted files need a semiring")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{path}: missing header row") from None
        width = len(schema) + (1 if weighted else 0)
        if len(header) != width:
            raise ParseError(f"{path}: header has {len(header)} columns, expected {width}")
        if weighted and header[-1].lower() != "weight":
            raise ParseError(f"{path}: last column of a weighted file must be 'weight'")
        interners = [db.interner(v) for v in schema]
        rows: list = []
        table: dict = {}
        for lineno, raw in enumerate(reader, start=2):
            if not raw or all(not c.strip() for c in raw):
                continue
            if len(raw) != width:
                raise ParseError(f"{path}:{lineno}: expected {width} fields, got {len(raw)}")
            key = tuple(it.intern(c.strip()) for it, c in zip(interners, raw))
            if weighted:
                w = semiring.parse(raw[-1])
                if key in table:
                    raise DuplicateFactorKey(f"{path}:{lineno}: key {tuple(raw[:-1])} repeated")
                table[key] = w
            else:
                rows.append(key)
    if weighted:
        return Factor(schema, table)
    return Relation(schema, tuple(rows))


def csv_has_weight(path: str | Path) -> bool:
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), [])
    return bool(header) and header[-1].strip().lower() == "weight"


# ---------------------------------------------------------------------------
# relational operators


def project(r: Relation, vars_: Sequence) -> Relation:
    pos = _positions(r.schema, vars_)
    COUNTER.ops += len(r.rows)
    return Relation(tuple(vars_), tuple(tuple(row[i] for i in pos) for row in r.rows))


def _probe(r: Relation, s: Relation) -> tuple[tuple[int, ...], frozenset]:
    pos = _positions(r.schema, s.schema)
    COUNTER.ops += len(r.rows) + len(s.rows)
    return pos, s.as_set()


def semijoin(r: Relation, s: Relation) -> Relation:
    pos, keys = _probe(r, s)
    return Relation(r.schema, tuple(row for row in r.rows if tuple(row[i] for i in pos) in keys))


def antijoin(r: Relation, s: Relation) -> Relation:
    pos, keys = _probe(r, s)
    return Relation(r.schema, tuple(row for row in r.rows if tuple(row[i] for i in pos) not in keys))


def load_dir(
    data_dir: str | Path,
    atoms: Sequence[tuple[str, Sequence[str]]],
    semiring: Semiring | None = None,
    db: Database | None = None,
) -> Database:
    """Load ``<name>.csv`` for every ``(name, args)``.

    With a semiring, files ending in a ``weight`` column become factors;
    other files stay plain relations either way.
    """
    db = db if db is not None else Database()
    for name, args in atoms:
        path = Path(data_dir) / f"{name}.csv"
        if not path.exists():
            raise ParseError(f"no data file for atom {name} at {path}")
        weighted = semiring is not None and csv_has_weight(path)
        db.atoms[name] = load_csv(path, args, weighted=weighted, semiring=semiring, db=db)
    return db
