"""Semigroup range sums, array decompositions and the oracle family builder.

Three backends answer ``plus`` over a closed index range in O(1):

* ``prefix_sum`` needs an additive inverse (prefix differences),
* ``sparse_table`` answers with two overlapping blocks when ``plus`` is
  idempotent, and with O(log w) disjoint power-of-two blocks otherwise,
* ``disjoint_sparse_table`` works for any semigroup at O(w log w) build.

An :class:`ArrayDecomposition` cuts the positions ``1..w`` into contiguous
blocks, each carrying the sum over its block.  Queries are only legal when
both ends fall on block boundaries ("break points").
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .algebra import Semiring
from .errors import MisalignedRange, UnknownKey
from .instrument import COUNTER

_MISSING = object()
BACKENDS = ("prefix_sum", "sparse_table", "disjoint_sparse_table")


class PrefixSum:
    kind = "prefix_sum"

    def __init__(self, values: Sequence, s: Semiring):
        if not s.has_additive_inverse:
            raise ValueError(f"prefix_sum needs an additive inverse, {s.name} has none")
        self.s = s
        pre = [s.zero]
        for v in values:
            pre.append(s.plus(pre[-1], v))
        self.pre = pre
        COUNTER.ops += len(values) + 1

    def __len__(self) -> int:
        return len(self.pre) - 1

    def query(self, lo: int, hi: int):
        """Sum of ``values[lo..hi]`` (0-based, inclusive); empty when lo > hi."""
        COUNTER.ops += 1
        if lo > hi:
            return self.s.zero
        return self.s.plus(self.pre[hi + 1], self.s.neg(self.pre[lo]))


class SparseTable:
    kind = "sparse_table"

    def __init__(self, values: Sequence, s: Semiring):
        self.s = s
        self.n = len(values)
        table = [list(values)]
        j = 1
        while (1 << j) <= self.n:
            prev = table[-1]
            half = 1 << (j - 1)
            table.append([s.plus(prev[i], prev[i + half]) for i in range(self.n - (1 << j) + 1)])
            j += 1
        self.table = table
        COUNTER.ops += sum(len(row) for row in table)

    def __len__(self) -> int:
        return self.n

    def query(self, lo: int, hi: int):
        COUNTER.ops += 1
        if lo > hi:
            return self.s.zero
        if not self.s.plus_idempotent:
            acc = self.s.zero
            while lo <= hi:
                j = (hi - lo + 1).bit_length() - 1
                acc = self.s.plus(acc, self.table[j][lo])
                lo += 1 << j
            return acc
        j = (hi - lo + 1).bit_length() - 1
        return self.s.plus(self.table[j][lo], self.table[j][hi - (1 << j) + 1])


class DisjointSparseTable:
    kind = "disjoint_sparse_table"

    def __init__(self, values: Sequence, s: Semiring):
        self.s = s
        self.n = len(values)
        size = 1
        while size < max(self.n, 2):
            size <<= 1
        a = list(values) + [s.zero] * (size - self.n)
        self.a = a
        levels = []
        h = 0
        while (1 << h) < size:
            half = 1 << h
            row = [s.zero] * size
            for start in range(0, size, 2 * half):
                mid = start + half
                acc = a[mid - 1]
                row[mid - 1] = acc
                for i in range(mid - 2, start - 1, -1):
                    acc = s.plus(a[i], acc)
                    row[i] = acc
                acc = a[mid]
                row[mid] = acc
                for i in range(mid + 1, start + 2 * half):
                    acc = s.plus(acc, a[i])
                    row[i] = acc
            levels.append(row)
            h += 1
        self.levels = levels
        COUNTER.ops += size * max(len(levels), 1)

    def __len__(self) -> int:
        return self.n

    def query(self, lo: int, hi: int):
        COUNTER.ops += 1
        if lo > hi:
            return self.s.zero
        if lo == hi:
            return self.a[lo]
        h = (lo ^ hi).bit_length() - 1
        row = self.levels[h]
        return self.s.plus(row[lo], row[hi])


_KINDS = {cls.kind: cls for cls in (PrefixSum, SparseTable, DisjointSparseTable)}


def select_backend(s: Semiring) -> str:
    if s.has_additive_inverse:
        return "prefix_sum"
    if s.plus_idempotent:
        return "sparse_table"
    return "disjoint_sparse_table"


def build_backend(values: Sequence, s: Semiring, kind: str | None = None):
    """Build a range-sum structure, choosing by capability unless ``kind`` is forced."""
    kind = kind or select_backend(s)
    try:
        cls = _KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown backend {kind!r}; choose from {BACKENDS}") from None
    return cls(values, s)


# ---------------------------------------------------------------------------
# array decompositions


@dataclass
class ArrayDecomposition:
    """Blocks ``(lo, hi, value)`` tiling ``1..width`` (1-based, inclusive).

    Break points are the block ends plus 0.  ``query(lo, hi)`` sums the
    positions ``lo+1..hi``; ``hi=None`` stands for the end of the array.
    """

    pairs: list
    s: Semiring
    backend_kind: str | None = None
    _ends: dict = field(init=False, repr=False)
    _backend: Any = field(init=False, repr=False)

    def __post_init__(self) -> None:
        expect = 1
        ends = {0: -1}
        for idx, (lo, hi, _) in enumerate(self.pairs):
            if lo != expect or hi < lo:
                raise ValueError(f"pairs are not contiguous at block {idx}: {(lo, hi)}")
            ends[hi] = idx
            expect = hi + 1
        self._ends = ends
        self._backend = build_backend([v for _, _, v in self.pairs], self.s, self.backend_kind)

    @property
    def width(self) -> int:
        return self.pairs[-1][1] if self.pairs else 0

    @property
    def break_points(self) -> list:
        return sorted(self._ends)

    def with_dummy(self) -> list:
        """Pairs followed by the terminating ``(width+1, None, zero)`` entry."""
        return list(self.pairs) + [(self.width + 1, None, self.s.zero)]

    def query(self, lo: int = 0, hi: int | None = None):
        if hi is None:
            hi = self.width
        if lo not in self._ends:
            raise MisalignedRange(f"lower end {lo} is not a break point")
        if hi not in self._ends:
            raise MisalignedRange(f"upper end {hi} is not a break point")
        if hi < lo:
            raise MisalignedRange(f"range ({lo}, {hi}] is reversed")
        return self._backend.query(self._ends[lo] + 1, self._ends[hi])

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass
class RangeSumOracle:
    """Keyed family of decompositions sharing one key schema."""

    key_vars: tuple
    decompositions: dict

    def query(self, key: tuple, lo: int = 0, hi: int | None = None):
        try:
            dec = self.decompositions[key]
        except KeyError:
            raise UnknownKey(key) from None
        return dec.query(lo, hi)

    def __contains__(self, key) -> bool:
        return key in self.decompositions

    def __getitem__(self, key) -> ArrayDecomposition:
        return self.decompositions[key]

    def size(self) -> int:
        return sum(len(d) for d in self.decompositions.values())


@dataclass
class ChainLevel:
    """Input for one guard level of :func:`build_oracle`.

    ``vars`` is the sorted vertex tuple of the guard factor, ``table`` its
    stored weights, and ``mu`` maps a key over ``vars`` minus the eliminated
    vertex to the product of the sibling terms inside the guard's body.
    """

    vars: tuple
    table: dict
    mu: Callable[[tuple], Any]


@dataclass
class OracleFamily:
    n: int
    u_vars: tuple
    a0: dict
    positions: dict
    levels: list

    def size(self) -> int:
        return sum(t.size() for t in self.levels)


def _proj(src: tuple, dst: tuple) -> tuple[int, ...]:
    at = {v: i for i, v in enumerate(src)}
    return tuple(at[v] for v in dst)


def build_oracle(
    n: int,
    u_vars: tuple,
    pivot: dict,
    chain: Sequence[ChainLevel],
    s: Semiring,
    backend: str | None = None,
) -> OracleFamily:
    """Build the oracles ``T_0..T_k`` for eliminating vertex ``n``.

    ``pivot`` holds the stored weights of the pivot factor over ``u_vars``.
    ``chain`` lists the guard levels innermost first.  ``T_i`` is keyed by the
    guard's variables without ``n``; ``T_0`` is keyed by ``u_vars`` without ``n``.
    """
    u_rest = tuple(v for v in u_vars if v != n)
    u_n = u_vars.index(n)
    u_key = [i for i, v in enumerate(u_vars) if v != n]

    a0: dict = {}
    positions: dict = {}

    def note(k: tuple, x) -> None:
        pos = positions.get(k)
        if pos is None:
            pos = positions[k] = {}
            a0[k] = []
        if x not in pos:
            a0[k].append(x)
            pos[x] = len(a0[k])

    for row in pivot:
        note(tuple(row[i] for i in u_key), row[u_n])
    for level in chain:
        to_u = _proj(level.vars, u_rest)
        xn = level.vars.index(n)
        for row in level.table:
            note(tuple(row[i] for i in to_u), row[xn])
    COUNTER.ops += len(pivot) + sum(len(c.table) for c in chain)

    t0 = {}
    for k, xs in a0.items():
        pairs = []
        for p, x in enumerate(xs, start=1):
            w = pivot.get(_insert(k, u_n, x), s.zero)
            pairs.append((p, p, w))
        t0[k] = ArrayDecomposition(pairs, s, backend)
    levels = [RangeSumOracle(u_rest, t0)]

    prev_vars = u_rest
    for i, level in enumerate(chain):
        key_vars = tuple(v for v in level.vars if v != n)
        xn = level.vars.index(n)
        key_idx = [j for j, v in enumerate(level.vars) if v != n]
        to_prev = _proj(key_vars, prev_vars)
        to_u = _proj(key_vars, u_rest)

        # (previous key, x_n) -> keys of this level that need a point there
        hits: dict = {}
        for upper in chain[i:]:
            to_here = _proj(upper.vars, level.vars)
            for row in upper.table:
                r = tuple(row[j] for j in to_here)
                k = tuple(r[j] for j in key_idx)
                pk = tuple(k[j] for j in to_prev)
                hits.setdefault((pk, r[xn]), {})[k] = None
            COUNTER.ops += len(upper.table)
        by_prev = dict.fromkeys(pk for pk, _ in hits)

        prev = levels[-1]
        points: dict = {}
        for pk in by_prev:
            dec = prev.decompositions[pk]
            xs = a0[tuple(pk[j] for j in _proj(prev_vars, u_rest))]
            for lo, hi, _ in dec.pairs:
                COUNTER.ops += 1
                if lo != hi:
                    continue
                for k in hits.get((pk, xs[lo - 1]), ()):
                    points.setdefault(k, []).append(lo)

        decs = {}
        for k, pts in points.items():
            pk = tuple(k[j] for j in to_prev)
            dec = prev.decompositions[pk]
            xs = a0[tuple(k[j] for j in to_u)]
            mu = level.mu(k)
            pairs = []
            last = 0
            for p in pts:
                if p - 1 > last:
                    pairs.append((last + 1, p - 1, s.times(mu, dec.query(last, p - 1))))
                stored = level.table.get(_insert(k, xn, xs[p - 1]), _MISSING)
                if stored is _MISSING:
                    stored = s.times(mu, dec.query(p - 1, p))
                pairs.append((p, p, stored))
                last = p
            if last < dec.width:
                pairs.append((last + 1, dec.width, s.times(mu, dec.query(last, dec.width))))
            COUNTER.ops += len(pairs)
            decs[k] = ArrayDecomposition(pairs, s, backend)
        levels.append(RangeSumOracle(key_vars, decs))
        prev_vars = key_vars

    return OracleFamily(n, tuple(u_vars), a0, positions, levels)


def _insert(key: tuple, at: int, x) -> tuple:
    return key[:at] + (x,) + key[at:]
