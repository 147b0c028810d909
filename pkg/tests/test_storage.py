import pytest
from hypothesis import given, strategies as st

from signedq.algebra import COUNTING, SETUNION
from signedq.errors import DuplicateFactorKey, ParseError, SchemaMismatch
from signedq.storage import Database, Factor, Relation, antijoin, load_csv, load_dir, project, semijoin

rows2 = st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), max_size=25)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_relation_dedups_and_keeps_first_order():
    r = Relation(("a", "b"), ((1, 2), (0, 0), (1, 2)))
    assert r.rows == ((1, 2), (0, 0))
    assert (0, 0) in r and (2, 2) not in r
    with pytest.raises(SchemaMismatch):
        Relation(("a", "a"), ())
    with pytest.raises(SchemaMismatch):
        Relation(("a",), ((1, 2),))


def test_load_csv_interns_in_first_seen_order(tmp_path):
    p = write(tmp_path / "R.csv", "x,y\nb,q\na,q\nb,r\n\n")
    db = Database()
    r = load_csv(p, ("x", "y"), db=db)
    assert r.rows == ((0, 0), (1, 0), (0, 1))
    assert db.decode(("x", "y"), (1, 1)) == ("a", "r")
    assert db.encode(("x",), ("b",)) == (0,)


def test_load_weighted(tmp_path):
    p = write(tmp_path / "F.csv", "x,weight\na,3\nb,0\n")
    f = load_csv(p, ("x",), weighted=True, semiring=COUNTING)
    assert isinstance(f, Factor)
    assert f.table == {(0,): 3, (1,): 0}
    s = write(tmp_path / "G.csv", "x,weight\na,{1;2}\nb,none\n")
    g = load_csv(s, ("x",), weighted=True, semiring=SETUNION)
    assert g.table == {(0,): frozenset({1, 2}), (1,): None}


@pytest.mark.parametrize(
    "text, schema, weighted, exc",
    [
        ("", ("x",), False, ParseError),
        ("x\na\n", ("x", "y"), False, ParseError),
        ("x,y\na\n", ("x", "y"), False, ParseError),
        ("x,w\na,1\n", ("x",), True, ParseError),
        ("x,weight\na,1\na,2\n", ("x",), True, DuplicateFactorKey),
        ("x,weight\na,one\n", ("x",), True, ParseError),
    ],
)
def test_load_errors(tmp_path, text, schema, weighted, exc):
    p = write(tmp_path / "R.csv", text)
    with pytest.raises(exc):
        load_csv(p, schema, weighted=weighted, semiring=COUNTING)


def test_load_dir(tmp_path):
    write(tmp_path / "R.csv", "x,y\na,b\n")
    write(tmp_path / "W.csv", "y,weight\nb,5\n")
    db = load_dir(tmp_path, [("R", ("x", "y")), ("W", ("y",))], COUNTING)
    assert isinstance(db["R"], Relation) and isinstance(db["W"], Factor)
    assert db["W"].table == {(0,): 5}
    plain = load_dir(tmp_path, [("R", ("x", "y"))])
    assert plain.size() == 1
    with pytest.raises(ParseError):
        load_dir(tmp_path, [("Missing", ("x",))])


@given(rows2, rows2)
def test_semijoin_antijoin_partition(a, b):
    r = Relation(("x", "y"), tuple(a))
    s = Relation(("y",), tuple((y,) for _, y in b))
    sj, aj = semijoin(r, s), antijoin(r, s)
    keys = {y for _, y in b}
    assert set(sj.rows) == {t for t in r.rows if t[1] in keys}
    assert set(sj.rows) | set(aj.rows) == set(r.rows)
    assert not set(sj.rows) & set(aj.rows)


@given(rows2)
def test_project(a):
    r = Relation(("x", "y"), tuple(a))
    assert set(project(r, ("y",)).rows) == {(y,) for _, y in a}
    assert project(r, ("y", "x")).schema == ("y", "x")
