"""Source iterators: typing, ordering, reset determinism, error reporting."""

from __future__ import annotations

import sqlite3

import pytest

from graphetl import SourceError, chain, csv_iterator, jsonl_iterator, sqlite_iterator


def snapshot(iterator):
    return [(r.type_name, r.ordinal, dict(r.attributes)) for r in iterator]


# -- sqlite ----------------------------------------------------------------


@pytest.fixture()
def small_db(tmp_path):
    path = tmp_path / "s.sqlite"
    connection = sqlite3.connect(path)
    connection.execute("CREATE TABLE Supplier (ID INTEGER, Name TEXT)")
    connection.executemany(
        "INSERT INTO Supplier VALUES (?, ?)", [(1, "Acme"), (2, "Bolt")]
    )
    connection.execute("CREATE TABLE Empty (X INTEGER)")
    connection.execute(
        "CREATE TABLE Mixed (i INTEGER, f REAL, t TEXT, n INTEGER)"
    )
    connection.execute("INSERT INTO Mixed VALUES (7, 1.5, 'hi', NULL)")
    connection.commit()
    connection.close()
    return path


def test_sqlite_rows_become_typed_resources(small_db):
    rows = snapshot(sqlite_iterator(small_db, tables=["Supplier"]))
    assert rows == [
        ("Supplier", 0, {"ID": 1, "Name": "Acme"}),
        ("Supplier", 1, {"ID": 2, "Name": "Bolt"}),
    ]


def test_sqlite_type_fidelity(small_db):
    (row,) = snapshot(sqlite_iterator(small_db, tables=["Mixed"]))
    attrs = row[2]
    assert attrs["i"] == 7 and isinstance(attrs["i"], int)
    assert attrs["f"] == 1.5 and isinstance(attrs["f"], float)
    assert attrs["t"] == "hi"
    assert attrs["n"] is None


def test_sqlite_empty_table_yields_nothing(small_db):
    assert snapshot(sqlite_iterator(small_db, tables=["Empty"])) == []


def test_sqlite_table_selection(small_db):
    it = sqlite_iterator(small_db, tables=["Supplier"])
    assert {r.type_name for r in it} == {"Supplier"}
    assert it.count() == 2


def test_sqlite_missing_table_is_a_source_error(small_db):
    with pytest.raises(SourceError):
        sqlite_iterator(small_db, tables=["Nope"])


def test_sqlite_missing_file_is_a_source_error(tmp_path):
    with pytest.raises(SourceError):
        sqlite_iterator(tmp_path / "absent.sqlite")


def test_sqlite_reset_determinism(small_db):
    it = sqlite_iterator(small_db)
    first = snapshot(it)
    it.reset()
    assert snapshot(it) == first


def test_sqlite_columns(small_db):
    cols = sqlite_iterator(small_db).columns()
    assert cols["Supplier"] == ["ID", "Name"]


# -- csv -------------------------------------------------------------------


def test_csv_all_values_stay_text(tmp_path):
    (tmp_path / "Employee.csv").write_text("ID,Name\n1,Ada\n2,Grace\n3,Alan\n")
    rows = snapshot(csv_iterator(tmp_path))
    assert len(rows) == 3
    assert rows[0] == ("Employee", 0, {"ID": "1", "Name": "Ada"})
    assert all(isinstance(v, str) for _, _, attrs in rows for v in attrs.values())


def test_csv_header_only_yields_nothing(tmp_path):
    (tmp_path / "Employee.csv").write_text("ID,Name\n")
    it = csv_iterator(tmp_path)
    assert snapshot(it) == []
    assert it.count() == 0


def test_csv_quoting_rfc4180(tmp_path):
    (tmp_path / "T.csv").write_text('a\n"a,""b"""\n')
    rows = snapshot(csv_iterator(tmp_path))
    assert rows[0][2]["a"] == 'a,"b"'


def test_csv_ragged_row_is_a_source_error(tmp_path):
    (tmp_path / "T.csv").write_text("a,b\n1\n")
    with pytest.raises(SourceError):
        snapshot(csv_iterator(tmp_path))


def test_csv_count_prescan(tmp_path):
    (tmp_path / "A.csv").write_text("x\n1\n2\n")
    (tmp_path / "B.csv").write_text("y\n3\n")
    assert csv_iterator(tmp_path).count() == 3


# -- jsonl -----------------------------------------------------------------


def test_jsonl_value_mapping(tmp_path):
    path = tmp_path / "rows.jsonl"
    path.write_text(
        '{"a": 1, "b": 1.5, "c": "x", "d": null, "e": true}\n'
        '{"a": 2.0, "b": 0.25, "c": "y", "d": null, "e": false}\n'
    )
    rows = snapshot(jsonl_iterator(path, "Row"))
    assert rows[0][2] == {"a": 1, "b": 1.5, "c": "x", "d": None, "e": True}
    # integral JSON numbers land as int
    assert rows[1][2]["a"] == 2 and isinstance(rows[1][2]["a"], int)
    assert isinstance(rows[1][2]["b"], float)


def test_jsonl_empty_file(tmp_path):
    path = tmp_path / "rows.jsonl"
    path.write_text("")
    it = jsonl_iterator(path, "Row")
    assert snapshot(it) == []
    assert it.count() == 0


def test_jsonl_nested_value_is_an_error_with_line(tmp_path):
    path = tmp_path / "rows.jsonl"
    path.write_text('{"a": 1}\n{"a": [1, 2]}\n')
    with pytest.raises(SourceError, match=":2"):
        snapshot(jsonl_iterator(path, "Row"))


def test_jsonl_key_set_mismatch_is_an_error(tmp_path):
    path = tmp_path / "rows.jsonl"
    path.write_text('{"a": 1}\n{"b": 2}\n')
    with pytest.raises(SourceError, match=":2"):
        snapshot(jsonl_iterator(path, "Row"))


# -- chain -----------------------------------------------------------------


def test_chain_concatenates_in_order(tmp_path, small_db):
    (tmp_path / "Employee.csv").write_text("ID\n1\n2\n3\n")
    combined = chain([sqlite_iterator(small_db, tables=["Supplier"]), csv_iterator(tmp_path)])
    rows = snapshot(combined)
    assert [r[0] for r in rows] == ["Supplier", "Supplier", "Employee", "Employee", "Employee"]
    assert combined.count() == 5


def test_chain_of_empty(tmp_path):
    (tmp_path / "E.csv").write_text("x\n")
    combined = chain([csv_iterator(tmp_path)])
    assert snapshot(combined) == []


def test_chain_reset_resets_all_parts(tmp_path, small_db):
    (tmp_path / "Employee.csv").write_text("ID\n1\n")
    combined = chain([sqlite_iterator(small_db, tables=["Supplier"]), csv_iterator(tmp_path)])
    first = snapshot(combined)
    combined.reset()
    assert snapshot(combined) == first


def test_chain_requires_an_iterator():
    with pytest.raises(ValueError):
        chain([])


def test_ordinals_are_dense_per_type(small_db, tmp_path):
    (tmp_path / "Employee.csv").write_text("ID\n1\n2\n")
    combined = chain([sqlite_iterator(small_db), csv_iterator(tmp_path)])
    seen: dict[str, list[int]] = {}
    for resource in combined:
        seen.setdefault(resource.type_name, []).append(resource.ordinal)
    for ordinals in seen.values():
        assert ordinals == list(range(len(ordinals)))
