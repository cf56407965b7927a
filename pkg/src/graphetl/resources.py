"""Resources and resettable iterators over CSV, SQLite and JSONL sources.

A :class:`Resource` is one typed row from a source; iterators yield them
in a deterministic order and support ``reset()`` because a conversion run
makes two full passes over the data.
"""

from __future__ import annotations

import csv
import json
import sqlite3
from pathlib import Path
from typing import Iterator, Optional, Sequence

from .errors import SourceError
from .values import Value, is_value


class Resource:
    """One row or entity from a source, with mapping-style attribute access."""

    __slots__ = ("type_name", "ordinal", "attributes")

    def __init__(self, type_name: str, ordinal: int, attributes: dict[str, Value]):
        self.type_name = type_name
        self.ordinal = ordinal
        self.attributes = attributes

    def __getitem__(self, key: str) -> Value:
        return self.attributes[key]

    def __setitem__(self, key: str, value: Value) -> None:
        self.attributes[key] = value

    def __contains__(self, key: str) -> bool:
        return key in self.attributes

    def get(self, key: str, default: Value = None) -> Value:
        return self.attributes.get(key, default)

    def keys(self):
        return self.attributes.keys()

    def copy(self) -> "Resource":
        return Resource(self.type_name, self.ordinal, dict(self.attributes))

    def __repr__(self) -> str:
        return f"Resource({self.type_name!r}, {self.ordinal}, {self.attributes!r})"


class ResourceIterator:
    """Pull-based, resettable stream of Resources.

    Iterators are single-consumer and need not be thread-safe; the
    converter owns the iterator and fans resources out itself.
    """

    def __iter__(self) -> Iterator[Resource]:
        raise NotImplementedError

    def reset(self) -> None:
        """Rewind so the stream can be consumed again, yielding the same sequence."""
        raise NotImplementedError

    def count(self) -> Optional[int]:
        """Total number of resources, or None when unknown."""
        return None

    def columns(self) -> dict[str, list[str]]:
        """Attribute names per resource type, for schema validation."""
        return {}


class SqliteIterator(ResourceIterator):
    """Yields one Resource per row per table of a SQLite database.

    The type name is the table name; NULL/INTEGER/REAL/TEXT map to
    null/int/float/text. Access is read-only.
    """

    def __init__(self, db_path: str | Path, tables: Optional[Sequence[str]] = None):
        self.db_path = Path(db_path)
        if not self.db_path.is_file():
            raise SourceError(f"no such database file: {self.db_path}")
        try:
            self._conn = sqlite3.connect(f"file:{self.db_path}?mode=ro", uri=True)
            existing = [
                r[0]
                for r in self._conn.execute(
                    "SELECT name FROM sqlite_master WHERE type='table' "
                    "AND name NOT LIKE 'sqlite_%'"
                )
            ]
        except sqlite3.Error as exc:
            raise SourceError(f"cannot open {self.db_path}: {exc}") from exc
        if tables is None:
            self.tables = sorted(existing)
        else:
            missing = [t for t in tables if t not in existing]
            if missing:
                raise SourceError(
                    f"table(s) not found in {self.db_path}: {', '.join(missing)}"
                )
            self.tables = list(tables)

    def __iter__(self) -> Iterator[Resource]:
        for table in self.tables:
            cur = self._select(table)
            cols = [d[0] for d in cur.description]
            ordinal = 0
            for row in cur:
                for cell in row:
                    if not is_value(cell):
                        raise SourceError(
                            f"unsupported SQLite value in {table}: {type(cell).__name__}"
                        )
                yield Resource(table, ordinal, dict(zip(cols, row)))
                ordinal += 1

    def _select(self, table: str) -> sqlite3.Cursor:
        # rowid order keeps both passes identical; WITHOUT ROWID tables
        # fall back to their implicit primary-key order.
        try:
            return self._conn.execute(f'SELECT * FROM "{table}" ORDER BY rowid')
        except sqlite3.OperationalError:
            return self._conn.execute(f'SELECT * FROM "{table}"')

    def reset(self) -> None:
        pass  # each __iter__ re-queries

    def count(self) -> Optional[int]:
        total = 0
        for table in self.tables:
            total += self._conn.execute(f'SELECT COUNT(*) FROM "{table}"').fetchone()[0]
        return total

    def columns(self) -> dict[str, list[str]]:
        out = {}
        for table in self.tables:
            info = self._conn.execute(f'PRAGMA table_info("{table}")').fetchall()
            out[table] = [r[1] for r in info]
        return out


class CsvDirIterator(ResourceIterator):
    """Yields Resources from every ``<Type>.csv`` file in a directory.

    All values stay text; coercion is the schema author's job (wrappers).
    RFC-4180 quoting is honored; ragged rows are an error.
    """

    def __init__(self, dir_path: str | Path):
        self.dir_path = Path(dir_path)
        if not self.dir_path.is_dir():
            raise SourceError(f"no such directory: {self.dir_path}")
        self.files = sorted(self.dir_path.glob("*.csv"))
        self._count: Optional[int] = None

    def __iter__(self) -> Iterator[Resource]:
        for path in self.files:
            type_name = path.stem
            with open(path, newline="", encoding="utf-8") as fh:
                reader = csv.reader(fh, strict=True)
                try:
                    header = next(reader, None)
                    if header is None:
                        continue  # empty file: zero resources
                    width = len(header)
                    ordinal = 0
                    for row in reader:
                        if len(row) != width:
                            raise SourceError(
                                f"{path.name}:{reader.line_num}: expected "
                                f"{width} fields, got {len(row)}"
                            )
                        yield Resource(type_name, ordinal, dict(zip(header, row)))
                        ordinal += 1
                except csv.Error as exc:
                    raise SourceError(f"{path.name}:{reader.line_num}: {exc}") from exc

    def reset(self) -> None:
        pass

    def count(self) -> Optional[int]:
        if self._count is None:
            total = 0
            for _ in self:
                total += 1
            self._count = total
        return self._count

    def columns(self) -> dict[str, list[str]]:
        out = {}
        for path in self.files:
            with open(path, newline="", encoding="utf-8") as fh:
                header = next(csv.reader(fh), None)
            if header is not None:
                out[path.stem] = header
        return out


class JsonlIterator(ResourceIterator):
    """Yields Resources from a JSONL file of flat objects, one per line.

    JSON null/bool/number/string map to the value variants; integral
    numbers become int, everything else float. Nested objects or arrays
    are an error, as is a line whose key set differs from the first line.
    """

    def __init__(self, file_path: str | Path, type_name: str):
        self.file_path = Path(file_path)
        self.type_name = type_name
        if not self.file_path.is_file():
            raise SourceError(f"no such file: {self.file_path}")
        self._count: Optional[int] = None

    def __iter__(self) -> Iterator[Resource]:
        ordinal = 0
        key_set: Optional[frozenset[str]] = None
        with open(self.file_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise SourceError(f"{self.file_path.name}:{lineno}: {exc.msg}") from exc
                if not isinstance(obj, dict):
                    raise SourceError(
                        f"{self.file_path.name}:{lineno}: expected a JSON object"
                    )
                attrs: dict[str, Value] = {}
                for key, raw in obj.items():
                    if isinstance(raw, (dict, list)):
                        raise SourceError(
                            f"{self.file_path.name}:{lineno}: nested value for {key!r}"
                        )
                    if isinstance(raw, float) and raw.is_integer():
                        raw = int(raw)
                    attrs[key] = raw
                if key_set is None:
                    key_set = frozenset(attrs)
                elif frozenset(attrs) != key_set:
                    raise SourceError(
                        f"{self.file_path.name}:{lineno}: key set differs from first row"
                    )
                yield Resource(self.type_name, ordinal, attrs)
                ordinal += 1

    def reset(self) -> None:
        pass

    def count(self) -> Optional[int]:
        if self._count is None:
            with open(self.file_path, encoding="utf-8") as fh:
                self._count = sum(1 for line in fh if line.strip())
        return self._count

    def columns(self) -> dict[str, list[str]]:
        with open(self.file_path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    obj = json.loads(line)
                    if isinstance(obj, dict):
                        return {self.type_name: list(obj)}
                    break
        return {self.type_name: []}


class ChainIterator(ResourceIterator):
    """Concatenates several iterators into one stream, any source kinds mixed."""

    def __init__(self, iterators: Sequence[ResourceIterator]):
        if not iterators:
            raise ValueError("chain() needs at least one iterator")
        self.iterators = list(iterators)

    def __iter__(self) -> Iterator[Resource]:
        for it in self.iterators:
            yield from it

    def reset(self) -> None:
        for it in self.iterators:
            it.reset()

    def count(self) -> Optional[int]:
        total = 0
        for it in self.iterators:
            part = it.count()
            if part is None:
                return None
            total += part
        return total

    def columns(self) -> dict[str, list[str]]:
        merged: dict[str, list[str]] = {}
        for it in self.iterators:
            for type_name, cols in it.columns().items():
                known = merged.setdefault(type_name, [])
                known.extend(c for c in cols if c not in known)
        return merged


def sqlite_iterator(db_path: str | Path, tables: Optional[Sequence[str]] = None) -> SqliteIterator:
    return SqliteIterator(db_path, tables)


def csv_iterator(dir_path: str | Path) -> CsvDirIterator:
    return CsvDirIterator(dir_path)


def jsonl_iterator(file_path: str | Path, type_name: str) -> JsonlIterator:
    return JsonlIterator(file_path, type_name)


def chain(iterators: Sequence[ResourceIterator]) -> ChainIterator:
    return ChainIterator(iterators)
