"""Benchmark harness: synthetic commit/edit data and its conversion schema.

The generated SQLite database has two tables, ``commits(hash, author,
timestamp)`` and ``edits(commit_hash, filename, new_filename, edit_type)``
with ``edit_type`` in {add, modify, delete, rename}. The shipped schema
builds Commit/File/Author nodes, edit relationships typed by the upper-
cased edit type, and RENAMED_TO edges guarded by a suppression wrapper.
"""

from __future__ import annotations

import random
import sqlite3
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .wrappers import SUPPRESS, WrapperRegistry, builtin_registry

BENCH_SCHEMA = """\
ENTITY("commits"):
  NODE("Commit") commitnode:
    + hash = commits.hash
    - timestamp = commits.timestamp
  NODE("Author") authornode:
    + name = commits.author
  RELATIONSHIP(authornode, "AUTHORED", commitnode):

ENTITY("edits"):
  NODE("File") filenode:
    + path = edits.filename
  OnlyRenames(NODE("File")) renamedfile:
    + path = edits.new_filename
  RELATIONSHIP(MATCH("Commit", hash=edits.commit_hash), UPPER(edits.edit_type), filenode):
  OnlyRenames(RELATIONSHIP(filenode, "RENAMED_TO", renamedfile)):
"""

EDIT_TYPES = ("add", "modify", "delete")  # "rename" rate is configured


def bench_registry() -> WrapperRegistry:
    """Built-ins plus the rename guard used by BENCH_SCHEMA."""
    registry = builtin_registry()

    @registry.subgraph_preprocessor("OnlyRenames")
    def _only_renames(resource):
        if resource["edit_type"] != "rename":
            return SUPPRESS
        return resource

    return registry


@dataclass(frozen=True)
class GroundTruth:
    commits: int
    edits: int
    renames: int
    edit_type_counts: dict[str, int]


def generate_dataset(
    db_path: str | Path,
    commits: int = 1000,
    edits: int = 10000,
    rename_rate: float = 0.1,
    seed: int = 0,
    authors: int = 0,
    files: int = 0,
) -> GroundTruth:
    """Write a deterministic synthetic dataset; returns its ground truth."""
    if not 0.0 <= rename_rate <= 1.0:
        raise ValueError("rename_rate must be within [0, 1]")
    rng = random.Random(seed)
    authors = authors or max(1, commits // 25)
    files = files or max(20, edits // 20)

    author_names = [f"author_{i:04d}" for i in range(authors)]
    file_pool = [f"src/module_{i:05d}.py" for i in range(files)]
    hashes: list[str] = []
    seen = set()
    while len(hashes) < commits:
        value = f"{rng.getrandbits(64):016x}"
        if value not in seen:
            seen.add(value)
            hashes.append(value)

    rename_count = round(edits * rename_rate)
    rename_slots = set(rng.sample(range(edits), k=rename_count)) if edits else set()

    connection = sqlite3.connect(str(db_path))
    try:
        cursor = connection.cursor()
        cursor.execute("DROP TABLE IF EXISTS commits")
        cursor.execute("DROP TABLE IF EXISTS edits")
        cursor.execute("CREATE TABLE commits (hash TEXT, author TEXT, timestamp INTEGER)")
        cursor.execute(
            "CREATE TABLE edits (commit_hash TEXT, filename TEXT, "
            "new_filename TEXT, edit_type TEXT)"
        )
        cursor.executemany(
            "INSERT INTO commits VALUES (?, ?, ?)",
            (
                (commit_hash, rng.choice(author_names), 1_600_000_000 + 60 * i)
                for i, commit_hash in enumerate(hashes)
            ),
        )

        type_counts: Counter[str] = Counter()

        def edit_rows():
            for i in range(edits):
                commit_hash = hashes[rng.randrange(commits)] if commits else ""
                filename = file_pool[rng.randrange(files)]
                if i in rename_slots:
                    edit_type = "rename"
                    new_filename = file_pool[rng.randrange(files)]
                else:
                    edit_type = EDIT_TYPES[rng.randrange(len(EDIT_TYPES))]
                    new_filename = None
                type_counts[edit_type] += 1
                yield (commit_hash, filename, new_filename, edit_type)

        cursor.executemany("INSERT INTO edits VALUES (?, ?, ?, ?)", edit_rows())
        connection.commit()
    finally:
        connection.close()

    return GroundTruth(
        commits=commits,
        edits=edits,
        renames=rename_count,
        edit_type_counts=dict(type_counts),
    )
