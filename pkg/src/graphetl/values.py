"""Attribute values and their deterministic ordering.

Values are plain Python scalars: ``None``, ``bool``, ``int``, ``float`` or
``str``. Equality and ordering are tag-aware: ``1``, ``1.0`` and ``True``
are three distinct values even though Python would compare them equal.
This matters because values key merge indexes.
"""

from __future__ import annotations

from typing import Union

Value = Union[None, bool, int, float, str]

_TAG_NULL = 0
_TAG_BOOL = 1
_TAG_INT = 2
_TAG_FLOAT = 3
_TAG_TEXT = 4

_TAG_NAMES = {_TAG_NULL: "null", _TAG_BOOL: "bool", _TAG_INT: "int",
              _TAG_FLOAT: "float", _TAG_TEXT: "text"}


def tag_of(value: Value) -> int:
    # bool must be tested before int: bool subclasses int.
    if value is None:
        return _TAG_NULL
    if isinstance(value, bool):
        return _TAG_BOOL
    if isinstance(value, int):
        return _TAG_INT
    if isinstance(value, float):
        return _TAG_FLOAT
    if isinstance(value, str):
        return _TAG_TEXT
    raise TypeError(f"not a graph value: {value!r} ({type(value).__name__})")


def tag_name(value: Value) -> str:
    return _TAG_NAMES[tag_of(value)]


def is_value(obj: object) -> bool:
    return obj is None or isinstance(obj, (bool, int, float, str))


def coerce(obj: object) -> Value:
    """Validate that ``obj`` is a legal value and return it unchanged."""
    tag_of(obj)  # type: ignore[arg-type]
    return obj  # type: ignore[return-value]


def values_equal(a: Value, b: Value) -> bool:
    """Tag-aware equality: values of different tags never compare equal."""
    ta, tb = tag_of(a), tag_of(b)
    if ta != tb:
        return False
    return a == b


def index_key(value: Value) -> tuple:
    """Hashable key that separates values Python's hash would collide."""
    return (tag_of(value), value)


def sort_key(value: Value) -> tuple:
    """Total order over all values: by tag, then by payload."""
    tag = tag_of(value)
    if tag == _TAG_NULL:
        return (tag, 0)
    return (tag, value)
