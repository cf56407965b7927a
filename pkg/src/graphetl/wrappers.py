"""User-registered transforms, in four kinds, plus the suppression contract.

A transform returns the distinguished :data:`SUPPRESS` sentinel to make a
conversion conditional: a suppressed attribute is omitted, a suppressed
label/type or resource suppresses the whole element.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterator

from .errors import DuplicateNameError, TransformError
from .values import Value


class _Suppress:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "SUPPRESS"


SUPPRESS = _Suppress()


@dataclass(slots=True)
class Attribute:
    """A key-value pair; a label or relationship type has the empty key."""

    key: str
    value: Value


class WrapperKind(enum.Enum):
    ATTR_PRE = "attribute_preprocessor"
    ATTR_POST = "attribute_postprocessor"
    SUBGRAPH_PRE = "subgraph_preprocessor"
    SUBGRAPH_POST = "subgraph_postprocessor"

    @property
    def is_attribute(self) -> bool:
        return self in (WrapperKind.ATTR_PRE, WrapperKind.ATTR_POST)

    @property
    def is_subgraph(self) -> bool:
        return not self.is_attribute


class WrapperRegistry:
    """Named transforms in one namespace; frozen before a run starts."""

    def __init__(self):
        self._wrappers: dict[str, tuple[WrapperKind, Callable]] = {}
        self._frozen = False

    def register(self, name: str, kind: WrapperKind, fn: Callable) -> None:
        if self._frozen:
            raise DuplicateNameError("registry is frozen; register before linking")
        if name in self._wrappers:
            raise DuplicateNameError(f"wrapper {name!r} is already registered")
        self._wrappers[name] = (kind, fn)

    def lookup(self, name: str) -> tuple[WrapperKind, Callable] | None:
        return self._wrappers.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._wrappers

    def names(self) -> Iterator[str]:
        return iter(self._wrappers)

    def freeze(self) -> None:
        self._frozen = True

    def copy(self) -> "WrapperRegistry":
        clone = WrapperRegistry()
        clone._wrappers = dict(self._wrappers)
        return clone

    # Decorator forms, usable bare or with an explicit name:
    #   @registry.attribute_postprocessor
    #   def CodeToCategory(attribute): ...

    def _decorator(self, kind: WrapperKind, name_or_fn):
        if callable(name_or_fn):
            self.register(name_or_fn.__name__, kind, name_or_fn)
            return name_or_fn

        def inner(fn):
            self.register(name_or_fn, kind, fn)
            return fn

        return inner

    def attribute_preprocessor(self, name_or_fn):
        return self._decorator(WrapperKind.ATTR_PRE, name_or_fn)

    def attribute_postprocessor(self, name_or_fn):
        return self._decorator(WrapperKind.ATTR_POST, name_or_fn)

    def subgraph_preprocessor(self, name_or_fn):
        return self._decorator(WrapperKind.SUBGRAPH_PRE, name_or_fn)

    def subgraph_postprocessor(self, name_or_fn):
        return self._decorator(WrapperKind.SUBGRAPH_POST, name_or_fn)

    def apply_attribute(self, name: str, attribute: Attribute, *,
                        resource_type: str = "?", ordinal: int = -1):
        """Run an attribute postprocessor; returns Attribute or SUPPRESS."""
        kind, fn = self._wrappers[name]
        try:
            out = fn(attribute)
        except Exception as exc:  # user code: anything can happen
            raise TransformError(name, resource_type, ordinal, exc) from exc
        if out is SUPPRESS:
            return SUPPRESS
        if not isinstance(out, Attribute):
            raise TransformError(
                name, resource_type, ordinal,
                TypeError(f"expected Attribute or SUPPRESS, got {type(out).__name__}"),
            )
        return out

    def apply_resource(self, name: str, resource, *, kind_label: str = "preprocessor"):
        """Run a resource-transforming wrapper; returns Resource or SUPPRESS."""
        _, fn = self._wrappers[name]
        try:
            out = fn(resource)
        except Exception as exc:
            raise TransformError(name, resource.type_name, resource.ordinal, exc) from exc
        return out


def builtin_registry() -> WrapperRegistry:
    """New registry preloaded with the library transforms.

    ``INT``, ``FLOAT``, ``UPPER`` and ``LOWER`` are attribute
    postprocessors for coercing untyped (CSV) columns; null passes
    through unchanged.
    """
    registry = WrapperRegistry()

    @registry.attribute_postprocessor("INT")
    def _to_int(attribute: Attribute) -> Attribute:
        if attribute.value is None:
            return attribute
        return Attribute(attribute.key, int(attribute.value))

    @registry.attribute_postprocessor("FLOAT")
    def _to_float(attribute: Attribute) -> Attribute:
        if attribute.value is None:
            return attribute
        return Attribute(attribute.key, float(attribute.value))

    @registry.attribute_postprocessor("UPPER")
    def _upper(attribute: Attribute) -> Attribute:
        if attribute.value is None:
            return attribute
        return Attribute(attribute.key, str(attribute.value).upper())

    @registry.attribute_postprocessor("LOWER")
    def _lower(attribute: Attribute) -> Attribute:
        if attribute.value is None:
            return attribute
        return Attribute(attribute.key, str(attribute.value).lower())

    return registry
