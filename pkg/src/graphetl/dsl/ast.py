"""Syntax tree for the conversion-schema DSL.

Positions are carried for diagnostics but excluded from equality so a
pretty-printed and re-parsed plan compares structurally equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class Literal:
    value: Union[None, bool, int, float, str]


@dataclass(frozen=True)
class AttrRef:
    """``Prefix.attr``; the prefix is the entity name or a node identifier
    from the same block (an alias: both resolve against the resource)."""

    prefix: str
    attr: str


@dataclass(frozen=True)
class WrapperCall:
    wrapper: str
    arg: "ValueExpr"


ValueExpr = Union[Literal, AttrRef, WrapperCall]


@dataclass(frozen=True)
class AttributeSpec:
    key: str
    value: ValueExpr
    primary: bool
    line: int = field(compare=False, default=0)


@dataclass(frozen=True)
class NodeTemplate:
    labels: tuple[ValueExpr, ...]  # element 0 is the merge-label
    identifier: Union[str, None]
    attributes: tuple[AttributeSpec, ...]
    subgraph_wrappers: tuple[str, ...]  # outermost first
    template_index: int
    line: int = field(compare=False, default=0)


@dataclass(frozen=True)
class MatchSpec:
    labels: tuple[ValueExpr, ...]
    conditions: tuple[tuple[str, ValueExpr], ...]


@dataclass(frozen=True)
class IdentifierRef:
    name: str


NodeRef = Union[IdentifierRef, MatchSpec]


@dataclass(frozen=True)
class RelationshipTemplate:
    source: NodeRef
    rel_type: ValueExpr
    target: NodeRef
    attributes: tuple[AttributeSpec, ...]
    subgraph_wrappers: tuple[str, ...]
    template_index: int
    line: int = field(compare=False, default=0)


@dataclass(frozen=True)
class EntityPlan:
    node_templates: tuple[NodeTemplate, ...]
    relationship_templates: tuple[RelationshipTemplate, ...]


@dataclass(frozen=True)
class ConversionPlan:
    entities: dict[str, EntityPlan]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConversionPlan):
            return NotImplemented
        return self.entities == other.entities


def walk_value_exprs(plan: ConversionPlan):
    """Yield every ValueExpr in the plan (labels, types, attributes, matches)."""
    for entity in plan.entities.values():
        for node in entity.node_templates:
            yield from node.labels
            for spec in node.attributes:
                yield spec.value
        for rel in entity.relationship_templates:
            yield rel.rel_type
            for spec in rel.attributes:
                yield spec.value
            for ref in (rel.source, rel.target):
                if isinstance(ref, MatchSpec):
                    yield from ref.labels
                    for _, expr in ref.conditions:
                        yield expr


def wrapper_calls(expr: ValueExpr):
    """Yield wrapper names in ``expr``, outermost first."""
    while isinstance(expr, WrapperCall):
        yield expr.wrapper
        expr = expr.arg
