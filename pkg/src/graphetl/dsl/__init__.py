"""Conversion-schema DSL: parser, pretty-printer and linker."""

from .ast import (
    AttributeSpec,
    AttrRef,
    ConversionPlan,
    EntityPlan,
    IdentifierRef,
    Literal,
    MatchSpec,
    NodeRef,
    NodeTemplate,
    RelationshipTemplate,
    ValueExpr,
    WrapperCall,
)
from .linker import LinkedPlan, link_plan
from .parser import parse_schema, parse_value_expr
from .printer import print_plan

__all__ = [
    "AttributeSpec",
    "AttrRef",
    "ConversionPlan",
    "EntityPlan",
    "IdentifierRef",
    "LinkedPlan",
    "Literal",
    "MatchSpec",
    "NodeRef",
    "NodeTemplate",
    "RelationshipTemplate",
    "ValueExpr",
    "WrapperCall",
    "link_plan",
    "parse_schema",
    "parse_value_expr",
    "print_plan",
]
