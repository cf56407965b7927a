"""Bind a parsed plan to a wrapper registry, checking names and kinds.

A wrapper referenced inside a value expression must be attribute-kind;
one wrapping a NODE/RELATIONSHIP declaration must be subgraph-kind. The
linked plan is immutable and safely shareable across workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..errors import LinkError
from ..wrappers import WrapperKind, WrapperRegistry
from .ast import (
    AttributeSpec,
    ConversionPlan,
    IdentifierRef,
    MatchSpec,
    NodeTemplate,
    RelationshipTemplate,
    ValueExpr,
    WrapperCall,
    walk_value_exprs,
)

# A linked endpoint is either the template_index of a node template in the
# same entity block, or a MATCH specification evaluated against the graph.
LinkedRef = Union[int, MatchSpec]


@dataclass(frozen=True)
class LinkedNodeTemplate:
    labels: tuple[ValueExpr, ...]
    attributes: tuple[AttributeSpec, ...]
    pre_wrappers: tuple[str, ...]  # innermost first
    post_wrappers: tuple[str, ...]  # innermost first
    template_index: int
    identifier: Union[str, None]


@dataclass(frozen=True)
class LinkedRelTemplate:
    source: LinkedRef
    rel_type: ValueExpr
    target: LinkedRef
    attributes: tuple[AttributeSpec, ...]
    pre_wrappers: tuple[str, ...]
    post_wrappers: tuple[str, ...]
    template_index: int


@dataclass(frozen=True)
class LinkedEntity:
    node_templates: tuple[LinkedNodeTemplate, ...]
    relationship_templates: tuple[LinkedRelTemplate, ...]


@dataclass(frozen=True)
class LinkedPlan:
    plan: ConversionPlan
    registry: WrapperRegistry
    entities: dict[str, LinkedEntity]


def _check_expr_wrappers(expr: ValueExpr, registry: WrapperRegistry) -> None:
    while isinstance(expr, WrapperCall):
        bound = registry.lookup(expr.wrapper)
        if bound is None:
            raise LinkError(f"unknown wrapper {expr.wrapper!r}")
        kind, _ = bound
        if not kind.is_attribute:
            raise LinkError(
                f"wrapper {expr.wrapper!r} is a {kind.value} but is used "
                f"inside a value expression (attribute position)"
            )
        expr = expr.arg


def _split_subgraph_wrappers(
    names: tuple[str, ...], registry: WrapperRegistry
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Partition outermost-first wrapper names into (pre, post), innermost first."""
    pres: list[str] = []
    posts: list[str] = []
    for name in reversed(names):
        bound = registry.lookup(name)
        if bound is None:
            raise LinkError(f"unknown wrapper {name!r}")
        kind, _ = bound
        if kind == WrapperKind.SUBGRAPH_PRE:
            pres.append(name)
        elif kind == WrapperKind.SUBGRAPH_POST:
            posts.append(name)
        else:
            raise LinkError(
                f"wrapper {name!r} is an {kind.value} but is used around "
                f"a NODE/RELATIONSHIP declaration (subgraph position)"
            )
    return tuple(pres), tuple(posts)


def check_source_columns(
    linked: "LinkedPlan", columns: dict[str, list[str]]
) -> list[str]:
    """Static check that attribute references name existing source columns.

    Templates behind subgraph preprocessors are skipped (the wrapper may
    add attributes at run time), as are references nested under an
    attribute preprocessor. Returns diagnostics, empty when clean.
    """
    problems: list[str] = []

    def check_expr(entity_name: str, expr: ValueExpr) -> None:
        if isinstance(expr, WrapperCall):
            kind, _ = linked.registry.lookup(expr.wrapper)  # type: ignore[misc]
            if kind == WrapperKind.ATTR_PRE:
                return  # the preprocessor may rewrite the resource
            check_expr(entity_name, expr.arg)
            return
        if not hasattr(expr, "attr"):
            return
        known = columns.get(entity_name)
        if known is not None and expr.attr not in known:
            problems.append(
                f"entity {entity_name!r}: column {expr.attr!r} not found in source "
                f"(has: {', '.join(known) or 'no columns'})"
            )

    def check_template(entity_name: str, template) -> None:
        if template.pre_wrappers:
            return
        if isinstance(template, LinkedNodeTemplate):
            exprs = list(template.labels)
        else:
            exprs = [template.rel_type]
            for ref in (template.source, template.target):
                if isinstance(ref, MatchSpec):
                    exprs.extend(ref.labels)
                    exprs.extend(expr for _, expr in ref.conditions)
        exprs.extend(spec.value for spec in template.attributes)
        for expr in exprs:
            check_expr(entity_name, expr)

    for entity_name, entity in linked.entities.items():
        for template in entity.node_templates:
            check_template(entity_name, template)
        for template in entity.relationship_templates:
            check_template(entity_name, template)
    return problems


def link_plan(plan: ConversionPlan, registry: WrapperRegistry) -> LinkedPlan:
    for expr in walk_value_exprs(plan):
        _check_expr_wrappers(expr, registry)

    entities: dict[str, LinkedEntity] = {}
    for entity_name, entity in plan.entities.items():
        identifier_to_index = {
            t.identifier: t.template_index
            for t in entity.node_templates
            if t.identifier is not None
        }
        nodes = []
        for template in entity.node_templates:
            pres, posts = _split_subgraph_wrappers(template.subgraph_wrappers, registry)
            nodes.append(
                LinkedNodeTemplate(
                    labels=template.labels,
                    attributes=template.attributes,
                    pre_wrappers=pres,
                    post_wrappers=posts,
                    template_index=template.template_index,
                    identifier=template.identifier,
                )
            )
        rels = []
        for template in entity.relationship_templates:
            pres, posts = _split_subgraph_wrappers(template.subgraph_wrappers, registry)

            def resolve(ref) -> LinkedRef:
                if isinstance(ref, IdentifierRef):
                    return identifier_to_index[ref.name]  # parse checked existence
                return ref

            rels.append(
                LinkedRelTemplate(
                    source=resolve(template.source),
                    rel_type=template.rel_type,
                    target=resolve(template.target),
                    attributes=template.attributes,
                    pre_wrappers=pres,
                    post_wrappers=posts,
                    template_index=template.template_index,
                )
            )
        entities[entity_name] = LinkedEntity(tuple(nodes), tuple(rels))

    registry = registry.copy()
    registry.freeze()
    return LinkedPlan(plan=plan, registry=registry, entities=entities)
