"""Pretty-printer for conversion plans.

Emits canonical two-space indentation; re-parsing the output yields a
structurally equal plan. Templates print in declaration order.
"""

from __future__ import annotations

from .ast import (
    AttrRef,
    ConversionPlan,
    IdentifierRef,
    Literal,
    MatchSpec,
    NodeRef,
    NodeTemplate,
    RelationshipTemplate,
    ValueExpr,
    WrapperCall,
)


def _format_literal(value) -> str:
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    return repr(value)


def format_expr(expr: ValueExpr) -> str:
    if isinstance(expr, Literal):
        return _format_literal(expr.value)
    if isinstance(expr, AttrRef):
        return f"{expr.prefix}.{expr.attr}"
    return f"{expr.wrapper}({format_expr(expr.arg)})"


def _format_ref(ref: NodeRef) -> str:
    if isinstance(ref, IdentifierRef):
        return ref.name
    parts = [format_expr(label) for label in ref.labels]
    parts.extend(f"{key}={format_expr(expr)}" for key, expr in ref.conditions)
    return f"MATCH({', '.join(parts)})"


def _wrap(head: str, wrappers: tuple[str, ...]) -> str:
    for name in reversed(wrappers):
        head = f"{name}({head})"
    return head


def _print_template(out: list[str], template) -> None:
    if isinstance(template, NodeTemplate):
        head = f"NODE({', '.join(format_expr(l) for l in template.labels)})"
        head = _wrap(head, template.subgraph_wrappers)
        if template.identifier:
            head += f" {template.identifier}"
    else:
        head = (
            f"RELATIONSHIP({_format_ref(template.source)}, "
            f"{format_expr(template.rel_type)}, {_format_ref(template.target)})"
        )
        head = _wrap(head, template.subgraph_wrappers)
    out.append(f"  {head}:")
    for spec in template.attributes:
        marker = "+" if spec.primary else "-"
        out.append(f"    {marker} {spec.key} = {format_expr(spec.value)}")


def print_plan(plan: ConversionPlan) -> str:
    out: list[str] = []
    for entity_name, entity in plan.entities.items():
        if out:
            out.append("")
        out.append(f"ENTITY({_format_literal(entity_name)}):")
        merged: list = sorted(
            [*entity.node_templates, *entity.relationship_templates],
            key=lambda t: t.template_index,
        )
        for template in merged:
            _print_template(out, template)
    return "\n".join(out) + ("\n" if out else "")
