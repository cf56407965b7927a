"""Property: pretty-printing a plan and re-parsing gives an equal plan."""

from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from graphetl import parse_schema, print_plan
from graphetl.dsl import (
    AttributeSpec,
    AttrRef,
    ConversionPlan,
    EntityPlan,
    IdentifierRef,
    Literal,
    MatchSpec,
    NodeTemplate,
    RelationshipTemplate,
    WrapperCall,
)

KEYWORDS = {"ENTITY", "NODE", "RELATIONSHIP", "MATCH", "true", "false"}

names = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,8}", fullmatch=True).filter(
    lambda s: s not in KEYWORDS
)

# string literals live on one line; the grammar has no newline escape
literal_text = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",), blacklist_characters="\n\r"),
    max_size=12,
)

literals = st.one_of(
    literal_text.map(Literal),
    st.integers(-(10**9), 10**9).map(Literal),
    st.floats(allow_nan=False, allow_infinity=False).map(Literal),
    st.booleans().map(Literal),
)


def value_exprs(prefixes: list[str]):
    leaves = literals
    if prefixes:
        leaves = leaves | st.builds(
            AttrRef, st.sampled_from(prefixes), names
        )
    return st.recursive(
        leaves,
        lambda children: st.builds(WrapperCall, names, children),
        max_leaves=3,
    )


def attribute_specs(prefixes: list[str]):
    return st.builds(
        AttributeSpec, key=names, value=value_exprs(prefixes), primary=st.just(False)
    )


@st.composite
def entity_blocks(draw, entity_name: str) -> EntityPlan:
    node_count = draw(st.integers(0, 3))
    identifier_pool = draw(st.lists(names, max_size=node_count, unique=True))
    prefixes = [entity_name, *identifier_pool]
    exprs = value_exprs(prefixes)

    def finish_attrs(specs: list[AttributeSpec]) -> tuple[AttributeSpec, ...]:
        if specs and draw(st.booleans()):
            specs[0] = AttributeSpec(specs[0].key, specs[0].value, True)
        return tuple(specs)
    nodes = []
    for i in range(node_count):
        identifier = identifier_pool[i] if i < len(identifier_pool) else None
        nodes.append(
            NodeTemplate(
                labels=tuple(draw(st.lists(exprs, min_size=1, max_size=3))),
                identifier=identifier,
                attributes=finish_attrs(
                    draw(st.lists(attribute_specs(prefixes), max_size=3))
                ),
                subgraph_wrappers=tuple(draw(st.lists(names, max_size=2))),
                template_index=0,
            )
        )
    declared = [n.identifier for n in nodes if n.identifier]

    def node_refs():
        match_specs = st.builds(
            MatchSpec,
            labels=st.lists(exprs, min_size=1, max_size=2).map(tuple),
            conditions=st.lists(st.tuples(names, exprs), max_size=2).map(tuple),
        )
        if declared:
            return st.one_of(st.sampled_from(declared).map(IdentifierRef), match_specs)
        return match_specs

    rel_count = draw(st.integers(0, 2))
    rels = []
    for _ in range(rel_count):
        rels.append(
            RelationshipTemplate(
                source=draw(node_refs()),
                rel_type=draw(exprs),
                target=draw(node_refs()),
                attributes=finish_attrs(
                    draw(st.lists(attribute_specs(prefixes), max_size=2))
                ),
                subgraph_wrappers=tuple(draw(st.lists(names, max_size=2))),
                template_index=0,
            )
        )

    merged: list = nodes + rels
    order = draw(st.permutations(range(len(merged))))
    reindexed_nodes, reindexed_rels = [], []
    for new_index, original in sorted(zip(order, merged)):
        if isinstance(original, NodeTemplate):
            reindexed_nodes.append(
                NodeTemplate(
                    original.labels,
                    original.identifier,
                    original.attributes,
                    original.subgraph_wrappers,
                    new_index,
                )
            )
        else:
            reindexed_rels.append(
                RelationshipTemplate(
                    original.source,
                    original.rel_type,
                    original.target,
                    original.attributes,
                    original.subgraph_wrappers,
                    new_index,
                )
            )
    return EntityPlan(tuple(reindexed_nodes), tuple(reindexed_rels))


@st.composite
def conversion_plans(draw) -> ConversionPlan:
    entity_names = draw(st.lists(names, max_size=3, unique=True))
    return ConversionPlan(
        {name: draw(entity_blocks(name)) for name in entity_names}
    )


@settings(max_examples=150, deadline=None)
@given(conversion_plans())
def test_print_then_parse_is_identity(plan):
    text = print_plan(plan)
    assert parse_schema(text) == plan


def test_roundtrip_of_fixture_schemas(listing_schema_text, retail_schema_text):
    for text in (listing_schema_text, retail_schema_text):
        plan = parse_schema(text)
        assert parse_schema(print_plan(plan)) == plan
