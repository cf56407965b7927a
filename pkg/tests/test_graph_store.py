"""Merge semantics, MATCH evaluation and canonical serialization."""

from __future__ import annotations

import pytest

from graphetl import (
    PrimaryConflictError,
    PrimaryNullError,
    PropertyGraph,
    UnknownEndpointError,
)


def test_no_primary_means_no_merge():
    graph = PropertyGraph()
    a, _ = graph.upsert_node(["Category"], {"name": "T-Shirts"}, None)
    b, _ = graph.upsert_node(["Category"], {"name": "T-Shirts"}, None)
    assert a != b
    assert len(graph.nodes) == 2


def test_merge_on_first_label_and_primary():
    graph = PropertyGraph()
    a, created_a = graph.upsert_node(
        ["Category", "Clothing"], {"name": "T-Shirts"}, ("name", "T-Shirts")
    )
    b, created_b = graph.upsert_node(
        ["Category", "Clothing"], {"name": "T-Shirts"}, ("name", "T-Shirts")
    )
    assert (created_a, created_b) == (True, False)
    assert a == b
    assert len(graph.nodes) == 1


def test_merge_unions_labels_and_overwrites_attributes():
    graph = PropertyGraph()
    a, _ = graph.upsert_node(["X"], {"a": 1}, ("id", 0))
    b, _ = graph.upsert_node(["X", "Y"], {"a": 2, "b": 3}, ("id", 0))
    assert a == b
    node = graph.nodes[a]
    assert node.labels == ["X", "Y"]
    assert node.attributes == {"id": 0, "a": 2, "b": 3}


def test_merge_label_is_never_displaced():
    graph = PropertyGraph()
    a, _ = graph.upsert_node(["X", "Z"], {}, ("id", 1))
    graph.upsert_node(["W", "X"], {}, ("id", 1))  # different first label: no merge
    assert len(graph.nodes) == 2
    b, _ = graph.upsert_node(["X", "W"], {}, ("id", 1))
    assert b == a
    assert graph.nodes[a].labels == ["X", "Z", "W"]


def test_primary_values_are_tag_sensitive():
    graph = PropertyGraph()
    a, _ = graph.upsert_node(["X"], {}, ("id", 1))
    b, _ = graph.upsert_node(["X"], {}, ("id", "1"))
    c, _ = graph.upsert_node(["X"], {}, ("id", 1.0))
    d, _ = graph.upsert_node(["X"], {}, ("id", True))
    assert len({a, b, c, d}) == 4


def test_null_primary_is_an_error():
    graph = PropertyGraph()
    with pytest.raises(PrimaryNullError):
        graph.upsert_node(["X"], {}, ("id", None))


def test_changing_primary_via_plain_attribute_is_rejected():
    graph = PropertyGraph()
    graph.upsert_node(["X"], {"id": 1, "a": 1}, ("id", 1))
    with pytest.raises(PrimaryConflictError):
        graph.upsert_node(["X"], {"id": 2}, ("id", 1))


def test_merge_idempotence():
    graph = PropertyGraph()
    graph.upsert_node(["X", "Y"], {"a": 1}, ("id", 7))
    before = graph.canonical_form()
    graph.upsert_node(["X", "Y"], {"a": 1}, ("id", 7))
    assert graph.canonical_form() == before


# -- relationships -----------------------------------------------------------


def test_parallel_edges_without_primary():
    graph = PropertyGraph()
    a, _ = graph.upsert_node(["A"], {}, None)
    b, _ = graph.upsert_node(["B"], {}, None)
    r1, _ = graph.upsert_relationship(a, "CONTAINS", b, {}, None)
    r2, _ = graph.upsert_relationship(a, "CONTAINS", b, {}, None)
    assert r1 != r2
    assert len(graph.relationships) == 2


def test_relationship_merge_with_primary_updates_attributes():
    graph = PropertyGraph()
    a, _ = graph.upsert_node(["A"], {}, None)
    b, _ = graph.upsert_node(["B"], {}, None)
    r1, created1 = graph.upsert_relationship(
        a, "CONTAINS", b, {"amount": 1}, ("lineno", 1)
    )
    r2, created2 = graph.upsert_relationship(
        a, "CONTAINS", b, {"amount": 9}, ("lineno", 1)
    )
    assert r1 == r2 and created1 and not created2
    assert graph.relationships[r1].attributes["amount"] == 9
    assert len(graph.relationships) == 1


def test_relationship_merge_key_includes_endpoints_and_type():
    graph = PropertyGraph()
    a, _ = graph.upsert_node(["A"], {}, None)
    b, _ = graph.upsert_node(["B"], {}, None)
    graph.upsert_relationship(a, "CONTAINS", b, {}, ("lineno", 1))
    graph.upsert_relationship(b, "CONTAINS", a, {}, ("lineno", 1))
    graph.upsert_relationship(a, "HOLDS", b, {}, ("lineno", 1))
    assert len(graph.relationships) == 3


def test_unknown_endpoint():
    graph = PropertyGraph()
    a, _ = graph.upsert_node(["A"], {}, None)
    with pytest.raises(UnknownEndpointError):
        graph.upsert_relationship(a, "T", 999, {}, None)


# -- match -------------------------------------------------------------------


def test_match_by_label_and_condition():
    graph = PropertyGraph()
    s1, _ = graph.upsert_node(["Supplier"], {"id": 1, "name": "Acme"}, ("id", 1))
    graph.upsert_node(["Supplier"], {"id": 2, "name": "Bolt"}, ("id", 2))
    assert graph.match_nodes(["Supplier"], [("id", 1)]) == {s1}


def test_match_on_empty_graph():
    assert PropertyGraph().match_nodes(["X"], []) == set()


def test_match_label_only():
    graph = PropertyGraph()
    a, _ = graph.upsert_node(["Category"], {"name": "x"}, None)
    b, _ = graph.upsert_node(["Category"], {"name": "y"}, None)
    graph.upsert_node(["Other"], {}, None)
    assert graph.match_nodes(["Category"], []) == {a, b}


def test_match_sees_labels_in_any_position():
    graph = PropertyGraph()
    a, _ = graph.upsert_node(["X", "Common"], {"k": 1}, None)
    b, _ = graph.upsert_node(["Y", "Common"], {"k": 1}, None)
    graph.upsert_node(["Common"], {"k": 2}, None)
    assert graph.match_nodes(["Common"], [("k", 1)]) == {a, b}
    assert graph.match_nodes(["Y", "Common"], [("k", 1)]) == {b}


def test_match_is_tag_aware():
    graph = PropertyGraph()
    a, _ = graph.upsert_node(["X"], {"k": 1}, None)
    graph.upsert_node(["X"], {"k": "1"}, None)
    assert graph.match_nodes(["X"], [("k", 1)]) == {a}


def test_match_index_survives_mutation():
    graph = PropertyGraph()
    a, _ = graph.upsert_node(["X"], {"k": 1}, ("k", 1))
    assert graph.match_nodes(["X"], [("k", 1)]) == {a}
    b, _ = graph.upsert_node(["X"], {"k": 2}, ("k", 2))
    assert graph.match_nodes(["X"], [("k", 2)]) == {b}
    graph.upsert_node(["X", "Y"], {"k": 1, "extra": 5}, ("k", 1))
    assert graph.match_nodes(["Y"], [("extra", 5)]) == {a}


# -- canonical form ----------------------------------------------------------


def test_empty_graph_constant():
    expected = b'{\n "nodes": [],\n "relationships": []\n}\n'
    assert PropertyGraph().canonical_form() == expected


def test_permuted_insertion_gives_identical_bytes():
    def build(order):
        graph = PropertyGraph()
        ids = {}
        specs = {
            "a": (["A"], {"k": 1}),
            "b": (["B"], {"k": 2}),
            "c": (["C"], {"k": 3}),
        }
        for name in order:
            labels, attrs = specs[name]
            ids[name], _ = graph.upsert_node(labels, attrs, ("k", attrs["k"]))
        graph.upsert_relationship(ids["a"], "T", ids["b"], {}, None)
        graph.upsert_relationship(ids["b"], "T", ids["c"], {"w": 1}, None)
        return graph.canonical_form()

    forms = {build(order) for order in (["a", "b", "c"], ["c", "a", "b"], ["b", "c", "a"])}
    assert len(forms) == 1


def test_canonical_distinguishes_label_order():
    g1 = PropertyGraph()
    g1.upsert_node(["A", "B"], {}, None)
    g2 = PropertyGraph()
    g2.upsert_node(["B", "A"], {}, None)
    assert g1.canonical_form() != g2.canonical_form()


def test_canonical_distinguishes_value_tags():
    g1 = PropertyGraph()
    g1.upsert_node(["A"], {"k": 1}, None)
    g2 = PropertyGraph()
    g2.upsert_node(["A"], {"k": 1.0}, None)
    g3 = PropertyGraph()
    g3.upsert_node(["A"], {"k": True}, None)
    assert len({g1.canonical_form(), g2.canonical_form(), g3.canonical_form()}) == 3


# -- index audits ------------------------------------------------------------


def test_merge_index_audit():
    graph = PropertyGraph()
    graph.upsert_node(["X"], {"a": 1}, ("id", 1))
    graph.upsert_node(["X", "Y"], {"a": 2}, ("id", 1))
    graph.upsert_node(["Y"], {}, ("id", 1))
    graph.upsert_node(["Z"], {}, None)
    assert graph.rebuild_merge_index() == graph.merge_index


def test_rel_merge_index_audit():
    graph = PropertyGraph()
    a, _ = graph.upsert_node(["A"], {}, None)
    b, _ = graph.upsert_node(["B"], {}, None)
    graph.upsert_relationship(a, "T", b, {}, ("n", 1))
    graph.upsert_relationship(a, "T", b, {}, ("n", 2))
    graph.upsert_relationship(a, "T", b, {}, None)
    assert graph.rebuild_rel_merge_index() == graph.rel_merge_index
