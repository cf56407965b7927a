"""In-memory property graph with merge semantics and MATCH evaluation.

Nodes merge on (first label, primary attribute name, primary value);
relationships on (source, type, target, primary). Merging overwrites
attributes key-wise with the new values and appends unseen labels; the
merge-label of an existing node never changes.

All mutation flows through a single committer during conversion; the
store itself is not thread-safe.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import PrimaryConflictError, PrimaryNullError, UnknownEndpointError
from .values import Value, index_key, sort_key, values_equal

Primary = Optional[tuple[str, Value]]


@dataclass
class GraphNode:
    node_id: int
    labels: list[str]  # element 0 is the merge-label
    attributes: dict[str, Value]
    primary_key: Primary = None


@dataclass
class GraphRelationship:
    rel_id: int
    source: int
    rel_type: str
    target: int
    attributes: dict[str, Value]
    primary_key: Primary = None


@dataclass
class _MatchIndexes:
    """Demand-built lookup structures, invalidated by node mutations."""

    version: int = -1
    by_label: dict[str, list[int]] = field(default_factory=dict)
    by_label_attr: dict[tuple[str, str], dict[tuple, list[int]]] = field(default_factory=dict)


class PropertyGraph:
    def __init__(self):
        self.nodes: dict[int, GraphNode] = {}
        self.relationships: dict[int, GraphRelationship] = {}
        self.merge_index: dict[tuple[str, str, tuple], int] = {}
        self.rel_merge_index: dict[tuple[int, str, int, str, tuple], int] = {}
        self._next_node_id = 1
        self._next_rel_id = 1
        self._node_version = 0
        self._match = _MatchIndexes()

    # -- nodes ---------------------------------------------------------

    def upsert_node(
        self,
        labels: Iterable[str],
        attributes: dict[str, Value],
        primary: Primary = None,
    ) -> tuple[int, bool]:
        """Create or merge a node; returns (node_id, created)."""
        labels = list(labels)
        if not labels:
            raise ValueError("a node needs at least one label")
        self._node_version += 1
        if primary is not None:
            pk_name, pk_value = primary
            if pk_value is None:
                raise PrimaryNullError(
                    f"primary attribute {pk_name!r} is null on a {labels[0]} node"
                )
            key = (labels[0], pk_name, index_key(pk_value))
            existing = self.merge_index.get(key)
            if existing is not None:
                self._merge_into_node(self.nodes[existing], labels, attributes)
                return existing, False
            attributes = dict(attributes)
            if pk_name in attributes and not values_equal(attributes[pk_name], pk_value):
                raise PrimaryConflictError(
                    f"attribute {pk_name!r} disagrees with the primary value"
                )
            attributes[pk_name] = pk_value
            node_id = self._next_node_id
            self._next_node_id += 1
            self.nodes[node_id] = GraphNode(node_id, labels, attributes, (pk_name, pk_value))
            self.merge_index[key] = node_id
            return node_id, True
        node_id = self._next_node_id
        self._next_node_id += 1
        self.nodes[node_id] = GraphNode(node_id, labels, dict(attributes), None)
        return node_id, True

    def _merge_into_node(
        self, node: GraphNode, labels: list[str], attributes: dict[str, Value]
    ) -> None:
        pk_name, pk_value = node.primary_key  # type: ignore[misc]
        for key, value in attributes.items():
            if key == pk_name and not values_equal(value, pk_value):
                raise PrimaryConflictError(
                    f"cannot change primary attribute {pk_name!r} of a merged "
                    f"{node.labels[0]} node from {pk_value!r} to {value!r}"
                )
            node.attributes[key] = value
        for label in labels:
            if label not in node.labels:
                node.labels.append(label)

    # -- relationships -------------------------------------------------

    def upsert_relationship(
        self,
        source: int,
        rel_type: str,
        target: int,
        attributes: dict[str, Value],
        primary: Primary = None,
    ) -> tuple[int, bool]:
        """Create or merge a relationship; returns (rel_id, created)."""
        if source not in self.nodes:
            raise UnknownEndpointError(f"unknown source node id {source}")
        if target not in self.nodes:
            raise UnknownEndpointError(f"unknown target node id {target}")
        if primary is not None:
            pk_name, pk_value = primary
            if pk_value is None:
                raise PrimaryNullError(
                    f"primary attribute {pk_name!r} is null on a {rel_type} relationship"
                )
            key = (source, rel_type, target, pk_name, index_key(pk_value))
            existing = self.rel_merge_index.get(key)
            if existing is not None:
                rel = self.relationships[existing]
                for k, v in attributes.items():
                    if k == pk_name and not values_equal(v, pk_value):
                        raise PrimaryConflictError(
                            f"cannot change primary attribute {pk_name!r} of a "
                            f"merged {rel_type} relationship"
                        )
                    rel.attributes[k] = v
                return existing, False
            attributes = dict(attributes)
            attributes.setdefault(pk_name, pk_value)
            rel_id = self._next_rel_id
            self._next_rel_id += 1
            self.relationships[rel_id] = GraphRelationship(
                rel_id, source, rel_type, target, attributes, (pk_name, pk_value)
            )
            self.rel_merge_index[key] = rel_id
            return rel_id, True
        rel_id = self._next_rel_id
        self._next_rel_id += 1
        self.relationships[rel_id] = GraphRelationship(
            rel_id, source, rel_type, target, dict(attributes), None
        )
        return rel_id, True

    # -- matching ------------------------------------------------------

    def match_nodes(
        self, labels: list[str], conditions: list[tuple[str, Value]]
    ) -> set[int]:
        """All nodes carrying every label (any position) and satisfying
        every attribute equality."""
        if not labels:
            raise ValueError("MATCH needs at least one label")
        candidates = self._candidates(labels[0], conditions)
        out = set()
        for node_id in candidates:
            node = self.nodes[node_id]
            if all(l in node.labels for l in labels) and all(
                k in node.attributes and values_equal(node.attributes[k], v)
                for k, v in conditions
            ):
                out.add(node_id)
        return out

    def _candidates(self, label: str, conditions: list[tuple[str, Value]]) -> list[int]:
        match = self._match
        if match.version != self._node_version:
            self._match = match = _MatchIndexes(version=self._node_version)
        if conditions:
            key, value = conditions[0]
            index = match.by_label_attr.get((label, key))
            if index is None:
                index = {}
                for node in self.nodes.values():
                    if label in node.labels and key in node.attributes:
                        index.setdefault(index_key(node.attributes[key]), []).append(
                            node.node_id
                        )
                match.by_label_attr[(label, key)] = index
            return index.get(index_key(value), [])
        ids = match.by_label.get(label)
        if ids is None:
            ids = [n.node_id for n in self.nodes.values() if label in n.labels]
            match.by_label[label] = ids
        return ids

    # -- canonical serialization ----------------------------------------

    def canonical_form(self) -> bytes:
        """Deterministic bytes, independent of insertion order.

        Nodes sort by (sorted labels, sorted attributes, primary, ordered
        labels); content-identical nodes are interchangeable and compare
        as a multiset. Relationships sort by endpoint canonical indexes.
        """
        node_items = list(self.nodes.values())
        keyed = []
        for seq, node in enumerate(node_items):
            record = {
                "labels": list(node.labels),
                "attributes": dict(node.attributes),
                "primary": list(node.primary_key) if node.primary_key else None,
            }
            key = (
                sorted(node.labels),
                sorted((k, sort_key(v)) for k, v in node.attributes.items()),
                (node.primary_key[0], sort_key(node.primary_key[1]))
                if node.primary_key
                else (),
                list(node.labels),
            )
            keyed.append((key, seq, node.node_id, record))
        keyed.sort(key=lambda item: (item[0], item[1]))
        index_of = {node_id: pos for pos, (_, _, node_id, _) in enumerate(keyed)}

        rel_records = []
        for rel in self.relationships.values():
            record = {
                "source": index_of[rel.source],
                "type": rel.rel_type,
                "target": index_of[rel.target],
                "attributes": dict(rel.attributes),
                "primary": list(rel.primary_key) if rel.primary_key else None,
            }
            key = (
                record["source"],
                rel.rel_type,
                record["target"],
                sorted((k, sort_key(v)) for k, v in rel.attributes.items()),
                (rel.primary_key[0], sort_key(rel.primary_key[1]))
                if rel.primary_key
                else (),
            )
            rel_records.append((key, record))
        rel_records.sort(key=lambda item: item[0])

        document = {
            "nodes": [record for _, _, _, record in keyed],
            "relationships": [record for _, record in rel_records],
        }
        text = json.dumps(document, sort_keys=True, indent=1, ensure_ascii=True)
        return (text + "\n").encode("utf-8")

    # -- audits (used by tests) ------------------------------------------

    def rebuild_merge_index(self) -> dict[tuple[str, str, tuple], int]:
        rebuilt: dict[tuple[str, str, tuple], int] = {}
        for node in self.nodes.values():
            if node.primary_key is not None:
                pk_name, pk_value = node.primary_key
                rebuilt[(node.labels[0], pk_name, index_key(pk_value))] = node.node_id
        return rebuilt

    def rebuild_rel_merge_index(self) -> dict[tuple[int, str, int, str, tuple], int]:
        rebuilt: dict[tuple[int, str, int, str, tuple], int] = {}
        for rel in self.relationships.values():
            if rel.primary_key is not None:
                pk_name, pk_value = rel.primary_key
                rebuilt[
                    (rel.source, rel.rel_type, rel.target, pk_name, index_key(pk_value))
                ] = rel.rel_id
        return rebuilt


def canonical_form(graph: PropertyGraph) -> bytes:
    return graph.canonical_form()
