"""Graph sinks: canonical JSON, Cypher script, HTTP transactional endpoint.

The JSON sink serializes the committed graph; the script and HTTP sinks
replay the commit stream, one statement per committed element, so merge
semantics survive the trip.
"""

from __future__ import annotations

import base64
import json
import logging
import re
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Union

from .convert import GraphSink, NodeCommit, RelationshipCommit, RunReport
from .errors import RemoteError, TransportError
from .graph import PropertyGraph
from .values import Value

logger = logging.getLogger(__name__)

_BARE_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def emit_json(graph: PropertyGraph, out: IO[bytes]) -> None:
    """Write the canonical byte form of the graph (golden-file stable)."""
    out.write(graph.canonical_form())


class MemoryJsonSink(GraphSink):
    """Holds the graph and writes its canonical JSON at the end of a run."""

    def __init__(self, out: Optional[IO[bytes]] = None):
        self.out = out
        self.payload: bytes = b""

    def finish(self, graph: PropertyGraph, report: RunReport) -> None:
        self.payload = graph.canonical_form()
        if self.out is not None:
            self.out.write(self.payload)


# -- Cypher text rendering -------------------------------------------------


def _name(name: str) -> str:
    """Bare identifier when possible, backquoted (doubled inside) otherwise."""
    if _BARE_NAME.match(name):
        return name
    return "`" + name.replace("`", "``") + "`"


def _labels_text(labels: Iterable[str]) -> str:
    return "".join(f":{_name(label)}" for label in labels)


def _value_text(value: Value) -> str:
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, str):
        return "'" + value.replace("\\", "\\\\").replace("'", "\\'") + "'"
    return repr(value)  # int bare; float keeps its decimal point or exponent


def _map_text(attributes: dict[str, Value], skip: Optional[str] = None) -> str:
    parts = [
        f"{_name(key)}: {_value_text(value)}"
        for key, value in attributes.items()
        if value is not None and key != skip
    ]
    return "{" + ", ".join(parts) + "}" if parts else ""


def node_statement(event: NodeCommit) -> str:
    if event.primary is None:
        props = _map_text(event.attributes)
        labels = _labels_text(event.labels)
        return f"CREATE ({labels}{' ' + props if props else ''});"
    pk_name, pk_value = event.primary
    head = (
        f"MERGE (n:{_name(event.labels[0])} "
        f"{{{_name(pk_name)}: {_value_text(pk_value)}}})"
    )
    parts = [head]
    props = _map_text(event.attributes, skip=pk_name)
    if props:
        parts.append(f"SET n += {props}")
    if len(event.labels) > 1:
        parts.append(f"SET n{_labels_text(event.labels[1:])}")
    return " ".join(parts) + ";"


def relationship_statement(event: RelationshipCommit) -> Optional[str]:
    """Statement text, or None when an endpoint has no primary attribute."""
    if event.source_addr is None or event.target_addr is None:
        return None
    (src_label, src_key, src_value) = event.source_addr
    (tgt_label, tgt_key, tgt_value) = event.target_addr
    match = (
        f"MATCH (a:{_name(src_label)} {{{_name(src_key)}: {_value_text(src_value)}}}), "
        f"(b:{_name(tgt_label)} {{{_name(tgt_key)}: {_value_text(tgt_value)}}})"
    )
    if event.primary is None:
        props = _map_text(event.attributes)
        body = f"CREATE (a)-[:{_name(event.rel_type)}{' ' + props if props else ''}]->(b)"
        return f"{match} {body};"
    pk_name, pk_value = event.primary
    body = (
        f"MERGE (a)-[r:{_name(event.rel_type)} "
        f"{{{_name(pk_name)}: {_value_text(pk_value)}}}]->(b)"
    )
    parts = [match, body]
    props = _map_text(event.attributes, skip=pk_name)
    if props:
        parts.append(f"SET r += {props}")
    return " ".join(parts) + ";"


def _unkeyed_comment(event: RelationshipCommit) -> str:
    return (
        f"// skipped (#{event.source_id})-[:{event.rel_type}]->(#{event.target_id}): "
        f"endpoint without a primary attribute cannot be addressed in script form"
    )


class CypherScriptSink(GraphSink):
    """One statement per committed element; UTF-8, LF, ';'-terminated lines."""

    def __init__(self, out: IO[str]):
        self.out = out
        self.unkeyed_endpoints = 0

    def on_node_commit(self, event: NodeCommit) -> None:
        self.out.write(node_statement(event) + "\n")

    def on_relationship_commit(self, event: RelationshipCommit) -> None:
        statement = relationship_statement(event)
        if statement is None:
            self.unkeyed_endpoints += 1
            logger.warning("cypher sink: unkeyed endpoint on %s", event.rel_type)
            self.out.write(_unkeyed_comment(event) + "\n")
            return
        self.out.write(statement + "\n")


def emit_cypher(
    events: Iterable[Union[NodeCommit, RelationshipCommit]], out: IO[str]
) -> int:
    """Write the script for a recorded commit stream; returns statement count."""
    sink = CypherScriptSink(out)
    count = 0
    for event in events:
        if isinstance(event, NodeCommit):
            sink.on_node_commit(event)
        else:
            sink.on_relationship_commit(event)
        count += 1
    return count


# -- HTTP transactional endpoint -------------------------------------------


@dataclass(frozen=True)
class HttpEndpoint:
    url: str
    database: str = "neo4j"
    user: str = ""
    password: str = ""

    @property
    def commit_url(self) -> str:
        return f"{self.url.rstrip('/')}/db/{self.database}/tx/commit"


def _parameterized_node(event: NodeCommit) -> dict:
    attrs = {k: v for k, v in event.attributes.items() if v is not None}
    if event.primary is None:
        return {
            "statement": f"CREATE (n{_labels_text(event.labels)}) SET n = $props",
            "parameters": {"props": attrs},
        }
    pk_name, pk_value = event.primary
    attrs.pop(pk_name, None)
    text = f"MERGE (n:{_name(event.labels[0])} {{{_name(pk_name)}: $pk}})"
    if attrs:
        text += " SET n += $props"
    if len(event.labels) > 1:
        text += f" SET n{_labels_text(event.labels[1:])}"
    parameters: dict = {"pk": pk_value}
    if attrs:
        parameters["props"] = attrs
    return {"statement": text, "parameters": parameters}


def _parameterized_relationship(event: RelationshipCommit) -> Optional[dict]:
    if event.source_addr is None or event.target_addr is None:
        return None
    (src_label, src_key, src_value) = event.source_addr
    (tgt_label, tgt_key, tgt_value) = event.target_addr
    attrs = {k: v for k, v in event.attributes.items() if v is not None}
    text = (
        f"MATCH (a:{_name(src_label)} {{{_name(src_key)}: $src}}), "
        f"(b:{_name(tgt_label)} {{{_name(tgt_key)}: $tgt}}) "
    )
    parameters: dict = {"src": src_value, "tgt": tgt_value}
    if event.primary is None:
        text += f"CREATE (a)-[r:{_name(event.rel_type)}]->(b)"
        if attrs:
            text += " SET r = $props"
            parameters["props"] = attrs
    else:
        pk_name, pk_value = event.primary
        attrs.pop(pk_name, None)
        text += f"MERGE (a)-[r:{_name(event.rel_type)} {{{_name(pk_name)}: $relpk}}]->(b)"
        parameters["relpk"] = pk_value
        if attrs:
            text += " SET r += $props"
            parameters["props"] = attrs
    return {"statement": text, "parameters": parameters}


@dataclass
class TransportReport:
    requests: int = 0
    statements: int = 0
    skipped_unkeyed: int = 0


class HttpSink(GraphSink):
    """POSTs parameterized statements in batches; strictly one request in
    flight, preserving commit order."""

    def __init__(self, endpoint: HttpEndpoint, batch_size: int = 1000):
        if batch_size < 1:
            raise ValueError("batch_size must be positive")
        self.endpoint = endpoint
        self.batch_size = batch_size
        self.report = TransportReport()
        self._buffer: list[dict] = []

    def on_node_commit(self, event: NodeCommit) -> None:
        self._push(_parameterized_node(event))

    def on_relationship_commit(self, event: RelationshipCommit) -> None:
        statement = _parameterized_relationship(event)
        if statement is None:
            self.report.skipped_unkeyed += 1
            logger.warning("http sink: unkeyed endpoint on %s", event.rel_type)
            return
        self._push(statement)

    def _push(self, statement: dict) -> None:
        self._buffer.append(statement)
        if len(self._buffer) >= self.batch_size:
            self._flush()

    def _flush(self) -> None:
        if not self._buffer:
            return
        batch, self._buffer = self._buffer, []
        _post_statements(self.endpoint, batch)
        self.report.requests += 1
        self.report.statements += len(batch)

    def finish(self, graph: PropertyGraph, report: RunReport) -> None:
        self._flush()


def _post_statements(endpoint: HttpEndpoint, statements: list[dict]) -> None:
    body = json.dumps({"statements": statements}).encode("utf-8")
    request = urllib.request.Request(
        endpoint.commit_url, data=body, method="POST",
        headers={"Content-Type": "application/json"},
    )
    if endpoint.user or endpoint.password:
        token = base64.b64encode(
            f"{endpoint.user}:{endpoint.password}".encode("utf-8")
        ).decode("ascii")
        request.add_header("Authorization", f"Basic {token}")
    try:
        with urllib.request.urlopen(request, timeout=60) as response:
            payload = response.read()
            status = response.status
    except urllib.error.HTTPError as exc:
        raise TransportError(f"HTTP {exc.code} from {endpoint.commit_url}") from exc
    except urllib.error.URLError as exc:
        raise TransportError(f"cannot reach {endpoint.commit_url}: {exc.reason}") from exc
    if status < 200 or status >= 300:
        raise TransportError(f"HTTP {status} from {endpoint.commit_url}")
    try:
        parsed = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise TransportError("endpoint returned a non-JSON body") from exc
    errors = parsed.get("errors") or []
    if errors:
        first = errors[0]
        raise RemoteError(str(first.get("code", "?")), str(first.get("message", "")))


def emit_http(
    events: Iterable[Union[NodeCommit, RelationshipCommit]],
    endpoint: HttpEndpoint,
    batch_size: int = 1000,
) -> TransportReport:
    """Send a recorded commit stream to the endpoint; returns the transport report."""
    sink = HttpSink(endpoint, batch_size)
    for event in events:
        if isinstance(event, NodeCommit):
            sink.on_node_commit(event)
        else:
            sink.on_relationship_commit(event)
    sink._flush()
    return sink.report


class RecordingSink(GraphSink):
    """Keeps the commit stream in memory (tests, two-stage emission)."""

    def __init__(self):
        self.events: list[Union[NodeCommit, RelationshipCommit]] = []

    def on_node_commit(self, event: NodeCommit) -> None:
        self.events.append(event)

    def on_relationship_commit(self, event: RelationshipCommit) -> None:
        self.events.append(event)
