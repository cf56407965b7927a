"""graphetl: relational data to property graph conversion.

Compile a conversion schema, point it at CSV/SQLite/JSONL sources, run
the two-phase converter, and emit the graph as canonical JSON, a Cypher
script, or to an HTTP transactional endpoint.
"""

from .convert import (
    GraphSink,
    NodeCommit,
    PendingNode,
    PendingRelationship,
    RelationshipCommit,
    RunConfig,
    RunReport,
    Subgraph,
    instantiate_element,
    run,
)
from .dsl import LinkedPlan, link_plan, parse_schema, parse_value_expr, print_plan
from .errors import (
    ConversionAborted,
    DuplicateNameError,
    GraphEtlError,
    LinkError,
    MissingAttributeError,
    PrimaryConflictError,
    PrimaryNullError,
    RemoteError,
    SchemaSyntaxError,
    SourceError,
    TransformError,
    TransportError,
    UnknownEndpointError,
)
from .graph import GraphNode, GraphRelationship, PropertyGraph, canonical_form
from .resources import (
    ChainIterator,
    CsvDirIterator,
    JsonlIterator,
    Resource,
    ResourceIterator,
    SqliteIterator,
    chain,
    csv_iterator,
    jsonl_iterator,
    sqlite_iterator,
)
from .sinks import (
    CypherScriptSink,
    HttpEndpoint,
    HttpSink,
    MemoryJsonSink,
    RecordingSink,
    emit_cypher,
    emit_http,
    emit_json,
)
from .wrappers import SUPPRESS, Attribute, WrapperKind, WrapperRegistry, builtin_registry

__version__ = "0.1.0"

__all__ = [
    "Attribute",
    "ChainIterator",
    "ConversionAborted",
    "CsvDirIterator",
    "CypherScriptSink",
    "DuplicateNameError",
    "GraphEtlError",
    "GraphNode",
    "GraphRelationship",
    "GraphSink",
    "HttpEndpoint",
    "HttpSink",
    "JsonlIterator",
    "LinkError",
    "LinkedPlan",
    "MemoryJsonSink",
    "MissingAttributeError",
    "NodeCommit",
    "PendingNode",
    "PendingRelationship",
    "PrimaryConflictError",
    "PrimaryNullError",
    "PropertyGraph",
    "RecordingSink",
    "RelationshipCommit",
    "RemoteError",
    "Resource",
    "ResourceIterator",
    "RunConfig",
    "RunReport",
    "SUPPRESS",
    "SchemaSyntaxError",
    "SourceError",
    "SqliteIterator",
    "Subgraph",
    "TransformError",
    "TransportError",
    "UnknownEndpointError",
    "WrapperKind",
    "WrapperRegistry",
    "builtin_registry",
    "canonical_form",
    "chain",
    "csv_iterator",
    "emit_cypher",
    "emit_http",
    "emit_json",
    "instantiate_element",
    "jsonl_iterator",
    "link_plan",
    "parse_schema",
    "parse_value_expr",
    "print_plan",
    "run",
    "sqlite_iterator",
]
