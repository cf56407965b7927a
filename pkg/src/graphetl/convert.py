"""Two-phase conversion of resources into a property graph.

Phase 1 instantiates node templates over a full pass; phase 2 resets the
iterator and instantiates relationship templates over a second pass.
Batches of resources are transformed in parallel worker processes
(forked, so registries with closures need no pickling); all graph
mutation happens serially in the calling process through one committer.
With ``workers=1`` the run is fully sequential in-process, which is also
the mode required for cross-resource stateful wrappers.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import multiprocessing
import os
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .dsl.ast import AttrRef, Literal, MatchSpec, WrapperCall
from .dsl.linker import LinkedNodeTemplate, LinkedPlan, LinkedRelTemplate
from .errors import (
    ConversionAborted,
    GraphEtlError,
    MissingAttributeError,
    PrimaryNullError,
    TransformError,
)
from .graph import PropertyGraph
from .resources import Resource, ResourceIterator
from .values import Value, is_value
from .wrappers import SUPPRESS, Attribute, WrapperKind, WrapperRegistry

logger = logging.getLogger(__name__)

Primary = Optional[tuple[str, Value]]

# Endpoint of a pending relationship: ("id", node_template_index) resolved
# through the phase-1 node registry, or ("match", labels, conditions)
# evaluated against the committed graph.
EndpointRef = tuple


@dataclass(slots=True)
class PendingNode:
    labels: list[str]
    attributes: dict[str, Value]
    primary: Primary
    template_index: int


@dataclass(slots=True)
class PendingRelationship:
    source: EndpointRef
    rel_type: str
    target: EndpointRef
    attributes: dict[str, Value]
    primary: Primary
    template_index: int


@dataclass
class Subgraph:
    """Pending elements produced from one single resource."""

    nodes: list[PendingNode] = field(default_factory=list)
    relationships: list[PendingRelationship] = field(default_factory=list)


@dataclass
class RunConfig:
    workers: Optional[int] = None  # None: available parallelism
    batch_size: int = 10000
    on_error: str = "fail"  # "fail" | "skip"
    progress: Optional[Callable[[int, Optional[int]], None]] = None

    def __post_init__(self):
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.on_error not in ("fail", "skip"):
            raise ValueError("on_error must be 'fail' or 'skip'")


@dataclass
class RunReport:
    resources: int = 0
    nodes_created: int = 0
    nodes_merged: int = 0
    relationships_created: int = 0
    relationships_merged: int = 0
    suppressed: int = 0
    errors_skipped: int = 0
    warnings: int = 0
    phase1_seconds: float = 0.0
    phase2_seconds: float = 0.0
    graph: Optional[PropertyGraph] = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        del out["graph"]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class NodeCommit:
    seq: int  # commit sequence number, monotone across the whole run
    phase: int
    node_id: int
    labels: tuple[str, ...]
    attributes: dict[str, Value]
    primary: Primary
    created: bool


@dataclass(frozen=True)
class RelationshipCommit:
    seq: int
    phase: int
    rel_id: int
    source_id: int
    target_id: int
    rel_type: str
    attributes: dict[str, Value]
    primary: Primary
    created: bool
    # (merge label, primary name, primary value) of each endpoint, when keyed
    source_addr: Optional[tuple[str, str, Value]]
    target_addr: Optional[tuple[str, str, Value]]


class GraphSink:
    """Consumes the serialized commit stream; see the sinks module."""

    def on_node_commit(self, event: NodeCommit) -> None:
        pass

    def on_relationship_commit(self, event: RelationshipCommit) -> None:
        pass

    def finish(self, graph: PropertyGraph, report: RunReport) -> None:
        pass


# -- element instantiation (worker side) --------------------------------


def _eval_expr(expr, resource: Resource, key: str, registry: WrapperRegistry):
    """Evaluate a value expression to an Attribute, or SUPPRESS."""
    kind_expr = type(expr)
    if kind_expr is Literal:
        return Attribute(key, expr.value)
    if kind_expr is AttrRef:
        attrs = resource.attributes
        if expr.attr not in attrs:
            raise MissingAttributeError(expr.attr, resource.type_name, resource.ordinal)
        value = attrs[expr.attr]
        if not is_value(value):
            raise TransformError(
                "<resource>", resource.type_name, resource.ordinal,
                TypeError(f"attribute {expr.attr!r} has unsupported type "
                          f"{type(value).__name__}"),
            )
        return Attribute(key, value)
    # WrapperCall
    kind, fn = registry.lookup(expr.wrapper)  # type: ignore[misc]  # linker checked
    if kind == WrapperKind.ATTR_PRE:
        # The preprocessor sees a copy: its changes are scoped to this
        # one evaluation.
        try:
            out = fn(resource.copy())
        except Exception as exc:
            raise TransformError(expr.wrapper, resource.type_name, resource.ordinal, exc) from exc
        if out is SUPPRESS:
            return SUPPRESS
        return _eval_expr(expr.arg, out, key, registry)
    inner = _eval_expr(expr.arg, resource, key, registry)
    if inner is SUPPRESS:
        return SUPPRESS
    try:
        out = fn(inner)
    except Exception as exc:
        raise TransformError(expr.wrapper, resource.type_name, resource.ordinal, exc) from exc
    if out is SUPPRESS:
        return SUPPRESS
    if not isinstance(out, Attribute) or not is_value(out.value):
        raise TransformError(
            expr.wrapper, resource.type_name, resource.ordinal,
            TypeError("attribute postprocessor must return an Attribute or SUPPRESS"),
        )
    return out


def _label_string(value: Value, resource: Resource) -> str:
    if isinstance(value, str):
        return value
    if value is None:
        raise GraphEtlError(
            f"label/type expression evaluated to null on "
            f"{resource.type_name}[{resource.ordinal}]"
        )
    if value is True:
        return "true"
    if value is False:
        return "false"
    return str(value)


def _apply_pres(template, resource: Resource, registry: WrapperRegistry):
    """Run subgraph preprocessors (innermost first); SUPPRESS or a Resource."""
    if not template.pre_wrappers:
        return resource
    current = resource.copy()  # wrapper edits are template-scoped
    for name in template.pre_wrappers:
        _, fn = registry.lookup(name)  # type: ignore[misc]
        try:
            out = fn(current)
        except Exception as exc:
            raise TransformError(name, resource.type_name, resource.ordinal, exc) from exc
        if out is SUPPRESS:
            return SUPPRESS
        current = out
    return current


def _apply_posts(template, subgraph: Subgraph, resource: Resource,
                 registry: WrapperRegistry) -> Subgraph:
    for name in template.post_wrappers:
        _, fn = registry.lookup(name)  # type: ignore[misc]
        try:
            out = fn(subgraph)
        except Exception as exc:
            raise TransformError(name, resource.type_name, resource.ordinal, exc) from exc
        if not isinstance(out, Subgraph):
            raise TransformError(
                name, resource.type_name, resource.ordinal,
                TypeError("subgraph postprocessor must return a Subgraph"),
            )
        subgraph = out
    return subgraph


def _eval_attributes(specs, resource: Resource, registry: WrapperRegistry):
    attrs: dict[str, Value] = {}
    primary: Primary = None
    for spec in specs:
        out = _eval_expr(spec.value, resource, spec.key, registry)
        if out is SUPPRESS:
            continue
        attrs[out.key] = out.value
        if spec.primary:
            if out.value is None:
                raise PrimaryNullError(
                    f"primary attribute {out.key!r} is null on "
                    f"{resource.type_name}[{resource.ordinal}]"
                )
            primary = (out.key, out.value)
    return attrs, primary


def _instantiate_node(template: LinkedNodeTemplate, resource: Resource,
                      registry: WrapperRegistry) -> tuple[list[PendingNode], int]:
    """Returns (pending nodes, suppressed count)."""
    res = _apply_pres(template, resource, registry)
    if res is SUPPRESS:
        return [], 1
    labels = []
    for expr in template.labels:
        out = _eval_expr(expr, res, "", registry)
        if out is SUPPRESS:
            return [], 1  # suppressed label: no partial element
        labels.append(_label_string(out.value, resource))
    attrs, primary = _eval_attributes(template.attributes, res, registry)
    node = PendingNode(labels, attrs, primary, template.template_index)
    if not template.post_wrappers:
        return [node], 0
    subgraph = _apply_posts(template, Subgraph(nodes=[node]), resource, registry)
    return subgraph.nodes, max(0, 1 - len(subgraph.nodes))


def _resolve_endpoint(ref, resource: Resource, registry: WrapperRegistry):
    """Match refs evaluate per resource; identifier refs defer to commit."""
    if isinstance(ref, int):
        return ("id", ref)
    assert isinstance(ref, MatchSpec)
    labels = []
    for expr in ref.labels:
        out = _eval_expr(expr, resource, "", registry)
        if out is SUPPRESS:
            return SUPPRESS
        labels.append(_label_string(out.value, resource))
    conditions = []
    for key, expr in ref.conditions:
        out = _eval_expr(expr, resource, key, registry)
        if out is SUPPRESS:
            return SUPPRESS
        conditions.append((out.key, out.value))
    return ("match", tuple(labels), tuple(conditions))


def _instantiate_relationship(
    template: LinkedRelTemplate, resource: Resource, registry: WrapperRegistry
) -> tuple[list[PendingRelationship], int]:
    res = _apply_pres(template, resource, registry)
    if res is SUPPRESS:
        return [], 1
    out = _eval_expr(template.rel_type, res, "", registry)
    if out is SUPPRESS:
        return [], 1  # suppressed type: no partial element
    rel_type = _label_string(out.value, resource)
    source = _resolve_endpoint(template.source, res, registry)
    if source is SUPPRESS:
        return [], 1
    target = _resolve_endpoint(template.target, res, registry)
    if target is SUPPRESS:
        return [], 1
    attrs, primary = _eval_attributes(template.attributes, res, registry)
    rel = PendingRelationship(source, rel_type, target, attrs, primary,
                              template.template_index)
    if not template.post_wrappers:
        return [rel], 0
    subgraph = _apply_posts(template, Subgraph(relationships=[rel]), resource, registry)
    return subgraph.relationships, max(0, 1 - len(subgraph.relationships))


def instantiate_element(template, resource: Resource, registry: WrapperRegistry):
    """Instantiate one template for one resource.

    Returns a pending element, a list when a postprocessor multiplied the
    subgraph, or SUPPRESS. Raises TransformError / MissingAttributeError /
    PrimaryNullError.
    """
    if isinstance(template, LinkedNodeTemplate):
        elements, _ = _instantiate_node(template, resource, registry)
    else:
        elements, _ = _instantiate_relationship(template, resource, registry)
    if not elements:
        return SUPPRESS
    if len(elements) == 1:
        return elements[0]
    return elements


# -- batch transformation ------------------------------------------------

# One row per resource: (type_name, seq, ordinal, attributes).
# Result rows: (type_name, seq, ordinal, elements, suppressed, errors).


def _transform_rows(plan: LinkedPlan, phase: int, rows: list) -> list:
    registry = plan.registry
    out = []
    for type_name, seq, ordinal, attrs in rows:
        entity = plan.entities[type_name]
        resource = Resource(type_name, ordinal, attrs)
        elements: list = []
        suppressed = 0
        errors: list[tuple[int, str]] = []
        templates = entity.node_templates if phase == 1 else entity.relationship_templates
        for template in templates:
            try:
                if phase == 1:
                    made, skipped = _instantiate_node(template, resource, registry)
                else:
                    made, skipped = _instantiate_relationship(template, resource, registry)
            except GraphEtlError as exc:
                errors.append((template.template_index, str(exc)))
                continue
            elements.extend(made)
            suppressed += skipped
        out.append((type_name, seq, ordinal, elements, suppressed, errors))
    return out


_WORKER_PLAN: Optional[LinkedPlan] = None


def _pool_transform(args):
    phase, rows = args
    assert _WORKER_PLAN is not None
    return _transform_rows(_WORKER_PLAN, phase, rows)


# -- committing (single writer) ------------------------------------------


class CommitGuard:
    """Asserts the transfer into the graph is serialized (never reentered)."""

    def __init__(self):
        self._active = False

    def __enter__(self):
        if self._active:
            raise RuntimeError("commit guard reentered: transfers must be serialized")
        self._active = True
        return self

    def __exit__(self, *exc_info):
        self._active = False
        return False


class _Committer:
    def __init__(self, graph: PropertyGraph, sink: GraphSink, config: RunConfig,
                 report: RunReport):
        self.graph = graph
        self.sink = sink
        self.config = config
        self.report = report
        self.node_registry: dict[tuple[str, int, int], int] = {}
        self.guard = CommitGuard()
        self._commit_seq = 0
        # the base GraphSink discards events; skip building them entirely
        self._emit_events = type(sink) is not GraphSink

    def _element_error(self, type_name: str, ordinal: int, message: str) -> None:
        if self.config.on_error == "fail":
            raise ConversionAborted(f"{type_name}[{ordinal}]: {message}")
        self.report.errors_skipped += 1
        logger.warning("skipped %s[%d]: %s", type_name, ordinal, message)

    def _warn(self, message: str) -> None:
        self.report.warnings += 1
        logger.warning("%s", message)

    def commit_batch(self, phase: int, result_rows: list) -> None:
        with self.guard:
            for type_name, seq, ordinal, elements, suppressed, errors in result_rows:
                self.report.suppressed += suppressed
                for _tidx, message in errors:
                    self._element_error(type_name, ordinal, message)
                for element in elements:
                    try:
                        if phase == 1:
                            self._commit_node(type_name, seq, element)
                        else:
                            self._commit_relationship(type_name, seq, ordinal, element)
                    except ConversionAborted:
                        raise
                    except GraphEtlError as exc:
                        self._element_error(type_name, ordinal, str(exc))

    def _commit_node(self, type_name: str, seq: int, pending: PendingNode) -> None:
        node_id, created = self.graph.upsert_node(
            pending.labels, pending.attributes, pending.primary
        )
        self.node_registry[(type_name, seq, pending.template_index)] = node_id
        if created:
            self.report.nodes_created += 1
        else:
            self.report.nodes_merged += 1
        self._commit_seq += 1
        if self._emit_events:
            self.sink.on_node_commit(
                NodeCommit(
                    seq=self._commit_seq,
                    phase=1,
                    node_id=node_id,
                    labels=tuple(pending.labels),
                    attributes=pending.attributes,
                    primary=pending.primary,
                    created=created,
                )
            )

    def _endpoint_ids(self, type_name: str, seq: int, ref: EndpointRef) -> list[int]:
        if ref[0] == "id":
            node_id = self.node_registry.get((type_name, seq, ref[1]))
            if node_id is None:
                self._warn(
                    f"{type_name}[{seq}]: endpoint node template {ref[1]} was "
                    f"suppressed or failed; relationship skipped"
                )
                return []
            return [node_id]
        _, labels, conditions = ref
        ids = sorted(self.graph.match_nodes(list(labels), list(conditions)))
        if not ids:
            self._warn(
                f"{type_name}[{seq}]: MATCH {list(labels)} {list(conditions)} "
                f"found no nodes; relationship skipped"
            )
        return ids

    def _commit_relationship(self, type_name: str, seq: int, ordinal: int,
                             pending: PendingRelationship) -> None:
        source_ids = self._endpoint_ids(type_name, seq, pending.source)
        if not source_ids:
            return
        target_ids = self._endpoint_ids(type_name, seq, pending.target)
        if not target_ids:
            return
        # One relationship per combination of source and target.
        for source_id in source_ids:
            for target_id in target_ids:
                rel_id, created = self.graph.upsert_relationship(
                    source_id, pending.rel_type, target_id,
                    pending.attributes, pending.primary,
                )
                if created:
                    self.report.relationships_created += 1
                else:
                    self.report.relationships_merged += 1
                self._commit_seq += 1
                if self._emit_events:
                    self.sink.on_relationship_commit(
                        RelationshipCommit(
                            seq=self._commit_seq,
                            phase=2,
                            rel_id=rel_id,
                            source_id=source_id,
                            target_id=target_id,
                            rel_type=pending.rel_type,
                            attributes=pending.attributes,
                            primary=pending.primary,
                            created=created,
                            source_addr=self._addr(source_id),
                            target_addr=self._addr(target_id),
                        )
                    )

    def _addr(self, node_id: int) -> Optional[tuple[str, str, Value]]:
        node = self.graph.nodes[node_id]
        if node.primary_key is None:
            return None
        return (node.labels[0], node.primary_key[0], node.primary_key[1])


# -- the run -------------------------------------------------------------


def run(
    plan: LinkedPlan,
    iterator: ResourceIterator,
    sink: Optional[GraphSink] = None,
    config: Optional[RunConfig] = None,
    graph: Optional[PropertyGraph] = None,
) -> RunReport:
    """Execute a linked plan over a resource stream in two phases."""
    config = config or RunConfig()
    graph = graph if graph is not None else PropertyGraph()
    sink = sink or GraphSink()
    report = RunReport(graph=graph)
    committer = _Committer(graph, sink, config, report)
    workers = config.workers if config.workers is not None else (os.cpu_count() or 1)

    pool = None
    global _WORKER_PLAN
    if workers > 1:
        try:
            context = multiprocessing.get_context("fork")
        except ValueError:
            logger.warning("fork start method unavailable; running sequentially")
        else:
            _WORKER_PLAN = plan  # inherited by forked workers
            pool = context.Pool(processes=workers)
    try:
        started = time.perf_counter()
        _run_phase(1, plan, iterator, committer, pool, workers, config, report)
        report.phase1_seconds = time.perf_counter() - started

        iterator.reset()
        started = time.perf_counter()
        _run_phase(2, plan, iterator, committer, pool, workers, config, report)
        report.phase2_seconds = time.perf_counter() - started
    except BaseException:
        if pool is not None:
            pool.terminate()
            pool.join()
            pool = None
        raise
    finally:
        if pool is not None:
            pool.close()
            pool.join()
        _WORKER_PLAN = None
    sink.finish(graph, report)
    return report


def _run_phase(
    phase: int,
    plan: LinkedPlan,
    iterator: ResourceIterator,
    committer: _Committer,
    pool,
    workers: int,
    config: RunConfig,
    report: RunReport,
):
    progress = config.progress
    total = iterator.count() if progress else None
    if progress:
        progress(0, total)

    relevant = {
        name: bool(entity.node_templates if phase == 1 else entity.relationship_templates)
        for name, entity in plan.entities.items()
    }
    seq_counters: dict[str, int] = {}
    done = 0
    span = 0
    rows: list = []
    inflight: deque = deque()  # (async_result, span)
    max_inflight = max(2, workers * 2)

    def commit_oldest():
        nonlocal done
        result, batch_span = inflight.popleft()
        committer.commit_batch(phase, result.get())
        done += batch_span
        if progress:
            progress(done, total)

    def flush():
        nonlocal rows, span, done
        if not rows and not span:
            return
        batch_rows, batch_span = rows, span
        rows, span = [], 0
        if pool is None:
            if batch_rows:
                committer.commit_batch(phase, _transform_rows(plan, phase, batch_rows))
            done += batch_span
            if progress:
                progress(done, total)
        else:
            while len(inflight) >= max_inflight:
                commit_oldest()
            handle = pool.apply_async(_pool_transform, ((phase, batch_rows),))
            inflight.append((handle, batch_span))

    for resource in iterator:
        if phase == 1:
            report.resources += 1
        span += 1
        type_name = resource.type_name
        seq = seq_counters.get(type_name, 0)
        seq_counters[type_name] = seq + 1
        if relevant.get(type_name, False):
            rows.append((type_name, seq, resource.ordinal, resource.attributes))
            if len(rows) >= config.batch_size:
                flush()
    flush()
    while inflight:
        commit_oldest()
    if progress:
        progress(done, total)
