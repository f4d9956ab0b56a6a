"""Interoperable serializations: W3C PROV-JSON (with a ``provagent:``
extension namespace) and DOT for visualization. PROV-JSON import gives
round trips for conformant graphs.
"""

from __future__ import annotations

import json
from typing import Optional, Union

from .events import GraphDelta
from .model import (
    EdgeKind,
    NodeKind,
    ProvCategory,
    ProvEdge,
    ProvNode,
    category_of,
)
from .query import Subgraph
from .store import ProvGraph

PROVAGENT_NS = "https://example.org/ns/provagent#"


class ExportError(Exception):
    pass


_SECTION_OF_CATEGORY = {
    ProvCategory.ENTITY: "entity",
    ProvCategory.ACTIVITY: "activity",
    ProvCategory.AGENT: "agent",
    ProvCategory.LOCATION: "provagent:location",
}

# PROV-JSON role keys per relation; extension relations use the
# provagent prefix on both the section name and the role keys.
_RELATION_SECTIONS: dict[EdgeKind, tuple[str, str, str]] = {
    EdgeKind.USED: ("used", "prov:activity", "prov:entity"),
    EdgeKind.WAS_GENERATED_BY: ("wasGeneratedBy", "prov:entity", "prov:activity"),
    EdgeKind.WAS_ATTRIBUTED_TO: ("wasAttributedTo", "prov:entity", "prov:agent"),
    EdgeKind.WAS_ASSOCIATED_WITH: ("wasAssociatedWith", "prov:activity", "prov:agent"),
    EdgeKind.WAS_INFORMED_BY: ("wasInformedBy", "prov:informed", "prov:informant"),
    EdgeKind.WAS_DERIVED_FROM: (
        "wasDerivedFrom",
        "prov:generatedEntity",
        "prov:usedEntity",
    ),
    EdgeKind.ACTED_ON_BEHALF_OF: (
        "actedOnBehalfOf",
        "prov:delegate",
        "prov:responsible",
    ),
    EdgeKind.AT_LOCATION: ("provagent:atLocation", "provagent:subject", "prov:location"),
    EdgeKind.PART_OF: ("provagent:partOf", "provagent:child", "provagent:parent"),
}

_SECTION_TO_KIND = {section: kind for kind, (section, _, _) in _RELATION_SECTIONS.items()}

_FALLBACK_KIND = {
    "entity": NodeKind.DOMAIN_DATA,
    "activity": NodeKind.TASK,
    "agent": NodeKind.AI_AGENT,
    "provagent:location": NodeKind.LOCATION,
}


def _collect(source: Union[ProvGraph, Subgraph], graph: Optional[ProvGraph]):
    if isinstance(source, ProvGraph):
        nodes = sorted(source.nodes.values(), key=lambda n: n.id)
        edges = sorted((e.triple() for e in source.edges()),
                       key=lambda t: (t[0], t[1].value, t[2]))
        return nodes, edges
    if graph is None:
        raise ExportError("exporting a Subgraph requires the source graph")
    nodes = sorted((graph.node(i) for i in source.nodes), key=lambda n: n.id)
    edges = sorted(source.edges, key=lambda t: (t[0], t[1].value, t[2]))
    return nodes, edges


def to_prov_json(
    source: Union[ProvGraph, Subgraph], graph: Optional[ProvGraph] = None
) -> str:
    """Serialize to PROV-JSON text (deterministic: identical graphs
    produce byte-identical documents).

    Refuses graphs that still contain unresolved placeholder nodes.
    """
    nodes, edges = _collect(source, graph)
    placeholders = [n.id for n in nodes if n.kind is NodeKind.UNKNOWN]
    if placeholders:
        raise ExportError(
            f"cannot export: unresolved placeholders {sorted(placeholders)}"
        )
    doc: dict = {"prefix": {"provagent": PROVAGENT_NS}}
    for node in nodes:
        section = _SECTION_OF_CATEGORY[node.category]
        record = {f"provagent:{k}": v for k, v in sorted(node.attributes.items())}
        record["prov:type"] = f"provagent:{node.kind.value}"
        if node.label is not None:
            record["provagent:label"] = node.label
        if node.first_seen_at:
            record["provagent:first_seen_at"] = node.first_seen_at
        doc.setdefault(section, {})[node.id] = record
    counters: dict[str, int] = {}
    for src, kind, dst in edges:
        section, src_key, dst_key = _RELATION_SECTIONS[kind]
        counters[section] = counters.get(section, 0) + 1
        rel_id = f"_:{section.replace(':', '_')}{counters[section]}"
        doc.setdefault(section, {})[rel_id] = {src_key: src, dst_key: dst}
    return json.dumps(doc, sort_keys=True, indent=2)


def from_prov_json(text: str) -> tuple[GraphDelta, list[str]]:
    """Inverse of to_prov_json on its image.

    Unknown prov:type values fall back to the generic kind of their
    section (DomainData/Task/AIAgent) with a warning. Returns the delta
    plus warnings; apply with ``apply_delta``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ExportError(f"not valid PROV-JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ExportError("PROV-JSON document must be an object")
    delta = GraphDelta()
    warnings: list[str] = []
    seen: dict[str, str] = {}
    for section in ("entity", "activity", "agent", "provagent:location"):
        for node_id, record in sorted((doc.get(section) or {}).items()):
            if node_id in seen:
                raise ExportError(
                    f"node {node_id!r} appears in both {seen[node_id]!r} "
                    f"and {section!r}"
                )
            seen[node_id] = section
            delta.nodes.append(_node_from_record(section, node_id, record, warnings))
    for section, kind in sorted(_SECTION_TO_KIND.items()):
        _, src_key, dst_key = _RELATION_SECTIONS[kind]
        for _, record in sorted((doc.get(section) or {}).items()):
            if src_key not in record or dst_key not in record:
                raise ExportError(f"relation in {section!r} missing role keys")
            delta.edges.append(ProvEdge(record[src_key], kind, record[dst_key]))
    return delta, warnings


def _node_from_record(section, node_id, record, warnings) -> ProvNode:
    prov_type = record.get("prov:type", "")
    kind = None
    if isinstance(prov_type, str) and prov_type.startswith("provagent:"):
        try:
            kind = NodeKind(prov_type[len("provagent:"):])
        except ValueError:
            kind = None
    if kind is None or _SECTION_OF_CATEGORY.get(category_of(kind)) != section:
        if kind is not None:
            raise ExportError(
                f"node {node_id!r}: kind {kind.value} conflicts with "
                f"section {section!r}"
            )
        kind = _FALLBACK_KIND[section]
        warnings.append(
            f"node {node_id!r}: unknown prov:type {prov_type!r}, "
            f"imported as {kind.value}"
        )
    attributes = {}
    label = None
    first_seen_at = ""
    for key, value in record.items():
        if key == "prov:type":
            continue
        if key == "provagent:label":
            label = value
        elif key == "provagent:first_seen_at":
            first_seen_at = value
        elif key.startswith("provagent:"):
            attributes[key[len("provagent:"):]] = value
        else:
            attributes[key] = value
    return ProvNode(
        id=node_id, kind=kind, label=label,
        attributes=attributes, first_seen_at=first_seen_at,
    )


def apply_delta(graph: ProvGraph, delta: GraphDelta) -> None:
    for node in delta.nodes:
        graph.upsert_node(node)
    for edge in delta.edges:
        graph.insert_edge(edge)


_SHAPE_OF_CATEGORY = {
    ProvCategory.ACTIVITY: "box",
    ProvCategory.ENTITY: "ellipse",
    ProvCategory.AGENT: "house",
    ProvCategory.LOCATION: "note",
    ProvCategory.PLACEHOLDER: "diamond",
}

# Drawn reversed under the presentation-reversal flag (top-down layout).
_PRESENTATION_REVERSED = (EdgeKind.USED, EdgeKind.WAS_GENERATED_BY)


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(
    source: Union[ProvGraph, Subgraph],
    graph: Optional[ProvGraph] = None,
    reverse_dataflow_arrows: bool = False,
) -> str:
    """Render to DOT, one node per graph node (shape by category), one
    labeled edge per relation. With the reversal flag, used and
    wasGeneratedBy arrows are drawn reversed (labels preserved) for
    top-down reading order.
    """
    nodes, edges = _collect(source, graph)
    lines = ["digraph provenance {", "  rankdir=TB;"]
    for node in nodes:
        shape = _SHAPE_OF_CATEGORY[node.category]
        lines.append(
            f"  {_dot_quote(node.id)} "
            f"[label={_dot_quote(node.display_label())} shape={shape}];"
        )
    for src, kind, dst in edges:
        a, b = src, dst
        if reverse_dataflow_arrows and kind in _PRESENTATION_REVERSED:
            a, b = dst, src
        lines.append(
            f"  {_dot_quote(a)} -> {_dot_quote(b)} "
            f"[label={_dot_quote(kind.value)}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
