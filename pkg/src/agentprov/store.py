"""Persistent provenance graph.

Durability comes from an append-only newline-delimited log; all indexes
live in memory and are rebuilt by replaying the log on open. Writes are
serialized by a lock (single-writer discipline); readers can share the
graph freely.

Log records, one JSON object per line:
    {"rec": "node", "id", "kind", "label", "attributes", "first_seen_at", "stamp"}
    {"rec": "edge", "src", "kind", "dst", "attributes"}
    {"rec": "event_id", "id"}
"""

from __future__ import annotations

import json
import threading
from collections import defaultdict
from typing import Iterable, Iterator, Optional

from .model import (
    EdgeKind,
    NodeKind,
    ProvCategory,
    ProvEdge,
    ProvNode,
    check_edge,
)


class StoreError(Exception):
    pass


class UnknownNodeError(StoreError):
    def __init__(self, node_id: str):
        super().__init__(f"unknown node id {node_id!r}")
        self.node_id = node_id


class KindConflictError(StoreError):
    pass


class EdgeConstraintError(StoreError):
    pass


class CorruptLogError(StoreError):
    pass


# Stamp ordering implements last-writer-wins per attribute key:
# (emitted_at, event_id), compared lexicographically. Writes without a
# stamp always win (direct API use).
_MAX_STAMP = ("￿", "￿")


class ProvGraph:
    """Consolidated, indexed provenance graph with optional durability.

    Pass ``path=None`` for a memory-only graph (tests, import targets).
    """

    def __init__(self, path: Optional[str] = None, lenient: bool = False):
        self.log_path = path
        self.nodes: dict[str, ProvNode] = {}
        self.seen_event_ids: set[str] = set()
        self.skipped_records = 0
        self._edges: dict[tuple[str, EdgeKind, str], ProvEdge] = {}
        self._out: dict[str, set] = defaultdict(set)  # id -> {(kind, dst)}
        self._in: dict[str, set] = defaultdict(set)  # id -> {(kind, src)}
        self._attr_stamps: dict[str, dict[str, tuple]] = defaultdict(dict)
        self._lock = threading.RLock()
        self._log = None
        if path is not None:
            self._replay(path, lenient)
            self._log = open(path, "a", encoding="utf-8")

    # -- lifecycle ---------------------------------------------------------

    @classmethod
    def open(cls, path: str, lenient: bool = False) -> "ProvGraph":
        return cls(path=path, lenient=lenient)

    def close(self) -> None:
        with self._lock:
            if self._log is not None:
                self._log.flush()
                self._log.close()
                self._log = None

    def flush(self) -> None:
        with self._lock:
            if self._log is not None:
                self._log.flush()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _replay(self, path: str, lenient: bool) -> None:
        try:
            fh = open(path, "r", encoding="utf-8")
        except FileNotFoundError:
            return
        with fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    self._apply_record(rec)
                except (ValueError, KeyError, StoreError) as exc:
                    if lenient:
                        self.skipped_records += 1
                        continue
                    raise CorruptLogError(
                        f"{path}:{lineno}: bad log record: {exc}"
                    ) from exc

    def _apply_record(self, rec: dict) -> None:
        kind = rec["rec"]
        if kind == "node":
            node = ProvNode(
                id=rec["id"],
                kind=NodeKind(rec["kind"]),
                label=rec.get("label"),
                attributes=dict(rec.get("attributes") or {}),
                first_seen_at=rec.get("first_seen_at", ""),
            )
            stamp = rec.get("stamp")
            self.upsert_node(node, stamp=tuple(stamp) if stamp else None, _log=False)
        elif kind == "edge":
            edge = ProvEdge(
                rec["src"], EdgeKind(rec["kind"]), rec["dst"], rec.get("attributes")
            )
            self.insert_edge(edge, _log=False)
        elif kind == "event_id":
            self.seen_event_ids.add(rec["id"])
        else:
            raise CorruptLogError(f"unknown record type {kind!r}")

    def _append(self, rec: dict) -> None:
        if self._log is not None:
            self._log.write(json.dumps(rec, sort_keys=True, separators=(",", ":")))
            self._log.write("\n")

    # -- writes ------------------------------------------------------------

    def upsert_node(
        self,
        node: ProvNode,
        stamp: Optional[tuple] = None,
        _log: bool = True,
    ) -> ProvNode:
        """Insert or merge a node; returns the resolved stored node.

        Attribute (and label) merge is last-writer-wins by stamp, so the
        final state is independent of event arrival order. A concrete
        kind resolves an Unknown placeholder in place; two different
        concrete kinds for one id are a conflict.
        """
        if not node.id:
            raise StoreError("node id must be nonempty")
        effective = stamp if stamp is not None else _MAX_STAMP
        with self._lock:
            existing = self.nodes.get(node.id)
            if existing is None:
                stored = ProvNode(
                    id=node.id,
                    kind=node.kind,
                    label=None,
                    attributes={},
                    first_seen_at=node.first_seen_at,
                )
                self.nodes[node.id] = stored
                stamps = self._attr_stamps[node.id]
                if node.label is not None:
                    stored.label = node.label
                    stamps["__label__"] = effective
                for key, value in node.attributes.items():
                    stored.attributes[key] = value
                    stamps[key] = effective
            else:
                stored = existing
                if node.kind is not NodeKind.UNKNOWN:
                    if existing.kind is NodeKind.UNKNOWN:
                        existing.kind = node.kind
                    elif existing.kind is not node.kind:
                        raise KindConflictError(
                            f"node {node.id!r} already has kind "
                            f"{existing.kind.value}, cannot become {node.kind.value}"
                        )
                if node.first_seen_at and (
                    not existing.first_seen_at
                    or node.first_seen_at < existing.first_seen_at
                ):
                    existing.first_seen_at = node.first_seen_at
                stamps = self._attr_stamps[node.id]
                if node.label is not None and effective >= stamps.get("__label__", ()):
                    existing.label = node.label
                    stamps["__label__"] = effective
                for key, value in node.attributes.items():
                    if effective >= stamps.get(key, ()):
                        existing.attributes[key] = value
                        stamps[key] = effective
            if _log:
                self._append(
                    {
                        "rec": "node",
                        "id": node.id,
                        "kind": node.kind.value,
                        "label": node.label,
                        "attributes": node.attributes,
                        "first_seen_at": node.first_seen_at,
                        "stamp": list(stamp) if stamp is not None else None,
                    }
                )
            return stored

    def insert_edge(self, edge: ProvEdge, _log: bool = True) -> bool:
        """Insert an edge; returns False on an exact duplicate triple.

        Missing endpoints are created as Unknown placeholders so no edge
        is ever dropped because an endpoint arrived late.
        """
        with self._lock:
            triple = edge.triple()
            if triple in self._edges:
                return False
            for endpoint in (edge.src, edge.dst):
                if endpoint not in self.nodes:
                    self.upsert_node(
                        ProvNode(id=endpoint, kind=NodeKind.UNKNOWN), _log=_log
                    )
            src_cat = self.nodes[edge.src].category
            dst_cat = self.nodes[edge.dst].category
            problem = check_edge(edge.kind, src_cat, dst_cat)
            if problem is not None:
                raise EdgeConstraintError(problem)
            if edge.kind is EdgeKind.WAS_GENERATED_BY:
                for kind, dst in self._out.get(edge.src, ()):
                    if kind is EdgeKind.WAS_GENERATED_BY and dst != edge.dst:
                        raise EdgeConstraintError(
                            f"entity {edge.src!r} already generated by {dst!r}, "
                            f"cannot add second generator {edge.dst!r}"
                        )
            if _log:
                self._append(
                    {
                        "rec": "edge",
                        "src": edge.src,
                        "kind": edge.kind.value,
                        "dst": edge.dst,
                        "attributes": edge.attributes,
                    }
                )
            self._edges[triple] = edge
            self._out[edge.src].add((edge.kind, edge.dst))
            self._in[edge.dst].add((edge.kind, edge.src))
            return True

    def mark_event(self, event_id: str) -> bool:
        """Record an event id; False if it was already seen (duplicate)."""
        with self._lock:
            if event_id in self.seen_event_ids:
                return False
            self.seen_event_ids.add(event_id)
            self._append({"rec": "event_id", "id": event_id})
            return True

    # -- reads -------------------------------------------------------------

    def node(self, node_id: str) -> ProvNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNodeError(node_id) from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self.nodes

    def edges(self) -> Iterator[ProvEdge]:
        return iter(list(self._edges.values()))

    def edge_count(self) -> int:
        return len(self._edges)

    def neighbors(
        self,
        node_id: str,
        direction: str = "out",
        kinds: Optional[Iterable[EdgeKind]] = None,
    ) -> list[tuple[EdgeKind, str]]:
        """Adjacent (edge kind, node id) pairs, sorted by kind then id."""
        if node_id not in self.nodes:
            raise UnknownNodeError(node_id)
        index = self._out if direction == "out" else self._in
        pairs = index.get(node_id, ())
        if kinds is not None:
            wanted = set(kinds)
            pairs = [p for p in pairs if p[0] in wanted]
        return sorted(pairs, key=lambda p: (p[0].value, p[1]))

    def placeholder_ids(self) -> list[str]:
        return sorted(
            n.id for n in self.nodes.values() if n.kind is NodeKind.UNKNOWN
        )

    # -- canonical form ----------------------------------------------------

    def canonical_dict(self) -> dict:
        with self._lock:
            nodes = [
                {
                    "id": n.id,
                    "kind": n.kind.value,
                    "label": n.label or "",
                    "attributes": {k: n.attributes[k] for k in sorted(n.attributes)},
                    "first_seen_at": n.first_seen_at,
                }
                for n in sorted(self.nodes.values(), key=lambda n: n.id)
            ]
            edges = sorted(
                [s, k.value, d] for (s, k, d) in self._edges
            )
            return {"nodes": nodes, "edges": edges}

    def canonical_form(self) -> str:
        """Deterministic serialization used for graph equality."""
        return json.dumps(
            self.canonical_dict(), sort_keys=True, separators=(",", ":")
        )
