"""Event-stream consolidation into the store.

Sources: iterables of lines, files, stdin, or a TCP line listener.
Ingestion is idempotent per event_id and tolerates arbitrary event
reordering through placeholder nodes.
"""

from __future__ import annotations

import socket
import socketserver
import sys
import threading
from dataclasses import dataclass, fields
from typing import Iterable, Optional

from .events import EventEnvelope, EventError, translate
from .model import NodeKind
from .store import ProvGraph


@dataclass
class IngestStats:
    events_seen: int = 0
    events_duplicated: int = 0
    events_rejected: int = 0
    nodes_upserted: int = 0
    edges_inserted: int = 0
    placeholders_created: int = 0
    placeholders_resolved: int = 0

    def merge(self, other: "IngestStats") -> "IngestStats":
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def ingest_event(envelope: EventEnvelope, graph: ProvGraph) -> IngestStats:
    """Apply one envelope to the store; returns the stats delta.

    Duplicates (by event_id) leave the store unchanged. Malformed
    payloads are rejected whole; nothing is written for them.
    """
    stats = IngestStats(events_seen=1)
    try:
        delta = translate(envelope)
    except EventError:
        stats.events_rejected = 1
        return stats
    if not graph.mark_event(envelope.event_id):
        stats.events_duplicated = 1
        return stats
    stamp = (envelope.emitted_at, envelope.event_id)
    for node in delta.nodes:
        existing = graph.nodes.get(node.id)
        if existing is None and node.kind is NodeKind.UNKNOWN:
            stats.placeholders_created += 1
        elif (
            existing is not None
            and existing.kind is NodeKind.UNKNOWN
            and node.kind is not NodeKind.UNKNOWN
        ):
            stats.placeholders_resolved += 1
        graph.upsert_node(node, stamp=stamp)
        stats.nodes_upserted += 1
    for edge in delta.edges:
        if graph.insert_edge(edge):
            stats.edges_inserted += 1
    return stats


def ingest_lines(lines: Iterable[str], graph: ProvGraph) -> IngestStats:
    stats = IngestStats()
    for line in lines:
        line = line.strip()
        if not line:
            continue
        try:
            envelope = EventEnvelope.from_json(line)
        except EventError:
            stats.events_seen += 1
            stats.events_rejected += 1
            continue
        stats.merge(ingest_event(envelope, graph))
    return stats


def ingest_stream(source, graph: ProvGraph) -> IngestStats:
    """Ingest a whole stream: a file path, '-'/None for stdin, or any
    open text file object / iterable of lines."""
    if source in (None, "-"):
        stats = ingest_lines(sys.stdin, graph)
    elif isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            stats = ingest_lines(fh, graph)
    else:
        stats = ingest_lines(source, graph)
    graph.flush()
    return stats


class _LineHandler(socketserver.StreamRequestHandler):
    def handle(self):
        server: IngestServer = self.server  # type: ignore[assignment]
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace")
            with server.stats_lock:
                server.stats.merge(ingest_lines([line], server.graph))
        server.graph.flush()


class IngestServer(socketserver.ThreadingTCPServer):
    """TCP listener: newline-delimited envelopes, one per line, any
    number of concurrent connections feeding one store."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, host: str, port: int, graph: ProvGraph):
        super().__init__((host, port), _LineHandler)
        self.graph = graph
        self.stats = IngestStats()
        self.stats_lock = threading.Lock()

    @property
    def bound_port(self) -> int:
        return self.server_address[1]

    def serve_in_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread


def ingest_listen(
    host: str,
    port: int,
    graph: ProvGraph,
    ready: Optional[threading.Event] = None,
    stop: Optional[threading.Event] = None,
) -> IngestStats:
    """Run a listener until interrupted (or ``stop`` is set)."""
    with IngestServer(host, port, graph) as server:
        if ready is not None:
            ready.set()
        if stop is None:
            try:
                server.serve_forever()
            except KeyboardInterrupt:
                pass
        else:
            thread = server.serve_in_background()
            stop.wait()
            server.shutdown()
            thread.join()
        return server.stats


def send_lines(host: str, port: int, lines: Iterable[str]) -> int:
    """Write lines to a live listener; returns the number sent."""
    count = 0
    with socket.create_connection((host, port)) as sock:
        fh = sock.makefile("w", encoding="utf-8", newline="\n")
        for line in lines:
            fh.write(line.rstrip("\n") + "\n")
            count += 1
        fh.flush()
    return count
