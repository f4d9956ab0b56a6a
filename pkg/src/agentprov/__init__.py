"""Unified provenance for agentic workflows: capture, consolidation,
lineage queries, and interoperable export."""

from .events import (
    ActivityExecuted,
    AgentRegistered,
    CampaignDeclared,
    DataDeclared,
    DataRef,
    EventEnvelope,
    EventError,
    GraphDelta,
    translate,
)
from .ingest import IngestStats, ingest_event, ingest_lines, ingest_stream
from .model import (
    EdgeKind,
    NodeKind,
    ProvCategory,
    ProvEdge,
    ProvNode,
    Violation,
    category_of,
    check_edge,
    validate_graph,
)
from .query import (
    DecisionContext,
    Subgraph,
    backward_lineage,
    decision_context,
    forward_impact,
    paths,
    root_cause,
)
from .simulator import SimConfig, generate, generate_lines
from .store import ProvGraph

__version__ = "0.1.0"

__all__ = [
    "ActivityExecuted",
    "AgentRegistered",
    "CampaignDeclared",
    "DataDeclared",
    "DataRef",
    "DecisionContext",
    "EdgeKind",
    "EventEnvelope",
    "EventError",
    "GraphDelta",
    "IngestStats",
    "NodeKind",
    "ProvCategory",
    "ProvEdge",
    "ProvGraph",
    "ProvNode",
    "SimConfig",
    "Subgraph",
    "Violation",
    "backward_lineage",
    "category_of",
    "check_edge",
    "decision_context",
    "forward_impact",
    "generate",
    "generate_lines",
    "ingest_event",
    "ingest_lines",
    "ingest_stream",
    "paths",
    "root_cause",
    "translate",
    "validate_graph",
]
