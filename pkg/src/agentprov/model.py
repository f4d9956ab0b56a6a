"""Core provenance type system: node kinds, edge kinds, and the
domain/range constraint table every edge must satisfy.

Everything here is pure and immutable; the store and query layers build
on these definitions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional


class ProvCategory(str, Enum):
    ACTIVITY = "activity"
    ENTITY = "entity"
    AGENT = "agent"
    LOCATION = "location"
    PLACEHOLDER = "placeholder"


class NodeKind(str, Enum):
    # activities
    CAMPAIGN = "Campaign"
    WORKFLOW = "Workflow"
    TASK = "Task"
    AGENT_TOOL = "AgentTool"
    AI_MODEL_INVOCATION = "AIModelInvocation"
    # entities (data objects)
    DOMAIN_DATA = "DomainData"
    SCHEDULING_DATA = "SchedulingData"
    TELEMETRY_DATA = "TelemetryData"
    PROMPT = "Prompt"
    RESPONSE_DATA = "ResponseData"
    AI_MODEL = "AIModel"
    # agents
    AI_AGENT = "AIAgent"
    PERSON = "Person"
    ORGANIZATION = "Organization"
    # other
    LOCATION = "Location"
    UNKNOWN = "Unknown"  # placeholder for forward references


_CATEGORY_OF: dict[NodeKind, ProvCategory] = {
    NodeKind.CAMPAIGN: ProvCategory.ACTIVITY,
    NodeKind.WORKFLOW: ProvCategory.ACTIVITY,
    NodeKind.TASK: ProvCategory.ACTIVITY,
    NodeKind.AGENT_TOOL: ProvCategory.ACTIVITY,
    NodeKind.AI_MODEL_INVOCATION: ProvCategory.ACTIVITY,
    NodeKind.DOMAIN_DATA: ProvCategory.ENTITY,
    NodeKind.SCHEDULING_DATA: ProvCategory.ENTITY,
    NodeKind.TELEMETRY_DATA: ProvCategory.ENTITY,
    NodeKind.PROMPT: ProvCategory.ENTITY,
    NodeKind.RESPONSE_DATA: ProvCategory.ENTITY,
    NodeKind.AI_MODEL: ProvCategory.ENTITY,
    NodeKind.AI_AGENT: ProvCategory.AGENT,
    NodeKind.PERSON: ProvCategory.AGENT,
    NodeKind.ORGANIZATION: ProvCategory.AGENT,
    NodeKind.LOCATION: ProvCategory.LOCATION,
    NodeKind.UNKNOWN: ProvCategory.PLACEHOLDER,
}

ENTITY_KINDS = frozenset(
    k for k, c in _CATEGORY_OF.items() if c is ProvCategory.ENTITY
)
ACTIVITY_KINDS = frozenset(
    k for k, c in _CATEGORY_OF.items() if c is ProvCategory.ACTIVITY
)
AGENT_KINDS = frozenset(
    k for k, c in _CATEGORY_OF.items() if c is ProvCategory.AGENT
)


def category_of(kind: NodeKind) -> ProvCategory:
    """Return the fixed category of a node kind (total function)."""
    return _CATEGORY_OF[kind]


class EdgeKind(str, Enum):
    USED = "used"
    WAS_GENERATED_BY = "wasGeneratedBy"
    WAS_ATTRIBUTED_TO = "wasAttributedTo"
    WAS_ASSOCIATED_WITH = "wasAssociatedWith"
    WAS_INFORMED_BY = "wasInformedBy"
    WAS_DERIVED_FROM = "wasDerivedFrom"
    ACTED_ON_BEHALF_OF = "actedOnBehalfOf"
    AT_LOCATION = "atLocation"
    PART_OF = "partOf"


_A = frozenset({ProvCategory.ACTIVITY})
_E = frozenset({ProvCategory.ENTITY})
_G = frozenset({ProvCategory.AGENT})
_L = frozenset({ProvCategory.LOCATION})

# (allowed source categories, allowed destination categories) per edge kind.
EDGE_CONSTRAINTS: dict[EdgeKind, tuple[frozenset, frozenset]] = {
    EdgeKind.USED: (_A, _E),
    EdgeKind.WAS_GENERATED_BY: (_E, _A),
    EdgeKind.WAS_ATTRIBUTED_TO: (_E, _G),
    EdgeKind.WAS_ASSOCIATED_WITH: (_A, _G),
    EdgeKind.WAS_INFORMED_BY: (_A, _A),
    EdgeKind.WAS_DERIVED_FROM: (_E, _E),
    EdgeKind.ACTED_ON_BEHALF_OF: (_G, _G),
    EdgeKind.AT_LOCATION: (_A | _E | _G, _L),
    EdgeKind.PART_OF: (_A, _A),
}

Scalar = object  # str | int | float | bool; timestamps as ISO-8601 strings


@dataclass
class ProvNode:
    """One typed vertex of the provenance graph."""

    id: str
    kind: NodeKind
    label: Optional[str] = None
    attributes: dict = field(default_factory=dict)
    first_seen_at: str = ""

    @property
    def category(self) -> ProvCategory:
        return category_of(self.kind)

    def display_label(self) -> str:
        return self.label if self.label else self.id


@dataclass
class ProvEdge:
    """One typed relation between two node ids.

    Identity is the (src, kind, dst) triple; attributes are annotations
    and take no part in equality or canonical form.
    """

    src: str
    kind: EdgeKind
    dst: str
    attributes: Optional[dict] = None

    def triple(self) -> tuple[str, EdgeKind, str]:
        return (self.src, self.kind, self.dst)


@dataclass
class Violation:
    code: str  # "edge-constraint" | "placeholder" | "duplicate-generation"
    message: str
    edge: Optional[tuple] = None
    node_id: Optional[str] = None

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


def check_edge(
    kind: EdgeKind, src_category: ProvCategory, dst_category: ProvCategory
) -> Optional[str]:
    """Check an edge kind against the domain/range table.

    Returns None when the edge is allowed, else a description of the
    violation. Placeholder endpoints match anything (validation is
    deferred until the forward reference resolves).
    """
    src_ok, dst_ok = EDGE_CONSTRAINTS[kind]
    if src_category is not ProvCategory.PLACEHOLDER and src_category not in src_ok:
        expected = "|".join(sorted(c.value for c in src_ok))
        return (
            f"{kind.value} expects source category {expected}, "
            f"got {src_category.value}"
        )
    if dst_category is not ProvCategory.PLACEHOLDER and dst_category not in dst_ok:
        expected = "|".join(sorted(c.value for c in dst_ok))
        return (
            f"{kind.value} expects destination category {expected}, "
            f"got {dst_category.value}"
        )
    return None


def validate_graph(graph) -> list[Violation]:
    """Whole-graph conformance pass.

    Empty result iff every edge satisfies the constraint table with
    resolved endpoint categories, no placeholder nodes remain, and no
    entity has more than one generating activity. Violations are return
    values, never exceptions.
    """
    violations: list[Violation] = []
    for node in graph.nodes.values():
        if node.kind is NodeKind.UNKNOWN:
            violations.append(
                Violation(
                    "placeholder",
                    f"unresolved placeholder node {node.id!r}",
                    node_id=node.id,
                )
            )
    generators: dict[str, set[str]] = {}
    for edge in graph.edges():
        src = graph.nodes.get(edge.src)
        dst = graph.nodes.get(edge.dst)
        if src is None or dst is None:
            missing = edge.src if src is None else edge.dst
            violations.append(
                Violation(
                    "edge-constraint",
                    f"edge {edge.triple()} references missing node {missing!r}",
                    edge=edge.triple(),
                )
            )
            continue
        problem = check_edge(edge.kind, src.category, dst.category)
        if problem is not None:
            violations.append(
                Violation("edge-constraint", problem, edge=edge.triple())
            )
        if edge.kind is EdgeKind.WAS_GENERATED_BY:
            generators.setdefault(edge.src, set()).add(edge.dst)
    for entity_id, activities in sorted(generators.items()):
        if len(activities) > 1:
            violations.append(
                Violation(
                    "duplicate-generation",
                    f"entity {entity_id!r} has {len(activities)} generating "
                    f"activities: {sorted(activities)}",
                    node_id=entity_id,
                )
            )
    return violations


def edges_of(triples: Iterable[tuple[str, EdgeKind, str]]) -> list[ProvEdge]:
    return [ProvEdge(s, k, d) for s, k, d in triples]
