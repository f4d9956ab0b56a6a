"""Wire events and their translation into graph deltas.

One envelope per line on the wire (UTF-8 JSON). ``translate`` maps a
well-formed envelope to a deterministic set of node upserts and edge
inserts; it never produces a partial delta.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional, Union

from .model import (
    ENTITY_KINDS,
    EdgeKind,
    NodeKind,
    ProvEdge,
    ProvNode,
)

SCHEMA_VERSION = "1"

_ACTIVITY_EVENT_KINDS = (
    NodeKind.TASK,
    NodeKind.AGENT_TOOL,
    NodeKind.AI_MODEL_INVOCATION,
)


class EventError(ValueError):
    """Malformed envelope or payload; the event must be rejected whole."""


@dataclass
class DataRef:
    data_id: str
    data_kind: NodeKind
    attributes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"data_id": self.data_id, "data_kind": self.data_kind.value}
        if self.attributes:
            d["attributes"] = self.attributes
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DataRef":
        try:
            kind = NodeKind(d["data_kind"])
        except (KeyError, ValueError) as exc:
            raise EventError(f"bad data ref: {exc}") from exc
        return cls(str(d.get("data_id", "")), kind, dict(d.get("attributes") or {}))


@dataclass
class AgentRegistered:
    agent_id: str
    name: str
    attributes: dict = field(default_factory=dict)

    type = "AgentRegistered"


@dataclass
class ActivityExecuted:
    activity_id: str
    activity_kind: NodeKind
    parent_id: Optional[str] = None
    agent_id: Optional[str] = None
    informed_by: list[str] = field(default_factory=list)
    used: list[DataRef] = field(default_factory=list)
    generated: list[DataRef] = field(default_factory=list)
    started_at: Optional[str] = None
    ended_at: Optional[str] = None
    location: Optional[str] = None
    telemetry: Optional[dict] = None
    scheduling: Optional[dict] = None
    status: Optional[str] = None

    type = "ActivityExecuted"


@dataclass
class DataDeclared:
    data: DataRef
    attributed_to: Optional[str] = None

    type = "DataDeclared"


@dataclass
class WorkflowDeclared:
    workflow_id: str
    name: str
    campaign_id: str

    type = "WorkflowDeclared"


@dataclass
class CampaignDeclared:
    campaign_id: str
    name: str
    owner_agent: Optional[dict] = None  # {agent_id, kind: Person|Organization, name}

    type = "CampaignDeclared"


EventPayload = Union[
    AgentRegistered, ActivityExecuted, DataDeclared, WorkflowDeclared, CampaignDeclared
]


@dataclass
class EventEnvelope:
    event_id: str
    emitted_at: str
    site: str
    campaign_id: str
    workflow_id: str
    payload: EventPayload
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "emitted_at": self.emitted_at,
            "site": self.site,
            "campaign_id": self.campaign_id,
            "workflow_id": self.workflow_id,
            "schema_version": self.schema_version,
            "payload": _payload_to_dict(self.payload),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "EventEnvelope":
        if not isinstance(d, dict):
            raise EventError("envelope must be an object")
        event_id = str(d.get("event_id", ""))
        if not event_id:
            raise EventError("missing event_id")
        version = str(d.get("schema_version", ""))
        if version != SCHEMA_VERSION:
            raise EventError(f"unrecognized schema_version {version!r}")
        payload = _payload_from_dict(d.get("payload"))
        return cls(
            event_id=event_id,
            emitted_at=str(d.get("emitted_at", "")),
            site=str(d.get("site", "")),
            campaign_id=str(d.get("campaign_id", "")),
            workflow_id=str(d.get("workflow_id", "")),
            payload=payload,
            schema_version=version,
        )

    @classmethod
    def from_json(cls, line: str) -> "EventEnvelope":
        try:
            d = json.loads(line)
        except json.JSONDecodeError as exc:
            raise EventError(f"not valid JSON: {exc}") from exc
        return cls.from_dict(d)


def _payload_to_dict(p: EventPayload) -> dict:
    d: dict = {"type": p.type}
    if isinstance(p, AgentRegistered):
        d["agent_id"] = p.agent_id
        d["name"] = p.name
        if p.attributes:
            d["attributes"] = p.attributes
    elif isinstance(p, ActivityExecuted):
        d["activity_id"] = p.activity_id
        d["activity_kind"] = p.activity_kind.value
        for key in ("parent_id", "agent_id", "started_at", "ended_at", "location", "status"):
            value = getattr(p, key)
            if value is not None:
                d[key] = value
        if p.informed_by:
            d["informed_by"] = list(p.informed_by)
        if p.used:
            d["used"] = [r.to_dict() for r in p.used]
        if p.generated:
            d["generated"] = [r.to_dict() for r in p.generated]
        if p.telemetry:
            d["telemetry"] = p.telemetry
        if p.scheduling:
            d["scheduling"] = p.scheduling
    elif isinstance(p, DataDeclared):
        d["data"] = p.data.to_dict()
        if p.attributed_to:
            d["attributed_to"] = p.attributed_to
    elif isinstance(p, WorkflowDeclared):
        d["workflow_id"] = p.workflow_id
        d["name"] = p.name
        d["campaign_id"] = p.campaign_id
    elif isinstance(p, CampaignDeclared):
        d["campaign_id"] = p.campaign_id
        d["name"] = p.name
        if p.owner_agent:
            d["owner_agent"] = p.owner_agent
    else:  # pragma: no cover - exhaustive by construction
        raise EventError(f"unknown payload {p!r}")
    return d


def _payload_from_dict(d) -> EventPayload:
    if not isinstance(d, dict):
        raise EventError("payload must be an object")
    ptype = d.get("type")
    if ptype == "AgentRegistered":
        agent_id = str(d.get("agent_id", ""))
        if not agent_id:
            raise EventError("AgentRegistered missing agent_id")
        return AgentRegistered(agent_id, str(d.get("name", "")), dict(d.get("attributes") or {}))
    if ptype == "ActivityExecuted":
        try:
            kind = NodeKind(d.get("activity_kind"))
        except ValueError as exc:
            raise EventError(f"bad activity_kind: {exc}") from exc
        if kind not in _ACTIVITY_EVENT_KINDS:
            raise EventError(f"activity_kind {kind.value} not allowed in events")
        activity_id = str(d.get("activity_id", ""))
        if not activity_id:
            raise EventError("ActivityExecuted missing activity_id")
        return ActivityExecuted(
            activity_id=activity_id,
            activity_kind=kind,
            parent_id=d.get("parent_id"),
            agent_id=d.get("agent_id"),
            informed_by=[str(x) for x in d.get("informed_by") or []],
            used=[DataRef.from_dict(r) for r in d.get("used") or []],
            generated=[DataRef.from_dict(r) for r in d.get("generated") or []],
            started_at=d.get("started_at"),
            ended_at=d.get("ended_at"),
            location=d.get("location"),
            telemetry=d.get("telemetry"),
            scheduling=d.get("scheduling"),
            status=d.get("status"),
        )
    if ptype == "DataDeclared":
        data = d.get("data")
        if not isinstance(data, dict):
            raise EventError("DataDeclared missing data ref")
        return DataDeclared(DataRef.from_dict(data), d.get("attributed_to"))
    if ptype == "WorkflowDeclared":
        workflow_id = str(d.get("workflow_id", ""))
        if not workflow_id:
            raise EventError("WorkflowDeclared missing workflow_id")
        return WorkflowDeclared(workflow_id, str(d.get("name", "")), str(d.get("campaign_id", "")))
    if ptype == "CampaignDeclared":
        campaign_id = str(d.get("campaign_id", ""))
        if not campaign_id:
            raise EventError("CampaignDeclared missing campaign_id")
        return CampaignDeclared(campaign_id, str(d.get("name", "")), d.get("owner_agent"))
    raise EventError(f"unknown payload type {ptype!r}")


def stable_model_id(attributes: dict) -> str:
    """Stable id for an AIModel from its metadata, so repeated
    invocations of the same model share one node."""
    digest = hashlib.sha256(
        json.dumps(attributes, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    return f"aimodel-{digest[:12]}"


@dataclass
class GraphDelta:
    """Ordered node upserts plus edge inserts produced from one event."""

    nodes: list[ProvNode] = field(default_factory=list)
    edges: list[ProvEdge] = field(default_factory=list)


class _DeltaBuilder:
    def __init__(self, emitted_at: str):
        self.emitted_at = emitted_at
        self._nodes: dict[str, ProvNode] = {}
        self._edges: dict[tuple, ProvEdge] = {}

    def node(self, node_id, kind, label=None, attributes=None):
        node = ProvNode(
            id=node_id,
            kind=kind,
            label=label,
            attributes=dict(attributes or {}),
            first_seen_at=self.emitted_at,
        )
        existing = self._nodes.get(node_id)
        if existing is not None and existing.kind is not NodeKind.UNKNOWN:
            if kind not in (NodeKind.UNKNOWN, existing.kind):
                raise EventError(
                    f"conflicting kinds for {node_id!r}: "
                    f"{existing.kind.value} vs {kind.value}"
                )
            if kind is NodeKind.UNKNOWN:
                return
        self._nodes[node_id] = node

    def ref(self, node_id):
        """Declare a forward reference; becomes a placeholder upsert
        unless a concrete upsert for the same id is in this delta."""
        if node_id not in self._nodes:
            self._nodes[node_id] = ProvNode(
                id=node_id, kind=NodeKind.UNKNOWN, first_seen_at=self.emitted_at
            )

    def edge(self, src, kind, dst):
        self._edges[(src, kind, dst)] = ProvEdge(src, kind, dst)
        self.ref(src)
        self.ref(dst)

    def build(self) -> GraphDelta:
        nodes = sorted(self._nodes.values(), key=lambda n: n.id)
        edges = [
            self._edges[t]
            for t in sorted(self._edges, key=lambda t: (t[0], t[1].value, t[2]))
        ]
        return GraphDelta(nodes=nodes, edges=edges)


def _check_invocation_refs(payload: ActivityExecuted) -> None:
    prompts = [r for r in payload.used if r.data_kind is NodeKind.PROMPT]
    models = [r for r in payload.used if r.data_kind is NodeKind.AI_MODEL]
    if len(prompts) != 1:
        raise EventError(
            f"AIModelInvocation must use exactly one Prompt, got {len(prompts)}"
        )
    if len(models) > 1:
        raise EventError(
            f"AIModelInvocation may use at most one AIModel, got {len(models)}"
        )


def translate(envelope: EventEnvelope) -> GraphDelta:
    """Map one envelope to its graph delta (pure, deterministic).

    Raises EventError for malformed payloads; no partial delta is ever
    returned.
    """
    if envelope.schema_version != SCHEMA_VERSION:
        raise EventError(f"unrecognized schema_version {envelope.schema_version!r}")
    b = _DeltaBuilder(envelope.emitted_at)
    p = envelope.payload

    if isinstance(p, AgentRegistered):
        b.node(p.agent_id, NodeKind.AI_AGENT, label=p.name, attributes=p.attributes)
    elif isinstance(p, CampaignDeclared):
        b.node(p.campaign_id, NodeKind.CAMPAIGN, label=p.name)
        if p.owner_agent:
            owner = p.owner_agent
            owner_id = str(owner.get("agent_id", ""))
            if not owner_id:
                raise EventError("owner_agent missing agent_id")
            try:
                owner_kind = NodeKind(owner.get("kind", "Person"))
            except ValueError as exc:
                raise EventError(f"bad owner kind: {exc}") from exc
            if owner_kind not in (NodeKind.PERSON, NodeKind.ORGANIZATION):
                raise EventError(f"owner kind must be Person|Organization")
            b.node(owner_id, owner_kind, label=owner.get("name"))
            b.edge(p.campaign_id, EdgeKind.WAS_ASSOCIATED_WITH, owner_id)
    elif isinstance(p, WorkflowDeclared):
        b.node(p.workflow_id, NodeKind.WORKFLOW, label=p.name)
        if p.campaign_id:
            b.edge(p.workflow_id, EdgeKind.PART_OF, p.campaign_id)
    elif isinstance(p, DataDeclared):
        _add_data_ref(b, p.data)
        if p.attributed_to:
            b.edge(p.data.data_id, EdgeKind.WAS_ATTRIBUTED_TO, p.attributed_to)
    elif isinstance(p, ActivityExecuted):
        _translate_activity(b, envelope, p)
    else:  # pragma: no cover
        raise EventError(f"unknown payload {p!r}")
    return b.build()


def _add_data_ref(b: _DeltaBuilder, ref: DataRef) -> str:
    if ref.data_kind not in ENTITY_KINDS:
        raise EventError(f"data_kind {ref.data_kind.value} is not an entity kind")
    data_id = ref.data_id
    if ref.data_kind is NodeKind.AI_MODEL and ref.attributes:
        data_id = stable_model_id(ref.attributes)
    if not data_id:
        raise EventError("data ref with empty data_id")
    b.node(data_id, ref.data_kind, label=data_id, attributes=ref.attributes)
    return data_id


def _translate_activity(b, envelope: EventEnvelope, p: ActivityExecuted) -> None:
    if p.activity_kind is NodeKind.AI_MODEL_INVOCATION:
        _check_invocation_refs(p)
    attrs: dict = {}
    if p.started_at:
        attrs["started_at"] = p.started_at
    if p.ended_at:
        attrs["ended_at"] = p.ended_at
    if p.status:
        attrs["status"] = p.status
    b.node(p.activity_id, p.activity_kind, label=p.activity_id, attributes=attrs)

    for ref in p.used:
        data_id = _add_data_ref(b, ref)
        b.edge(p.activity_id, EdgeKind.USED, data_id)
    for ref in p.generated:
        data_id = _add_data_ref(b, ref)
        b.edge(data_id, EdgeKind.WAS_GENERATED_BY, p.activity_id)
        if p.agent_id:
            b.edge(data_id, EdgeKind.WAS_ATTRIBUTED_TO, p.agent_id)
    if p.agent_id:
        b.edge(p.activity_id, EdgeKind.WAS_ASSOCIATED_WITH, p.agent_id)
    for informant in p.informed_by:
        b.edge(p.activity_id, EdgeKind.WAS_INFORMED_BY, informant)

    parent = p.parent_id or envelope.workflow_id or None
    if parent:
        b.edge(p.activity_id, EdgeKind.PART_OF, parent)
    if p.location:
        loc_id = f"location:{p.location}"
        b.node(loc_id, NodeKind.LOCATION, label=p.location)
        b.edge(p.activity_id, EdgeKind.AT_LOCATION, loc_id)
    if p.telemetry:
        tel_id = f"{p.activity_id}:telemetry"
        b.node(tel_id, NodeKind.TELEMETRY_DATA, label=tel_id, attributes=p.telemetry)
        b.edge(tel_id, EdgeKind.WAS_GENERATED_BY, p.activity_id)
    if p.scheduling:
        sched_id = f"{p.activity_id}:scheduling"
        b.node(sched_id, NodeKind.SCHEDULING_DATA, label=sched_id, attributes=p.scheduling)
        b.edge(sched_id, EdgeKind.WAS_GENERATED_BY, p.activity_id)
