import pytest

from agentprov.events import (
    ActivityExecuted,
    AgentRegistered,
    DataRef,
    EventEnvelope,
    EventError,
    stable_model_id,
    translate,
)
from agentprov.model import EdgeKind, NodeKind


def envelope(payload, workflow_id=""):
    return EventEnvelope(
        event_id="ev-1",
        emitted_at="2026-01-01T00:00:00Z",
        site="hpc",
        campaign_id="c1",
        workflow_id=workflow_id,
        payload=payload,
    )


def edge_kinds(delta):
    kinds = {}
    for e in delta.edges:
        kinds[e.kind] = kinds.get(e.kind, 0) + 1
    return kinds


def test_agent_registered_is_one_node_no_edges():
    delta = translate(envelope(AgentRegistered("ag1", "Analysis_Agent")))
    assert len(delta.nodes) == 1
    assert delta.nodes[0].kind is NodeKind.AI_AGENT
    assert delta.nodes[0].label == "Analysis_Agent"
    assert delta.edges == []


def test_agent_tool_event_structure():
    # layer-2 tool: three inputs, two outputs, one informing invocation
    payload = ActivityExecuted(
        activity_id="Agent_Tool_2",
        activity_kind=NodeKind.AGENT_TOOL,
        agent_id="ag1",
        informed_by=["LLM_Invocation_2"],
        used=[
            DataRef("Scores_2", NodeKind.DOMAIN_DATA),
            DataRef("Control_Result_2", NodeKind.DOMAIN_DATA),
            DataRef("Agent_Decision_1", NodeKind.DOMAIN_DATA),
        ],
        generated=[
            DataRef("Agent_Decision_2", NodeKind.DOMAIN_DATA),
            DataRef("Prompt_2", NodeKind.PROMPT),
        ],
    )
    delta = translate(envelope(payload))
    kinds = edge_kinds(delta)
    assert kinds == {
        EdgeKind.USED: 3,
        EdgeKind.WAS_GENERATED_BY: 2,
        EdgeKind.WAS_ASSOCIATED_WITH: 1,
        EdgeKind.WAS_INFORMED_BY: 1,
        EdgeKind.WAS_ATTRIBUTED_TO: 2,
    }
    by_id = {n.id: n for n in delta.nodes}
    assert by_id["Agent_Tool_2"].kind is NodeKind.AGENT_TOOL
    assert by_id["LLM_Invocation_2"].kind is NodeKind.UNKNOWN  # forward ref
    assert by_id["ag1"].kind is NodeKind.UNKNOWN


def test_model_invocation_event_structure():
    payload = ActivityExecuted(
        activity_id="LLM_Invocation_2",
        activity_kind=NodeKind.AI_MODEL_INVOCATION,
        agent_id="ag1",
        used=[
            DataRef("Prompt_2", NodeKind.PROMPT),
            DataRef("", NodeKind.AI_MODEL, {"name": "gpt-4o", "provider": "mock"}),
        ],
        generated=[DataRef("Response_2", NodeKind.RESPONSE_DATA)],
    )
    delta = translate(envelope(payload))
    assert edge_kinds(delta) == {
        EdgeKind.USED: 2,
        EdgeKind.WAS_GENERATED_BY: 1,
        EdgeKind.WAS_ATTRIBUTED_TO: 1,
        EdgeKind.WAS_ASSOCIATED_WITH: 1,
    }
    model_nodes = [n for n in delta.nodes if n.kind is NodeKind.AI_MODEL]
    assert len(model_nodes) == 1
    assert model_nodes[0].id == stable_model_id({"name": "gpt-4o", "provider": "mock"})


def test_model_id_is_shared_across_invocations():
    attrs = {"name": "gpt-4o", "provider": "mock", "temperature": 0.0}
    assert stable_model_id(attrs) == stable_model_id(dict(reversed(list(attrs.items()))))


def test_invocation_requires_exactly_one_prompt():
    payload = ActivityExecuted(
        activity_id="inv",
        activity_kind=NodeKind.AI_MODEL_INVOCATION,
        used=[],
        generated=[],
    )
    with pytest.raises(EventError, match="exactly one Prompt"):
        translate(envelope(payload))


def test_part_of_falls_back_to_workflow():
    payload = ActivityExecuted(activity_id="t1", activity_kind=NodeKind.TASK)
    delta = translate(envelope(payload, workflow_id="wf1"))
    assert [(e.src, e.kind, e.dst) for e in delta.edges] == [
        ("t1", EdgeKind.PART_OF, "wf1")
    ]
    delta2 = translate(envelope(payload, workflow_id=""))
    assert delta2.edges == []


def test_telemetry_and_location_become_nodes():
    payload = ActivityExecuted(
        activity_id="t1",
        activity_kind=NodeKind.TASK,
        location="edge",
        telemetry={"cpu_pct": 12.5},
        scheduling={"node": "n01"},
    )
    delta = translate(envelope(payload))
    by_id = {n.id: n for n in delta.nodes}
    assert by_id["t1:telemetry"].kind is NodeKind.TELEMETRY_DATA
    assert by_id["t1:scheduling"].kind is NodeKind.SCHEDULING_DATA
    assert by_id["location:edge"].kind is NodeKind.LOCATION
    assert edge_kinds(delta)[EdgeKind.AT_LOCATION] == 1
    assert edge_kinds(delta)[EdgeKind.WAS_GENERATED_BY] == 2


def test_translate_is_pure():
    payload = ActivityExecuted(
        activity_id="t1",
        activity_kind=NodeKind.TASK,
        used=[DataRef("d1", NodeKind.DOMAIN_DATA, {"x": 1})],
        generated=[DataRef("d2", NodeKind.DOMAIN_DATA)],
    )
    env = envelope(payload, workflow_id="wf1")
    a, b = translate(env), translate(env)
    assert [(n.id, n.kind, n.attributes) for n in a.nodes] == [
        (n.id, n.kind, n.attributes) for n in b.nodes
    ]
    assert [e.triple() for e in a.edges] == [e.triple() for e in b.edges]


def test_edges_reference_only_declared_ids():
    payload = ActivityExecuted(
        activity_id="t1",
        activity_kind=NodeKind.TASK,
        agent_id="ag9",
        informed_by=["other"],
        used=[DataRef("d1", NodeKind.DOMAIN_DATA)],
    )
    delta = translate(envelope(payload, workflow_id="wf1"))
    declared = {n.id for n in delta.nodes}
    for e in delta.edges:
        assert e.src in declared and e.dst in declared


def test_json_round_trip_and_unknown_version():
    payload = ActivityExecuted(
        activity_id="t1",
        activity_kind=NodeKind.TASK,
        used=[DataRef("d1", NodeKind.DOMAIN_DATA, {"k": "v"})],
    )
    env = envelope(payload, workflow_id="wf1")
    parsed = EventEnvelope.from_json(env.to_json())
    assert parsed.to_json() == env.to_json()
    bad = env.to_json().replace('"schema_version":"1"', '"schema_version":"99"')
    with pytest.raises(EventError, match="schema_version"):
        EventEnvelope.from_json(bad)


def test_garbage_rejected():
    with pytest.raises(EventError):
        EventEnvelope.from_json("not json at all")
    with pytest.raises(EventError):
        EventEnvelope.from_json('{"event_id": "e", "schema_version": "1", "payload": {"type": "Nope"}}')
