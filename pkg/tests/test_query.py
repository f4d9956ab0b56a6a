import pytest

from agentprov.model import EdgeKind, NodeKind, ProvEdge, ProvNode
from agentprov.query import (
    NotAgentDecisionError,
    backward_lineage,
    decision_context,
    forward_impact,
    paths,
    root_cause,
)
from agentprov.store import ProvGraph, UnknownNodeError
from conftest import build_graph, event_dicts, sim_events
from oracles import backward_set, forward_set


def decisions_in(subgraph):
    return {n for n in subgraph.nodes if n.startswith("Agent_Decision_")}


def test_q1_full_lineage_single_layer():
    g = build_graph(sim_events(1, seed=7))
    lineage = backward_lineage(g, "Agent_Decision_1")
    for expected in (
        "Agent_Tool_1",
        "Scores_1",
        "Control_Result_1",
        "LLM_Invocation_1",
        "Prompt_1",
        "Model_Evaluation_1",
        "Physics_Model_1",
        "Sensor_Data_1",
        "Sensor_Driver_1",
        "Experiment_Setup",
    ):
        assert expected in lineage.nodes
    model_nodes = [n for n in lineage.nodes if g.node(n).kind is NodeKind.AI_MODEL]
    assert len(model_nodes) == 1


def test_lineage_of_source_node_is_itself_plus_attribution():
    g = build_graph(sim_events(1, seed=7))
    lineage = backward_lineage(g, "Experiment_Setup")
    assert lineage.nodes == {"Experiment_Setup", "Operator"}
    assert lineage.edges == {
        ("Experiment_Setup", EdgeKind.WAS_ATTRIBUTED_TO, "Operator")
    }


def test_lineage_matches_closure_oracle(sim_graph_n3):
    events = sim_events(3, seed=7)
    want = backward_set(event_dicts(events), "Agent_Decision_3")
    got = backward_lineage(sim_graph_n3, "Agent_Decision_3").nodes
    assert got == want
    assert {"Sensor_Data_1", "Sensor_Data_2", "Sensor_Data_3"} <= got


def test_q4_forward_impact_reaches_all_later_decisions():
    g = build_graph(sim_events(4, seed=7))
    impact = forward_impact(g, "Agent_Decision_1")
    assert decisions_in(impact) - {"Agent_Decision_1"} == {
        "Agent_Decision_2",
        "Agent_Decision_3",
        "Agent_Decision_4",
    }


def test_forward_impact_of_last_decision_is_its_context(sim_graph_n3):
    impact = forward_impact(sim_graph_n3, "Agent_Decision_3")
    assert impact.nodes == {"Agent_Decision_3", "Analysis_Agent"}
    assert impact.edges == {
        ("Agent_Decision_3", EdgeKind.WAS_ATTRIBUTED_TO, "Analysis_Agent")
    }


def test_forward_matches_closure_oracle(sim_graph_n3):
    events = sim_events(3, seed=7)
    want = forward_set(event_dicts(events), "Sensor_Data_2")
    got = forward_impact(sim_graph_n3, "Sensor_Data_2").nodes
    assert got == want
    assert {"Agent_Decision_2", "Agent_Decision_3"} <= got


def test_duality_exhaustive(sim_graph_n3):
    g = sim_graph_n3
    ids = sorted(g.nodes)
    fwd = {x: forward_impact(g, x).nodes for x in ids}
    bwd = {y: backward_lineage(g, y).nodes for y in ids}
    for x in ids:
        for y in ids:
            assert (y in fwd[x]) == (x in bwd[y]), (x, y)


def test_max_depth_monotone(sim_graph_n3):
    g = sim_graph_n3
    previous = set()
    for depth in range(0, 25):
        nodes = backward_lineage(g, "Agent_Decision_3", max_depth=depth).nodes
        assert previous <= nodes
        previous = nodes
    unbounded = backward_lineage(g, "Agent_Decision_3")
    assert previous == unbounded.nodes
    assert not unbounded.frontier_reached
    assert backward_lineage(g, "Agent_Decision_3", max_depth=1).frontier_reached


def test_traversal_terminates_on_cycle():
    g = ProvGraph()
    for name in ("a", "b", "c"):
        g.upsert_node(ProvNode(name, NodeKind.TASK))
    g.insert_edge(ProvEdge("a", EdgeKind.WAS_INFORMED_BY, "b"))
    g.insert_edge(ProvEdge("b", EdgeKind.WAS_INFORMED_BY, "c"))
    g.insert_edge(ProvEdge("c", EdgeKind.WAS_INFORMED_BY, "a"))
    assert backward_lineage(g, "a").nodes == {"a", "b", "c"}
    assert forward_impact(g, "a").nodes == {"a", "b", "c"}


def test_subgraph_edges_connect_member_nodes(sim_graph_n3):
    sub = backward_lineage(sim_graph_n3, "Agent_Decision_2")
    for src, _, dst in sub.edges:
        assert src in sub.nodes and dst in sub.nodes


def test_unknown_start_raises(sim_graph_n3):
    with pytest.raises(UnknownNodeError):
        backward_lineage(sim_graph_n3, "NoSuchId")
    with pytest.raises(UnknownNodeError):
        forward_impact(sim_graph_n3, "NoSuchId")


def test_decision_context_layer2(sim_graph_n2):
    ctx = decision_context(sim_graph_n2, "Agent_Decision_2")
    assert ctx.tool_id == "Agent_Tool_2"
    assert {"Scores_2", "Control_Result_2", "Agent_Decision_1"} <= set(ctx.inputs)
    assert ctx.prompt_id == "Prompt_2"
    assert ctx.response_id == "Response_2"
    assert ctx.model["name"] == "gpt-4o"
    assert ctx.agent_id == "Analysis_Agent"
    assert not ctx.missing_invocation


def test_decision_context_first_layer_has_no_prior_decision(sim_graph_n2):
    ctx = decision_context(sim_graph_n2, "Agent_Decision_1")
    assert set(ctx.inputs) == {"Scores_1", "Control_Result_1"}


def test_decision_context_fields_match_event_stream(sim_graph_n2):
    events = event_dicts(sim_events(2, seed=7))
    tool_events = [
        e["payload"]
        for e in events
        if e["payload"]["type"] == "ActivityExecuted"
        and e["payload"]["activity_id"] == "Agent_Tool_2"
    ]
    prompt_text = next(
        r["attributes"]["text"]
        for r in tool_events[0]["generated"]
        if r["data_kind"] == "Prompt"
    )
    ctx = decision_context(sim_graph_n2, "Agent_Decision_2")
    assert ctx.prompt_text == prompt_text


def test_decision_context_rejects_plain_task_output(sim_graph_n2):
    with pytest.raises(NotAgentDecisionError):
        decision_context(sim_graph_n2, "Sensor_Data_1")


def test_root_cause_directions(sim_graph_n3):
    rc = root_cause(sim_graph_n3, "Agent_Decision_2")
    assert "Prompt_2" in rc.upstream.nodes
    assert "Agent_Decision_3" in rc.downstream.nodes
    assert "Sensor_Data_1" not in rc.downstream.nodes


def test_root_cause_of_global_source(sim_graph_n3):
    rc = root_cause(sim_graph_n3, "Experiment_Setup")
    assert rc.upstream.nodes == {"Experiment_Setup", "Operator"}
    assert {"Agent_Decision_1", "Agent_Decision_2", "Agent_Decision_3"} <= rc.downstream.nodes


def test_root_cause_stays_inside_its_workflow(tmp_path):
    events = sim_events(2, seed=7) + sim_events(2, seed=8, id_prefix="other.")
    g = build_graph(events)
    rc = root_cause(g, "Agent_Decision_1")
    assert not any(n.startswith("other.") for n in rc.downstream.nodes)
    assert not any(n.startswith("other.") for n in rc.upstream.nodes)


def test_paths_between_consecutive_decisions(sim_graph_n2):
    result = paths(sim_graph_n2, "Agent_Decision_1", "Agent_Decision_2", 10)
    assert len(result.paths) == 1
    assert result.paths[0].nodes == [
        "Agent_Decision_1",
        "Agent_Tool_2",
        "Agent_Decision_2",
    ]
    assert result.paths[0].kinds == [EdgeKind.USED, EdgeKind.WAS_GENERATED_BY]
    assert not result.truncated


def test_zero_length_path(sim_graph_n2):
    result = paths(sim_graph_n2, "Scores_1", "Scores_1", 10)
    assert len(result.paths) == 1
    assert result.paths[0].nodes == ["Scores_1"]
    assert result.paths[0].kinds == []
    assert not result.truncated


def test_path_count_matches_exhaustive_enumeration(sim_graph_n2):
    g = sim_graph_n2

    def brute(node, target, trail):
        if node == target:
            return 1
        total = 0
        for _, other in g.neighbors(node, "in", [
            EdgeKind.USED, EdgeKind.WAS_GENERATED_BY,
            EdgeKind.WAS_INFORMED_BY, EdgeKind.WAS_DERIVED_FROM,
        ]):
            if other not in trail:
                total += brute(other, target, trail | {other})
        return total

    want = brute("Sensor_Data_1", "Agent_Decision_2", {"Sensor_Data_1"})
    result = paths(g, "Sensor_Data_1", "Agent_Decision_2", 1000)
    assert len(result.paths) == want
    assert want >= 1


def test_paths_truncation_flag(sim_graph_n2):
    full = paths(sim_graph_n2, "Sensor_Data_1", "Agent_Decision_2", 1000)
    assert not full.truncated
    if len(full.paths) > 1:
        limited = paths(sim_graph_n2, "Sensor_Data_1", "Agent_Decision_2", 1)
        assert limited.truncated
        assert len(limited.paths) == 1
