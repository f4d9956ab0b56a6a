"""Lineage engine: backward/forward dataflow traversal, decision
context reconstruction, root-cause drill-down, and path enumeration.

Traversal follows dataflow relations only (used, wasGeneratedBy,
wasInformedBy, wasDerivedFrom). Attribution, association, and location
edges are annotations: they are attached to the result for every
visited node but never expanded, so queries do not flood through a
shared agent node. A query that *starts* at an agent or location seeds
from the nodes attributed/associated to it, which keeps backward and
forward results exact duals of each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .model import EdgeKind, NodeKind, ProvCategory
from .store import ProvGraph

DATAFLOW_KINDS = (
    EdgeKind.USED,
    EdgeKind.WAS_GENERATED_BY,
    EdgeKind.WAS_INFORMED_BY,
    EdgeKind.WAS_DERIVED_FROM,
)
CONTEXT_KINDS = (
    EdgeKind.WAS_ATTRIBUTED_TO,
    EdgeKind.WAS_ASSOCIATED_WITH,
    EdgeKind.AT_LOCATION,
)


class QueryError(Exception):
    pass


class NotAgentDecisionError(QueryError):
    """decision_context called on something not generated by an AgentTool."""


@dataclass
class Subgraph:
    start: str
    nodes: set = field(default_factory=set)
    edges: set = field(default_factory=set)  # (src, EdgeKind, dst) triples
    frontier_reached: bool = False

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.nodes


@dataclass
class DecisionContext:
    decision_id: str
    tool_id: str
    inputs: list
    prompt_id: Optional[str] = None
    prompt_text: Optional[str] = None
    response_id: Optional[str] = None
    response_text: Optional[str] = None
    model: dict = field(default_factory=dict)
    agent_id: Optional[str] = None
    invocation_id: Optional[str] = None
    missing_invocation: bool = False

    def as_dict(self) -> dict:
        return {
            "decision_id": self.decision_id,
            "tool_id": self.tool_id,
            "inputs": list(self.inputs),
            "prompt_id": self.prompt_id,
            "prompt_text": self.prompt_text,
            "response_id": self.response_id,
            "response_text": self.response_text,
            "model": dict(self.model),
            "agent_id": self.agent_id,
            "invocation_id": self.invocation_id,
            "missing_invocation": self.missing_invocation,
        }


@dataclass
class RootCause:
    upstream: Subgraph
    downstream: Subgraph


def _traverse(
    graph: ProvGraph, start: str, direction: str, max_depth: Optional[int]
) -> Subgraph:
    start_node = graph.node(start)
    result = Subgraph(start=start, nodes={start})
    visited = {start}  # dataflow-visited; eligible for expansion

    frontier: list[str] = []
    if start_node.category in (ProvCategory.AGENT, ProvCategory.LOCATION):
        # Seed from the nodes this agent/location annotates.
        for kind, src in graph.neighbors(start, "in", CONTEXT_KINDS):
            result.edges.add((src, kind, start))
            result.nodes.add(src)
            if src not in visited:
                visited.add(src)
                frontier.append(src)
    else:
        frontier.append(start)

    depth = 0
    while frontier:
        if max_depth is not None and depth >= max_depth:
            result.frontier_reached = True
            break
        next_frontier: list[str] = []
        for node_id in frontier:
            # context annotations for this node
            for kind, agent in graph.neighbors(node_id, "out", CONTEXT_KINDS):
                result.edges.add((node_id, kind, agent))
                result.nodes.add(agent)
            # dataflow expansion
            for kind, other in graph.neighbors(node_id, direction, DATAFLOW_KINDS):
                if direction == "out":
                    result.edges.add((node_id, kind, other))
                else:
                    result.edges.add((other, kind, node_id))
                result.nodes.add(other)
                if other not in visited:
                    visited.add(other)
                    next_frontier.append(other)
        frontier = next_frontier
        depth += 1
    else:
        # drained without hitting the bound: annotate remaining frontier nodes
        pass
    # Nodes reached exactly at the depth bound still get their context edges.
    for node_id in frontier:
        for kind, agent in graph.neighbors(node_id, "out", CONTEXT_KINDS):
            result.edges.add((node_id, kind, agent))
            result.nodes.add(agent)
    return result


def backward_lineage(
    graph: ProvGraph, start: str, max_depth: Optional[int] = None
) -> Subgraph:
    """Everything upstream of ``start``: the complete lineage down to
    the first input data (fixpoint of the backward dataflow rule)."""
    return _traverse(graph, start, "out", max_depth)


def forward_impact(
    graph: ProvGraph, start: str, max_depth: Optional[int] = None
) -> Subgraph:
    """Everything downstream of ``start``: activities that consumed it,
    data they generated, and so on transitively."""
    return _traverse(graph, start, "in", max_depth)


def root_cause(graph: ProvGraph, suspect: str) -> RootCause:
    """Both directions from a suspect node, unbounded depth: where it
    came from and what it affected."""
    return RootCause(
        upstream=backward_lineage(graph, suspect),
        downstream=forward_impact(graph, suspect),
    )


def decision_context(graph: ProvGraph, decision_id: str) -> DecisionContext:
    """Reconstruct how an agent decision was made: the generating tool,
    its inputs, and the model invocation's prompt/response/model."""
    node = graph.node(decision_id)
    generators = graph.neighbors(decision_id, "out", [EdgeKind.WAS_GENERATED_BY])
    if len(generators) != 1:
        raise NotAgentDecisionError(
            f"{decision_id!r} has {len(generators)} generating activities"
        )
    tool_id = generators[0][1]
    tool = graph.node(tool_id)
    if tool.kind is not NodeKind.AGENT_TOOL:
        raise NotAgentDecisionError(
            f"{decision_id!r} was generated by {tool.kind.value} {tool_id!r}, "
            "not by an AgentTool"
        )
    inputs = [other for _, other in graph.neighbors(tool_id, "out", [EdgeKind.USED])]
    agents = graph.neighbors(tool_id, "out", [EdgeKind.WAS_ASSOCIATED_WITH])
    ctx = DecisionContext(
        decision_id=decision_id,
        tool_id=tool_id,
        inputs=inputs,
        agent_id=agents[0][1] if agents else None,
    )
    invocations = [
        other
        for _, other in graph.neighbors(tool_id, "out", [EdgeKind.WAS_INFORMED_BY])
        if graph.has_node(other)
        and graph.node(other).kind is NodeKind.AI_MODEL_INVOCATION
    ]
    if not invocations:
        ctx.missing_invocation = True
        return ctx
    inv_id = invocations[0]
    ctx.invocation_id = inv_id
    for _, used_id in graph.neighbors(inv_id, "out", [EdgeKind.USED]):
        used = graph.node(used_id)
        if used.kind is NodeKind.PROMPT:
            ctx.prompt_id = used_id
            ctx.prompt_text = used.attributes.get("text")
        elif used.kind is NodeKind.AI_MODEL:
            ctx.model = dict(used.attributes)
    for _, gen_id in graph.neighbors(inv_id, "in", [EdgeKind.WAS_GENERATED_BY]):
        gen = graph.node(gen_id)
        if gen.kind is NodeKind.RESPONSE_DATA:
            ctx.response_id = gen_id
            ctx.response_text = gen.attributes.get("text")
    return ctx


@dataclass
class Path:
    nodes: list  # node ids, start..end
    kinds: list  # EdgeKind per hop; kinds[i] connects nodes[i] -> nodes[i+1]

    def __len__(self) -> int:
        return len(self.kinds)


@dataclass
class PathResult:
    paths: list
    truncated: bool = False


def paths(
    graph: ProvGraph, from_id: str, to_id: str, max_paths: int = 100
) -> PathResult:
    """Enumerate simple paths from ``from_id`` to ``to_id`` along the
    forward dataflow direction, in deterministic order."""
    if max_paths < 1:
        raise QueryError("max_paths must be >= 1")
    graph.node(from_id)
    graph.node(to_id)
    found: list[Path] = []

    # Enumerate one path past the bound so truncation is exact.
    def dfs(node_id: str, trail_nodes: list, trail_kinds: list) -> bool:
        # returns True when the search must stop
        if node_id == to_id:
            found.append(Path(list(trail_nodes), list(trail_kinds)))
            return len(found) > max_paths
        for kind, other in graph.neighbors(node_id, "in", DATAFLOW_KINDS):
            if other in trail_nodes:
                continue
            trail_nodes.append(other)
            trail_kinds.append(kind)
            stop = dfs(other, trail_nodes, trail_kinds)
            trail_nodes.pop()
            trail_kinds.pop()
            if stop:
                return True
        return False

    dfs(from_id, [from_id], [])
    truncated = len(found) > max_paths
    return PathResult(paths=found[:max_paths], truncated=truncated)
