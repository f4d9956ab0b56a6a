import json

import pytest

from agentprov.ingest import ingest_event
from agentprov.simulator import SimConfig, generate
from agentprov.store import ProvGraph


def sim_events(layers, **kwargs):
    return generate(SimConfig(layers=layers, **kwargs))


def build_graph(events, path=None):
    graph = ProvGraph(path)
    for envelope in events:
        ingest_event(envelope, graph)
    return graph


def event_dicts(events):
    return [json.loads(e.to_json()) for e in events]


@pytest.fixture
def sim_graph_n2():
    return build_graph(sim_events(2, seed=7))


@pytest.fixture
def sim_graph_n3():
    return build_graph(sim_events(3, seed=7))
