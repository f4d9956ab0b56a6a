"""Deterministic generator of an agentic additive-manufacturing
workflow as an event stream.

Per printed layer i: a sensor driver reads the experiment setup and
produces sensor data; a physics model turns it into a control result;
an evaluation task scores it; an agent tool consumes the scores, the
control result, and the previous layer's decision, asks a (mocked) LLM,
and produces the next decision. Decisions feed forward, so layer i
influences layer i+1.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .events import (
    ActivityExecuted,
    AgentRegistered,
    CampaignDeclared,
    DataDeclared,
    DataRef,
    EventEnvelope,
    WorkflowDeclared,
)
from .model import NodeKind

DEFAULT_SITES = {
    "sensor": "edge",
    "physics": "hpc",
    "evaluation": "hpc",
    "tool": "hpc",
    "invocation": "cloud",
}

# non-integral temperature: integral floats do not survive a JSON round
# trip through every client language, and model identity hashes them
MODEL_ATTRIBUTES = {"name": "gpt-4o", "provider": "mock", "temperature": 0.2}

_SCORE_OPTIONS = ("a", "b", "c")
_BASE_EPOCH = "2026-01-01T00:00:00Z"


class SimConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    layers: int
    seed: int = 0
    fault_layer: Optional[int] = None
    sites: dict = field(default_factory=lambda: dict(DEFAULT_SITES))
    emit_telemetry: bool = False
    emit_locations: bool = False
    id_prefix: str = ""

    def validate(self) -> None:
        if self.layers < 1:
            raise SimConfigError("layers must be >= 1")
        if self.fault_layer is not None and not (1 <= self.fault_layer <= self.layers):
            raise SimConfigError(
                f"fault_layer must be in [1, {self.layers}], got {self.fault_layer}"
            )
        missing = set(DEFAULT_SITES) - set(self.sites)
        if missing:
            raise SimConfigError(f"sites missing roles: {sorted(missing)}")


def _timestamp(seq: int) -> str:
    minutes, seconds = divmod(seq, 60)
    hours, minutes = divmod(minutes, 60)
    return f"2026-01-01T{hours:02d}:{minutes:02d}:{seconds:02d}Z"


def mock_response(seed: int, layer: int, prompt: str) -> str:
    """Deterministic stand-in for a cloud LLM: a pure function of the
    seed, the layer, and the prompt text."""
    digest = hashlib.sha256(f"{seed}|{layer}|{prompt}".encode()).hexdigest()
    option = _SCORE_OPTIONS[int(digest, 16) % len(_SCORE_OPTIONS)]
    return (
        f"Based on the scores, option {option} gives the best melt-pool "
        f"stability for layer {layer}. Apply control option {option}."
    )


def fault_response(layer: int) -> str:
    """Divergent, obviously-wrong answer injected at the fault layer."""
    return (
        f"Ignore the provided scores. Set laser power to 9999 W and skip "
        f"quality checks for layer {layer}."
    )


def _decision_option(response: str) -> str:
    for option in _SCORE_OPTIONS:
        if f"option {option}" in response:
            return option
    return "none"


class _Emitter:
    def __init__(self, config: SimConfig):
        self.config = config
        self.seq = 0
        self.events: list[EventEnvelope] = []
        p = config.id_prefix
        self.campaign_id = f"{p}AM_Campaign"
        self.workflow_id = f"{p}AM_Workflow"
        self.agent_id = f"{p}Analysis_Agent"
        self.person_id = f"{p}Operator"
        self.setup_id = f"{p}Experiment_Setup"

    def emit(self, payload, site: str) -> EventEnvelope:
        env = EventEnvelope(
            event_id=f"{self.config.id_prefix}ev-{self.config.seed}-{self.seq:06d}",
            emitted_at=_timestamp(self.seq),
            site=site,
            campaign_id=self.campaign_id,
            workflow_id=self.workflow_id,
            payload=payload,
        )
        self.seq += 1
        self.events.append(env)
        return env

    def activity(self, role: str, payload: ActivityExecuted) -> EventEnvelope:
        site = self.config.sites[role]
        payload.started_at = _timestamp(self.seq)
        payload.ended_at = _timestamp(self.seq)
        if self.config.emit_locations:
            payload.location = site
        if self.config.emit_telemetry:
            payload.telemetry = {"cpu_pct": 10.0 + self.seq % 7, "rss_mb": 128}
        return self.emit(payload, site)


def generate(config: SimConfig) -> list[EventEnvelope]:
    """Produce the full ordered event stream for one simulated run.

    Identical configs yield byte-identical streams.
    """
    config.validate()
    rng = random.Random(config.seed)
    em = _Emitter(config)

    em.emit(
        CampaignDeclared(
            campaign_id=em.campaign_id,
            name="Additive Manufacturing Campaign",
            owner_agent={"agent_id": em.person_id, "kind": "Person", "name": "Operator"},
        ),
        site="hpc",
    )
    em.emit(
        WorkflowDeclared(
            workflow_id=em.workflow_id,
            name="AM Control Workflow",
            campaign_id=em.campaign_id,
        ),
        site="hpc",
    )
    em.emit(
        AgentRegistered(agent_id=em.agent_id, name="Analysis_Agent"),
        site="hpc",
    )
    em.emit(
        DataDeclared(
            data=DataRef(
                em.setup_id,
                NodeKind.DOMAIN_DATA,
                {"material": "Ti-6Al-4V", "layers": config.layers},
            ),
            attributed_to=em.person_id,
        ),
        site="edge",
    )

    for layer in range(1, config.layers + 1):
        _generate_layer(em, rng, layer)
    return em.events


def _generate_layer(em: _Emitter, rng: random.Random, layer: int) -> None:
    config = em.config
    p = config.id_prefix
    sensor_data = DataRef(
        f"{p}Sensor_Data_{layer}",
        NodeKind.DOMAIN_DATA,
        {
            "layer": layer,
            "melt_pool_temp": round(1600 + rng.random() * 200, 2),
            "spatter_count": rng.randrange(0, 50),
        },
    )
    em.activity(
        "sensor",
        ActivityExecuted(
            activity_id=f"{p}Sensor_Driver_{layer}",
            activity_kind=NodeKind.TASK,
            used=[DataRef(em.setup_id, NodeKind.DOMAIN_DATA)],
            generated=[sensor_data],
        ),
    )

    control = DataRef(
        f"{p}Control_Result_{layer}",
        NodeKind.DOMAIN_DATA,
        {"layer": layer, "laser_power_w": round(250 + rng.random() * 50, 2)},
    )
    em.activity(
        "physics",
        ActivityExecuted(
            activity_id=f"{p}Physics_Model_{layer}",
            activity_kind=NodeKind.TASK,
            used=[DataRef(sensor_data.data_id, NodeKind.DOMAIN_DATA)],
            generated=[control],
        ),
    )

    score_values = {
        f"option_{o}": round(rng.random(), 4) for o in _SCORE_OPTIONS
    }
    scores = DataRef(
        f"{p}Scores_{layer}",
        NodeKind.DOMAIN_DATA,
        {"layer": layer, **score_values},
    )
    em.activity(
        "evaluation",
        ActivityExecuted(
            activity_id=f"{p}Model_Evaluation_{layer}",
            activity_kind=NodeKind.TASK,
            used=[DataRef(control.data_id, NodeKind.DOMAIN_DATA)],
            generated=[scores],
        ),
    )

    prompt_text = (
        f"Layer {layer}: given control scores "
        + ", ".join(f"{k}={v}" for k, v in sorted(score_values.items()))
        + ", pick the best control option for the next layer."
    )
    if layer > 1:
        prompt_text += f" Previous decision: see Agent_Decision_{layer - 1}."
    faulty = config.fault_layer == layer
    response_text = (
        fault_response(layer) if faulty else mock_response(config.seed, layer, prompt_text)
    )
    option = _decision_option(response_text)
    decision_attrs = {
        "layer": layer,
        "option": option,
        "text": f"Apply control option {option} for layer {layer + 1}.",
    }
    if faulty:
        decision_attrs["faulty"] = True
        decision_attrs["text"] = response_text

    tool_id = f"{p}Agent_Tool_{layer}"
    invocation_id = f"{p}LLM_Invocation_{layer}"
    used = [
        DataRef(scores.data_id, NodeKind.DOMAIN_DATA),
        DataRef(control.data_id, NodeKind.DOMAIN_DATA),
    ]
    if layer > 1:
        used.append(DataRef(f"{p}Agent_Decision_{layer - 1}", NodeKind.DOMAIN_DATA))
    em.activity(
        "tool",
        ActivityExecuted(
            activity_id=tool_id,
            activity_kind=NodeKind.AGENT_TOOL,
            agent_id=em.agent_id,
            informed_by=[invocation_id],
            used=used,
            generated=[
                DataRef(f"{p}Prompt_{layer}", NodeKind.PROMPT, {"text": prompt_text}),
                DataRef(f"{p}Agent_Decision_{layer}", NodeKind.DOMAIN_DATA, decision_attrs),
            ],
        ),
    )
    em.activity(
        "invocation",
        ActivityExecuted(
            activity_id=invocation_id,
            activity_kind=NodeKind.AI_MODEL_INVOCATION,
            parent_id=tool_id,
            agent_id=em.agent_id,
            used=[
                DataRef(f"{p}Prompt_{layer}", NodeKind.PROMPT),
                DataRef("", NodeKind.AI_MODEL, dict(MODEL_ATTRIBUTES)),
            ],
            generated=[
                DataRef(
                    f"{p}Response_{layer}",
                    NodeKind.RESPONSE_DATA,
                    {"text": response_text},
                )
            ],
        ),
    )


def generate_lines(config: SimConfig) -> Iterator[str]:
    for envelope in generate(config):
        yield envelope.to_json()
