/**
 * Wire event types: one JSON envelope per line, matching the ingestion
 * service's schema (version "1").
 */

export const SCHEMA_VERSION = "1";

export type DataKind =
  | "DomainData"
  | "SchedulingData"
  | "TelemetryData"
  | "Prompt"
  | "ResponseData"
  | "AIModel";

export interface DataRef {
  dataId: string;
  dataKind: DataKind;
  attributes?: Record<string, unknown>;
}

export interface AgentRegistered {
  type: "AgentRegistered";
  agentId: string;
  name: string;
  attributes?: Record<string, unknown>;
}

export interface ActivityExecuted {
  type: "ActivityExecuted";
  activityId: string;
  activityKind: "Task" | "AgentTool" | "AIModelInvocation";
  parentId?: string;
  agentId?: string;
  informedBy?: string[];
  used?: DataRef[];
  generated?: DataRef[];
  startedAt?: string;
  endedAt?: string;
  location?: string;
  telemetry?: Record<string, unknown>;
  scheduling?: Record<string, unknown>;
  status?: string;
}

export interface DataDeclared {
  type: "DataDeclared";
  data: DataRef;
  attributedTo?: string;
}

export interface WorkflowDeclared {
  type: "WorkflowDeclared";
  workflowId: string;
  name: string;
  campaignId: string;
}

export interface CampaignDeclared {
  type: "CampaignDeclared";
  campaignId: string;
  name: string;
  ownerAgent?: { agentId: string; kind: "Person" | "Organization"; name?: string };
}

export type EventPayload =
  | AgentRegistered
  | ActivityExecuted
  | DataDeclared
  | WorkflowDeclared
  | CampaignDeclared;

export interface EventEnvelope {
  eventId: string;
  emittedAt: string;
  site: string;
  campaignId: string;
  workflowId: string;
  payload: EventPayload;
}

function refToWire(ref: DataRef): Record<string, unknown> {
  const d: Record<string, unknown> = {
    data_id: ref.dataId,
    data_kind: ref.dataKind,
  };
  if (ref.attributes && Object.keys(ref.attributes).length > 0) {
    d.attributes = ref.attributes;
  }
  return d;
}

function payloadToWire(p: EventPayload): Record<string, unknown> {
  switch (p.type) {
    case "AgentRegistered": {
      const d: Record<string, unknown> = {
        type: p.type,
        agent_id: p.agentId,
        name: p.name,
      };
      if (p.attributes && Object.keys(p.attributes).length > 0) {
        d.attributes = p.attributes;
      }
      return d;
    }
    case "ActivityExecuted": {
      const d: Record<string, unknown> = {
        type: p.type,
        activity_id: p.activityId,
        activity_kind: p.activityKind,
      };
      if (p.parentId !== undefined) d.parent_id = p.parentId;
      if (p.agentId !== undefined) d.agent_id = p.agentId;
      if (p.startedAt !== undefined) d.started_at = p.startedAt;
      if (p.endedAt !== undefined) d.ended_at = p.endedAt;
      if (p.location !== undefined) d.location = p.location;
      if (p.status !== undefined) d.status = p.status;
      if (p.informedBy && p.informedBy.length) d.informed_by = p.informedBy;
      if (p.used && p.used.length) d.used = p.used.map(refToWire);
      if (p.generated && p.generated.length) d.generated = p.generated.map(refToWire);
      if (p.telemetry) d.telemetry = p.telemetry;
      if (p.scheduling) d.scheduling = p.scheduling;
      return d;
    }
    case "DataDeclared": {
      const d: Record<string, unknown> = { type: p.type, data: refToWire(p.data) };
      if (p.attributedTo) d.attributed_to = p.attributedTo;
      return d;
    }
    case "WorkflowDeclared":
      return {
        type: p.type,
        workflow_id: p.workflowId,
        name: p.name,
        campaign_id: p.campaignId,
      };
    case "CampaignDeclared": {
      const d: Record<string, unknown> = {
        type: p.type,
        campaign_id: p.campaignId,
        name: p.name,
      };
      if (p.ownerAgent) {
        d.owner_agent = {
          agent_id: p.ownerAgent.agentId,
          kind: p.ownerAgent.kind,
          name: p.ownerAgent.name,
        };
      }
      return d;
    }
  }
}

/** Serialize an envelope to its single-line wire form. */
export function toWireLine(env: EventEnvelope): string {
  return JSON.stringify({
    event_id: env.eventId,
    emitted_at: env.emittedAt,
    site: env.site,
    campaign_id: env.campaignId,
    workflow_id: env.workflowId,
    schema_version: SCHEMA_VERSION,
    payload: payloadToWire(env.payload),
  });
}
