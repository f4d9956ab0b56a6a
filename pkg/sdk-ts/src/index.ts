export {
  SCHEMA_VERSION,
  toWireLine,
  type ActivityExecuted,
  type AgentRegistered,
  type CampaignDeclared,
  type DataDeclared,
  type DataKind,
  type DataRef,
  type EventEnvelope,
  type EventPayload,
  type WorkflowDeclared,
} from "./events.js";
export { openSink, type Sink } from "./sink.js";
export {
  Session,
  initSession,
  type EmitOptions,
  type ModelCallOptions,
  type ModelMetadata,
  type SessionOptions,
  type TaskOptions,
  type ToolCallOptions,
} from "./session.js";
