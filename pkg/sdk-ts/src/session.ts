/**
 * Capture session: registers the agent, then instruments tool
 * functions and model callables so each call emits provenance events.
 *
 * A session is single-threaded by contract; concurrent tools should
 * use separate sessions.
 */

import { randomUUID } from "node:crypto";
import {
  ActivityExecuted,
  DataKind,
  DataRef,
  EventEnvelope,
  EventPayload,
  toWireLine,
} from "./events.js";
import { Sink, openSink } from "./sink.js";

export interface SessionOptions {
  /** Explicit agent id; defaults to a fresh unique id. */
  agentId?: string;
  agentAttributes?: Record<string, unknown>;
  /** When set, a CampaignDeclared is emitted before the registration. */
  campaign?: {
    name: string;
    owner?: { agentId: string; kind: "Person" | "Organization"; name?: string };
  };
  /** When set, a WorkflowDeclared is emitted before the registration. */
  workflow?: { name: string };
  /** Default site stamped on envelopes; per-call options override it. */
  site?: string;
  /** Injectable clock for reproducible runs; defaults to wall time. */
  now?: () => string;
}

export interface EmitOptions {
  timestamp?: string;
  site?: string;
  eventId?: string;
}

export interface ToolCallOptions extends EmitOptions {
  activityId?: string;
}

export interface ModelCallOptions extends EmitOptions {
  invocationId?: string;
  promptId?: string;
  responseId?: string;
}

export interface ModelMetadata {
  name: string;
  provider: string;
  parameters?: Record<string, unknown>;
  /** Record response latency on the ResponseData entity (default true). */
  captureLatency?: boolean;
}

export interface TaskOptions extends EmitOptions {
  activityId?: string;
  used?: DataRef[];
  generated?: DataRef[];
  parentId?: string;
  informedBy?: string[];
}

interface ToolContext {
  activityId: string;
  invocationIds: string[];
  promptRefs: DataRef[];
}

function isDataRef(value: unknown): value is DataRef {
  return (
    typeof value === "object" &&
    value !== null &&
    typeof (value as DataRef).dataId === "string" &&
    typeof (value as DataRef).dataKind === "string"
  );
}

export class Session {
  readonly agentId: string;
  readonly campaignId: string;
  readonly workflowId: string;

  private sink: Sink;
  private site: string;
  private now: () => string;
  private seq = 0;
  private idBase: string;
  private toolStack: ToolContext[] = [];
  private closed = false;

  constructor(
    sink: Sink,
    agentId: string,
    campaignId: string,
    workflowId: string,
    opts: SessionOptions,
  ) {
    this.sink = sink;
    this.agentId = agentId;
    this.campaignId = campaignId;
    this.workflowId = workflowId;
    this.site = opts.site ?? "client";
    this.now = opts.now ?? (() => new Date().toISOString());
    this.idBase = randomUUID().slice(0, 8);
  }

  freshId(prefix: string): string {
    return `${prefix}-${this.idBase}-${this.seq}`;
  }

  emit(payload: EventPayload, opts: EmitOptions = {}): string {
    if (this.closed) throw new Error("session is closed");
    const env: EventEnvelope = {
      eventId: opts.eventId ?? `evt-${this.idBase}-${this.seq}`,
      emittedAt: opts.timestamp ?? this.now(),
      site: opts.site ?? this.site,
      campaignId: this.campaignId,
      workflowId: this.workflowId,
      payload,
    };
    this.seq += 1;
    this.sink.write(toWireLine(env));
    return env.emittedAt;
  }

  /** Declare a standalone data entity, optionally attributed to an agent. */
  declareData(
    data: DataRef,
    opts: EmitOptions & { attributedTo?: string } = {},
  ): void {
    this.emit({ type: "DataDeclared", data, attributedTo: opts.attributedTo }, opts);
  }

  /** Record a plain (non-agentic) task execution. */
  recordTask(opts: TaskOptions & { activityId: string }): void {
    const at = opts.timestamp ?? this.now();
    this.emit(
      {
        type: "ActivityExecuted",
        activityId: opts.activityId,
        activityKind: "Task",
        parentId: opts.parentId,
        informedBy: opts.informedBy,
        used: opts.used,
        generated: opts.generated,
        startedAt: at,
        endedAt: at,
      },
      { ...opts, timestamp: at },
    );
  }

  /**
   * Wrap a tool function. Each call emits an AgentTool activity whose
   * used refs come from the named arguments, whose generated refs are
   * the returned DataRef plus any prompts captured by wrapped models
   * during the call, and whose informed_by lists those invocations.
   */
  agentTool<A extends Record<string, unknown>>(
    fn: (inputs: A) => DataRef | Promise<DataRef>,
    toolOpts: { name?: string } = {},
  ): (inputs: A, call?: ToolCallOptions) => Promise<DataRef> {
    const name = toolOpts.name ?? fn.name ?? "tool";
    return async (inputs: A, call: ToolCallOptions = {}) => {
      const activityId = call.activityId ?? this.freshId(name);
      const ctx: ToolContext = { activityId, invocationIds: [], promptRefs: [] };
      this.toolStack.push(ctx);
      const used = Object.entries(inputs).map(([argName, value]) =>
        isDataRef(value)
          ? value
          : ({
              dataId: `arg:${argName}`,
              dataKind: "DomainData" as DataKind,
              attributes: { value },
            } satisfies DataRef),
      );
      let result: DataRef | undefined;
      let failed = false;
      try {
        result = await fn(inputs);
        return result;
      } catch (err) {
        failed = true;
        throw err;
      } finally {
        this.toolStack.pop();
        const at = call.timestamp ?? this.now();
        this.emit(
          {
            type: "ActivityExecuted",
            activityId,
            activityKind: "AgentTool",
            agentId: this.agentId,
            informedBy: ctx.invocationIds,
            used,
            generated: failed ? [] : [...ctx.promptRefs, result!],
            startedAt: at,
            endedAt: at,
            status: failed ? "failed" : undefined,
          },
          { ...call, timestamp: at },
        );
      }
    };
  }

  /**
   * Wrap a prompt -> response callable. Each invocation emits an
   * AIModelInvocation that used the Prompt and the AIModel and
   * generated the ResponseData, and registers itself with the
   * enclosing tool call so the tool can claim wasInformedBy.
   */
  wrapModel(
    fn: (prompt: string) => string | Promise<string>,
    metadata: ModelMetadata,
  ): (prompt: string, call?: ModelCallOptions) => Promise<string> {
    const modelAttributes: Record<string, unknown> = {
      name: metadata.name,
      provider: metadata.provider,
      ...(metadata.parameters ?? {}),
    };
    const captureLatency = metadata.captureLatency ?? true;
    return async (prompt: string, call: ModelCallOptions = {}) => {
      const invocationId = call.invocationId ?? this.freshId("invocation");
      const promptId = call.promptId ?? this.freshId("prompt");
      const responseId = call.responseId ?? this.freshId("response");
      const parent = this.toolStack.at(-1);
      const promptRef: DataRef = {
        dataId: promptId,
        dataKind: "Prompt",
        attributes: { text: prompt },
      };
      if (parent) {
        parent.invocationIds.push(invocationId);
        parent.promptRefs.push(promptRef);
      }
      const started = Date.now();
      let response: string | undefined;
      let error: string | undefined;
      try {
        response = await fn(prompt);
      } catch (err) {
        error = err instanceof Error ? err.message : String(err);
      }
      const at = call.timestamp ?? this.now();
      const generated: DataRef[] = [];
      if (error === undefined) {
        const attrs: Record<string, unknown> = { text: response };
        if (captureLatency) attrs.latency_ms = Date.now() - started;
        generated.push({ dataId: responseId, dataKind: "ResponseData", attributes: attrs });
      }
      const payload: ActivityExecuted = {
        type: "ActivityExecuted",
        activityId: invocationId,
        activityKind: "AIModelInvocation",
        parentId: parent?.activityId,
        agentId: this.agentId,
        used: [promptRef, { dataId: "", dataKind: "AIModel", attributes: modelAttributes }],
        generated,
        startedAt: at,
        endedAt: at,
        status: error === undefined ? undefined : "failed",
        telemetry: error === undefined ? undefined : { error },
      };
      this.emit(payload, { ...call, timestamp: at });
      if (error !== undefined) throw new Error(error);
      return response!;
    };
  }

  async close(): Promise<void> {
    if (this.closed) return;
    this.closed = true;
    await this.sink.close();
  }
}

/**
 * Open a session: connect the sink (file path or "HOST:PORT"), emit
 * any campaign/workflow declarations, and register the agent.
 */
export async function initSession(
  agentName: string,
  sink: string,
  campaignId: string,
  workflowId: string,
  opts: SessionOptions = {},
): Promise<Session> {
  const opened = await openSink(sink);
  const agentId = opts.agentId ?? `agent-${randomUUID().slice(0, 8)}`;
  const session = new Session(opened, agentId, campaignId, workflowId, opts);
  if (opts.campaign) {
    session.emit({
      type: "CampaignDeclared",
      campaignId,
      name: opts.campaign.name,
      ownerAgent: opts.campaign.owner,
    });
  }
  if (opts.workflow) {
    session.emit({
      type: "WorkflowDeclared",
      workflowId,
      name: opts.workflow.name,
      campaignId,
    });
  }
  session.emit({
    type: "AgentRegistered",
    agentId,
    name: agentName,
    attributes: opts.agentAttributes,
  });
  return session;
}
