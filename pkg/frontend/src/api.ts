/**
 * Typed client for the skilltracer HTTP API.
 *
 * Thin fetch wrapper: every non-2xx response carries a structured body
 * {code, message, detail} which surfaces as an ApiError.  The client holds
 * no state beyond the base URL; idempotency keys are generated per
 * mutation by the caller.
 */

import type { CoeffVector } from "./basis.js";

export interface TraceSource {
  source: "own-data" | "subskills" | "correlated";
  mean: number;
  skills?: string[];
  n_c?: number;
}

export interface Posterior {
  skill: string;
  coeffs: CoeffVector;
  mean: number;
  interval: [number, number] | null;
  trace: TraceSource[];
}

export interface SkillSummary {
  skill: string;
  mean: number;
  interval: [number, number] | null;
}

export interface ObservationAck {
  student: string;
  exercise: string;
  outcome: boolean;
  at: number;
  seq: number;
  skills: Posterior[];
}

export interface DryRunPreview {
  dry_run: true;
  student: string;
  exercise: string;
  outcome: boolean;
  at: number;
  skills: { skill: string; mean: number; coeffs: CoeffVector }[];
}

export interface Recommendation {
  exercise: string;
  expected_success: number;
}

export interface GraphDoc {
  skills: { id: string; name?: string; setup?: string }[];
  exercises: { id: string; setup: string }[];
  [key: string]: unknown;
}

export interface ObservationInput {
  student: string;
  exercise: string;
  outcome: boolean;
  at?: number;
  request_key?: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail?: unknown,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

let keyCounter = 0;

/** Unique idempotency key for one outcome entry. */
export function newRequestKey(): string {
  if (typeof crypto !== "undefined" && crypto.randomUUID) {
    return crypto.randomUUID();
  }
  keyCounter += 1;
  return `key-${Date.now()}-${keyCounter}`;
}

function query(params: Record<string, number | undefined>): string {
  const search = new URLSearchParams();
  for (const [name, value] of Object.entries(params)) {
    if (value !== undefined) search.set(name, String(value));
  }
  const text = search.toString();
  return text ? `?${text}` : "";
}

export class Client {
  constructor(
    private readonly baseUrl = "",
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    let payload: unknown = null;
    try {
      payload = text ? JSON.parse(text) : null;
    } catch {
      throw new ApiError(response.status, "bad-payload", "response was not JSON");
    }
    if (!response.ok) {
      const err = payload as { code?: string; message?: string; detail?: unknown } | null;
      throw new ApiError(
        response.status,
        err?.code ?? "unknown",
        err?.message ?? `request failed with ${response.status}`,
        err?.detail,
      );
    }
    return payload as T;
  }

  health(): Promise<{ status: string; graph_loaded: boolean }> {
    return this.request("GET", "/healthz");
  }

  installGraph(doc: GraphDoc): Promise<{ ok: boolean; errors: unknown[]; warnings: unknown[] }> {
    return this.request("POST", "/graph", doc);
  }

  getGraph(): Promise<GraphDoc> {
    return this.request("GET", "/graph");
  }

  createStudent(id: string): Promise<{ id: string }> {
    return this.request("POST", "/students", { id });
  }

  listStudents(): Promise<{ students: string[] }> {
    return this.request("GET", "/students");
  }

  observe(input: ObservationInput): Promise<ObservationAck> {
    return this.request("POST", "/observations", input);
  }

  dryRun(input: ObservationInput): Promise<DryRunPreview> {
    return this.request("POST", "/observations", { ...input, dry_run: true });
  }

  skill(student: string, skill: string, at?: number): Promise<Posterior> {
    return this.request(
      "GET",
      `/students/${encodeURIComponent(student)}/skills/${encodeURIComponent(skill)}${query({ at })}`,
    );
  }

  skills(student: string, at?: number): Promise<{ student: string; at: number; skills: SkillSummary[] }> {
    return this.request(
      "GET",
      `/students/${encodeURIComponent(student)}/skills${query({ at })}`,
    );
  }

  recommendations(
    student: string,
    opts: { at?: number; lo?: number; hi?: number } = {},
  ): Promise<{ student: string; at: number; recommendations: Recommendation[] }> {
    return this.request(
      "GET",
      `/students/${encodeURIComponent(student)}/recommendations${query(opts)}`,
    );
  }
}
