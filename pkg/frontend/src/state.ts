/**
 * Dashboard state: server truth plus an optimistic entry queue.
 *
 * The client never computes posteriors itself.  Entering an outcome adds
 * a pending entry immediately (so the UI reacts), posts it with an
 * idempotency key, replaces the touched skills with the posteriors from
 * the ack, and then re-fetches everything: composite and correlated
 * skills move on updates the ack does not spell out, so server truth is
 * always re-read after a mutation settles.
 */

import {
  ApiError,
  Client,
  newRequestKey,
  type DryRunPreview,
  type ObservationAck,
  type Posterior,
  type Recommendation,
} from "./api.js";

export interface PendingEntry {
  key: string;
  exercise: string;
  outcome: boolean;
  status: "pending" | "failed";
  error?: string;
}

export interface DashboardState {
  student: string | null;
  skillIds: string[];
  exerciseIds: string[];
  skills: Record<string, Posterior>;
  pending: PendingEntry[];
  recommendations: Recommendation[];
}

export const initialState: DashboardState = {
  student: null,
  skillIds: [],
  exerciseIds: [],
  skills: {},
  pending: [],
  recommendations: [],
};

// Reducers are pure: callers always get a fresh state object back.

export function withPending(state: DashboardState, entry: PendingEntry): DashboardState {
  return { ...state, pending: [...state.pending, entry] };
}

export function resolvePending(
  state: DashboardState,
  key: string,
  ack: ObservationAck,
): DashboardState {
  const skills = { ...state.skills };
  for (const posterior of ack.skills) {
    skills[posterior.skill] = posterior;
  }
  return {
    ...state,
    skills,
    pending: state.pending.filter((e) => e.key !== key),
  };
}

export function failPending(state: DashboardState, key: string, error: string): DashboardState {
  return {
    ...state,
    pending: state.pending.map((e) =>
      e.key === key ? { ...e, status: "failed" as const, error } : e,
    ),
  };
}

export function dismissPending(state: DashboardState, key: string): DashboardState {
  return { ...state, pending: state.pending.filter((e) => e.key !== key) };
}

export function withPosteriors(state: DashboardState, posteriors: Posterior[]): DashboardState {
  const skills = { ...state.skills };
  for (const posterior of posteriors) {
    skills[posterior.skill] = posterior;
  }
  return { ...state, skills };
}

export interface WhatIf {
  exercise: string;
  success: DryRunPreview;
  failure: DryRunPreview;
}

type Listener = (state: DashboardState) => void;

/** Binds the API client to the state and drives the live loop. */
export class Dashboard {
  state: DashboardState = initialState;
  private listeners: Listener[] = [];

  constructor(private readonly client: Client) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private set(state: DashboardState): void {
    this.state = state;
    for (const listener of this.listeners) listener(state);
  }

  /** Load the graph catalog (skill and exercise ids). */
  async loadCatalog(): Promise<void> {
    const doc = await this.client.getGraph();
    this.set({
      ...this.state,
      skillIds: doc.skills.map((s) => s.id),
      exerciseIds: doc.exercises.map((e) => e.id),
    });
  }

  /** Switch to a student and pull their full picture. */
  async open(student: string, at?: number): Promise<void> {
    this.set({ ...initialState, skillIds: this.state.skillIds, exerciseIds: this.state.exerciseIds, student });
    await this.refresh(at);
  }

  /** Re-fetch every posterior and the recommendations (server truth). */
  async refresh(at?: number): Promise<void> {
    const student = this.state.student;
    if (!student) return;
    const posteriors = await Promise.all(
      this.state.skillIds.map((id) => this.client.skill(student, id, at)),
    );
    const recs = await this.client.recommendations(student, { at });
    this.set({
      ...withPosteriors(this.state, posteriors),
      recommendations: recs.recommendations,
    });
  }

  /**
   * Enter an outcome: optimistic pending entry first, then the server's
   * ack replaces the touched skills, then a full re-fetch reconciles the
   * rest.  Failures stay visible with the server's error code.
   */
  async enter(exercise: string, outcome: boolean, at?: number): Promise<void> {
    const student = this.state.student;
    if (!student) throw new Error("no student selected");
    const key = newRequestKey();
    this.set(withPending(this.state, { key, exercise, outcome, status: "pending" }));
    try {
      const ack = await this.client.observe({
        student,
        exercise,
        outcome,
        at,
        request_key: key,
      });
      this.set(resolvePending(this.state, key, ack));
      await this.refresh(at);
    } catch (err) {
      const message = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      this.set(failPending(this.state, key, message));
    }
  }

  dismiss(key: string): void {
    this.set(dismissPending(this.state, key));
  }

  /** Preview both next-attempt outcomes server-side; nothing is stored. */
  async whatIf(exercise: string, at?: number): Promise<WhatIf> {
    const student = this.state.student;
    if (!student) throw new Error("no student selected");
    const base = { student, exercise, at };
    const [success, failure] = await Promise.all([
      this.client.dryRun({ ...base, outcome: true }),
      this.client.dryRun({ ...base, outcome: false }),
    ]);
    return { exercise, success, failure };
  }
}
