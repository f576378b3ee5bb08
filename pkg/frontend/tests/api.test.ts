/** Wire behavior of the typed client against a stubbed fetch. */

import { describe, expect, it } from "vitest";
import { ApiError, Client, newRequestKey } from "../src/api.js";

interface Captured {
  url: string;
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}

function stubFetch(status: number, payload: unknown, captured: Captured[]): typeof fetch {
  return async (input, init) => {
    captured.push({
      url: String(input),
      method: init?.method,
      headers: init?.headers as Record<string, string> | undefined,
      body: init?.body as string | undefined,
    });
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
}

describe("Client", () => {
  it("posts observations with a JSON boolean outcome and the request key", async () => {
    const captured: Captured[] = [];
    const ack = { student: "ada", exercise: "ex", outcome: true, at: 0, seq: 1, skills: [] };
    const client = new Client("http://x", stubFetch(200, ack, captured));
    await client.observe({ student: "ada", exercise: "ex", outcome: true, request_key: "k-1" });

    expect(captured[0].url).toBe("http://x/observations");
    expect(captured[0].method).toBe("POST");
    expect(captured[0].headers?.["Content-Type"]).toBe("application/json");
    const body = JSON.parse(captured[0].body ?? "{}");
    expect(body.outcome).toBe(true);
    expect(typeof body.outcome).toBe("boolean");
    expect(body.request_key).toBe("k-1");
    expect(body.dry_run).toBeUndefined();
  });

  it("marks dry runs without touching the caller's input", async () => {
    const captured: Captured[] = [];
    const preview = { dry_run: true, student: "ada", exercise: "ex", outcome: false, at: 5, skills: [] };
    const client = new Client("", stubFetch(200, preview, captured));
    const input = { student: "ada", exercise: "ex", outcome: false, at: 5 };
    const result = await client.dryRun(input);

    expect(JSON.parse(captured[0].body ?? "{}").dry_run).toBe(true);
    expect("dry_run" in input).toBe(false);
    expect(result.dry_run).toBe(true);
  });

  it("encodes the evaluation time as a query parameter", async () => {
    const captured: Captured[] = [];
    const posterior = { skill: "add", mean: 0.5, coeffs: { order: 0, coeffs: [1] }, interval: null, trace: [] };
    const client = new Client("", stubFetch(200, posterior, captured));
    await client.skill("ada lovelace", "add", 1000);
    expect(captured[0].url).toBe("/students/ada%20lovelace/skills/add?at=1000");

    await client.skill("ada lovelace", "add");
    expect(captured[1].url).toBe("/students/ada%20lovelace/skills/add");
  });

  it("surfaces the structured error envelope as an ApiError", async () => {
    const body = { code: "unknown-student", message: "no such student", detail: { student: "x" } };
    const client = new Client("", stubFetch(404, body, []));
    const failure = client.skill("x", "add");
    await expect(failure).rejects.toBeInstanceOf(ApiError);
    await failure.catch((err: ApiError) => {
      expect(err.status).toBe(404);
      expect(err.code).toBe("unknown-student");
      expect(err.message).toBe("no such student");
      expect(err.detail).toEqual({ student: "x" });
    });
  });

  it("parses the student roster envelope", async () => {
    const client = new Client("", stubFetch(200, { students: ["ada", "lin"] }, []));
    const roster = await client.listStudents();
    expect(roster.students).toEqual(["ada", "lin"]);
  });

  it("passes recommendation bounds through", async () => {
    const captured: Captured[] = [];
    const payload = { student: "ada", at: 0, recommendations: [] };
    const client = new Client("", stubFetch(200, payload, captured));
    await client.recommendations("ada", { at: 10, lo: 0.4, hi: 0.8 });
    const url = new URL(captured[0].url, "http://local");
    expect(url.pathname).toBe("/students/ada/recommendations");
    expect(url.searchParams.get("at")).toBe("10");
    expect(url.searchParams.get("lo")).toBe("0.4");
    expect(url.searchParams.get("hi")).toBe("0.8");
  });
});

describe("newRequestKey", () => {
  it("yields distinct keys", () => {
    const keys = new Set(Array.from({ length: 100 }, () => newRequestKey()));
    expect(keys.size).toBe(100);
  });
});
