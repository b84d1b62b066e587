// Api client behavior against a scripted fetch: error decoding and the
// depth-1 mutation queue (a mutation never starts before the previous
// response lands).

import { afterEach, describe, expect, it, vi } from "vitest";

import { Api, ApiError } from "../src/api.js";

const emptyMutation = {
  result: {},
  revision: 1,
  report: { revision: 1, entries: [] },
  monitors: { entries: [] },
};

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("Api", () => {
  it("decodes error bodies into ApiError", async () => {
    vi.stubGlobal("fetch", vi.fn(async () =>
      jsonResponse({ error: { code: "NameTaken", message: "taken",
                              path: "/api/classes" } }, 409)));
    const api = new Api("");
    const err = await api.createClass("Ticket").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.code).toBe("NameTaken");
  });

  it("queues mutations one deep", async () => {
    const events: string[] = [];
    let release: (() => void) | null = null;
    const fetchMock = vi.fn(async (_url: unknown, init?: RequestInit) => {
      const body = JSON.parse(String(init?.body));
      events.push(`start ${body.name}`);
      if (body.name === "First") {
        await new Promise<void>((resolve) => {
          release = resolve;
        });
      }
      events.push(`end ${body.name}`);
      return jsonResponse(emptyMutation);
    });
    vi.stubGlobal("fetch", fetchMock);
    const api = new Api("");
    const first = api.createClass("First");
    const second = api.createClass("Second");
    await new Promise((r) => setTimeout(r, 20));
    expect(events).toEqual(["start First"]); // second is parked
    release!();
    await Promise.all([first, second]);
    expect(events).toEqual(["start First", "end First",
                            "start Second", "end Second"]);
  });

  it("keeps the queue alive after a failed mutation", async () => {
    let calls = 0;
    vi.stubGlobal("fetch", vi.fn(async () => {
      calls += 1;
      if (calls === 1) {
        return jsonResponse({ error: { code: "NameTaken", message: "no",
                                       path: "/" } }, 409);
      }
      return jsonResponse(emptyMutation);
    }));
    const api = new Api("");
    await expect(api.createClass("A")).rejects.toBeInstanceOf(ApiError);
    await expect(api.createClass("B")).resolves.toMatchObject({ revision: 1 });
  });
});
