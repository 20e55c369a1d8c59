import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, createSession, getSession, submitAnswer } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

const SESSION = {
  session_id: "s1",
  status: "active",
  interval: [0.001, 0.999],
  tolerance: 0.02,
  history_length: 0,
};

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("createSession", () => {
  it("posts params to /sessions", async () => {
    const mock = vi.fn(async () => jsonResponse(SESSION, 201));
    vi.stubGlobal("fetch", mock);
    const state = await createSession({ tolerance: 0.05 }, "http://x");
    expect(state.session_id).toBe("s1");
    expect(mock).toHaveBeenCalledTimes(1);
    const [url, init] = mock.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe("http://x/sessions");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body as string)).toEqual({ tolerance: 0.05 });
  });

  it("throws ApiError with the server detail", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => jsonResponse({ detail: "bad tolerance" }, 422))
    );
    await expect(createSession({})).rejects.toMatchObject({
      status: 422,
      message: "bad tolerance",
    });
  });

  it("propagates network failures", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => Promise.reject(new TypeError("refused"))));
    await expect(createSession({})).rejects.toBeInstanceOf(TypeError);
  });
});

describe("submitAnswer", () => {
  it("posts the question id and choice", async () => {
    const mock = vi.fn(async () => jsonResponse(SESSION));
    vi.stubGlobal("fetch", mock);
    await submitAnswer("s 1", "q3", "B");
    const [url, init] = mock.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe("/sessions/s%201/answers");
    expect(JSON.parse(init.body as string)).toEqual({ question_id: "q3", choice: "B" });
  });

  it("maps 409 to an ApiError", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => jsonResponse({ detail: "stale question" }, 409))
    );
    const err = await submitAnswer("s1", "q1", "A").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
  });
});

describe("getSession", () => {
  it("fetches the session resource", async () => {
    const mock = vi.fn(async () => jsonResponse(SESSION));
    vi.stubGlobal("fetch", mock);
    const state = await getSession("s1");
    expect(state.status).toBe("active");
    expect(mock.mock.calls[0][0]).toBe("/sessions/s1");
  });
});
