export type Scenario = {
  total: number;
  richest_share: number;
  values: [number, number];
};

export type Question = {
  question_id: string;
  option_a: Scenario;
  option_b: Scenario;
};

export type SessionStatus = "active" | "converged" | "exhausted";

export type SessionState = {
  session_id: string;
  status: SessionStatus;
  interval: [number, number];
  tolerance: number;
  history_length: number;
  question?: Question;
  epsilon?: number;
  at_boundary?: "low" | "high";
};

export type CreateParams = {
  total?: number;
  s1?: number;
  s_alt?: number;
  tolerance?: number;
};

export class ApiError extends Error {
  status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function toJson<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = await res.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(res.status, detail);
  }
  return res.json() as Promise<T>;
}

export async function createSession(
  params: CreateParams = {},
  base = ""
): Promise<SessionState> {
  const res = await fetch(`${base}/sessions`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(params),
  });
  return toJson<SessionState>(res);
}

export async function submitAnswer(
  sessionId: string,
  questionId: string,
  choice: "A" | "B",
  base = ""
): Promise<SessionState> {
  const res = await fetch(
    `${base}/sessions/${encodeURIComponent(sessionId)}/answers`,
    {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ question_id: questionId, choice }),
    }
  );
  return toJson<SessionState>(res);
}

export async function getSession(
  sessionId: string,
  base = ""
): Promise<SessionState> {
  const res = await fetch(`${base}/sessions/${encodeURIComponent(sessionId)}`);
  return toJson<SessionState>(res);
}
