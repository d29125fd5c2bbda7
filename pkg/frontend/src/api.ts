// Typed client for the proctor service. The console never computes a
// score or an IQ itself; every number rendered comes from these payloads.

export interface SessionSummary {
  id: string;
  status: string;
  subject_ref: string;
  subject_display_name: string;
  battery_id: string;
  battery_version: string;
  started_at: string | null;
  finished_at: string | null;
  pending_count: number;
}

export interface QueueItem {
  item_id: string;
  prompt: string;
  modality: string;
  raw_response: string;
  response_outcome: string;
  rubric: string;
  max_points: number;
}

export interface QueuePayload {
  session_id: string;
  subject_id: string;
  subject_display_name: string;
  status: string;
  items: QueueItem[];
}

export interface ScoreResult {
  session_id: string;
  status: string;
  pending_count: number;
  q_so_far: number | null;
  q_display: string | null;
  final: boolean;
}

export interface RankRow {
  rank: number;
  subject_id: string;
  display_name: string;
  region: string | null;
  q: number;
  q_display: string;
}

export interface RankPayload {
  as_of: string;
  rows: RankRow[];
}

export interface GradeResult {
  grade: number;
  degenerate: boolean;
  matched_conditions: string[];
  next_grade_gaps: string[];
}

export interface NamedProfile {
  name: string;
  profile: Record<string, unknown>;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = "HttpError";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (body?.error?.code) {
      code = body.error.code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(response.status, code, message);
}

export class AiqClient {
  constructor(readonly baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  async listSessions(): Promise<SessionSummary[]> {
    const body = await this.request<{ sessions: SessionSummary[] }>("/api/sessions");
    return body.sessions;
  }

  getQueue(sessionId: string): Promise<QueuePayload> {
    return this.request(`/api/sessions/${encodeURIComponent(sessionId)}/queue`);
  }

  submitScore(
    sessionId: string,
    itemId: string,
    points: number,
    graderId: string,
  ): Promise<ScoreResult> {
    return this.request(`/api/sessions/${encodeURIComponent(sessionId)}/scores`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ item_id: itemId, points, grader_id: graderId }),
    });
  }

  getRank(): Promise<RankPayload> {
    return this.request("/api/reports/rank");
  }

  async getProfiles(): Promise<NamedProfile[]> {
    const body = await this.request<{ profiles: NamedProfile[] }>("/api/profiles");
    return body.profiles;
  }

  classify(profile: Record<string, unknown>, eps?: number): Promise<GradeResult> {
    const body = eps === undefined ? profile : { ...profile, eps };
    return this.request("/api/profiles/classify", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }
}
