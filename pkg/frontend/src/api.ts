// Typed client for the session service. Every number shown in the UI
// comes from these response bodies; the client never computes payoffs.

export type Rational = number | string;

export interface ScoreBreakdown {
  accuracy_points: number;
  stag_points: number;
  contribution_points: number;
  adaptability_bonus: number;
  total: number;
}

export interface RevealView {
  story_id: string;
  values: Rational[];
  inconsistency: boolean;
}

export interface StoryView {
  story_id: string;
  role: string;
  function: string;
  benefit: string;
  sprint: number;
  state:
    | "Draft"
    | "Estimating"
    | "Revealed"
    | "Committed"
    | "InProgress"
    | "Done"
    | "Scored";
  submitted_count: number;
  participant_count: number;
  clarifications: { participant_id: string; question: string }[];
  reveal: RevealView | null;
  final_estimate: Rational | null;
  actual: Rational | null;
  scores: Record<string, ScoreBreakdown> | null;
}

export interface ParticipantView {
  participant_id: string;
  display_name: string;
  cumulative_points: number;
  stories_scored: number;
}

export interface SessionSnapshot {
  session_id: string;
  version: number;
  sprint_counter: number;
  scale: Rational[];
  cfg: Record<string, unknown>;
  participants: ParticipantView[];
  stories: StoryView[];
}

export interface LeaderboardEntry {
  display_name: string;
  cumulative_points: number;
  stories_scored: number;
}

export interface VelocityPoint {
  sprint: number;
  completed_points: Rational;
}

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

async function request<T>(
  base: string,
  path: string,
  init?: RequestInit,
): Promise<T> {
  const response = await fetch(base + path, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    let code = "HTTP_" + response.status;
    let message = response.statusText;
    try {
      const body = (await response.json()) as { code?: string; message?: string };
      if (body.code) code = body.code;
      if (body.message) message = body.message;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(code, message, response.status);
  }
  return (await response.json()) as T;
}

export class SessionApi {
  constructor(public readonly base: string) {}

  createSession(body: Record<string, unknown> = {}): Promise<{ session_id: string; version: number }> {
    return request(this.base, "/sessions", {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  join(sessionId: string, displayName: string): Promise<{ participant_id: string; token: string; version: number }> {
    return request(this.base, `/sessions/${sessionId}/participants`, {
      method: "POST",
      body: JSON.stringify({ display_name: displayName }),
    });
  }

  addStory(sessionId: string, story: { role: string; function: string; benefit: string }): Promise<{ story_id: string; version: number }> {
    return request(this.base, `/sessions/${sessionId}/stories`, {
      method: "POST",
      body: JSON.stringify(story),
    });
  }

  openEstimation(sessionId: string, storyId: string): Promise<{ version: number }> {
    return request(this.base, `/sessions/${sessionId}/stories/${storyId}/open`, {
      method: "POST",
    });
  }

  submitEstimate(sessionId: string, storyId: string, token: string, value: Rational): Promise<{ version: number }> {
    return request(this.base, `/sessions/${sessionId}/stories/${storyId}/estimates`, {
      method: "POST",
      body: JSON.stringify({ token, value }),
    });
  }

  clarify(sessionId: string, storyId: string, token: string, question: string): Promise<{ version: number }> {
    return request(this.base, `/sessions/${sessionId}/stories/${storyId}/clarifications`, {
      method: "POST",
      body: JSON.stringify({ token, question }),
    });
  }

  reveal(sessionId: string, storyId: string, override = false): Promise<{ reveal: RevealView; version: number }> {
    return request(this.base, `/sessions/${sessionId}/stories/${storyId}/reveal`, {
      method: "POST",
      body: JSON.stringify({ override }),
    });
  }

  commit(sessionId: string, storyId: string): Promise<{ final_estimate: Rational; version: number }> {
    return request(this.base, `/sessions/${sessionId}/stories/${storyId}/commit`, {
      method: "POST",
    });
  }

  startSprint(sessionId: string): Promise<{ sprint_counter: number; version: number }> {
    return request(this.base, `/sessions/${sessionId}/sprints`, { method: "POST" });
  }

  revise(sessionId: string, storyId: string, token: string, value: Rational, note: string): Promise<{ version: number }> {
    return request(this.base, `/sessions/${sessionId}/stories/${storyId}/revise`, {
      method: "POST",
      body: JSON.stringify({ token, value, note }),
    });
  }

  recordActual(sessionId: string, storyId: string, value: Rational): Promise<{ version: number }> {
    return request(this.base, `/sessions/${sessionId}/stories/${storyId}/actual`, {
      method: "POST",
      body: JSON.stringify({ value }),
    });
  }

  score(sessionId: string, storyId: string): Promise<{ scores: Record<string, ScoreBreakdown>; version: number }> {
    return request(this.base, `/sessions/${sessionId}/stories/${storyId}/score`, {
      method: "POST",
    });
  }

  // Returns null when the server reports no change since `sinceVersion`.
  async snapshot(sessionId: string, sinceVersion?: number): Promise<SessionSnapshot | null> {
    const query = sinceVersion === undefined ? "" : `?since_version=${sinceVersion}`;
    const response = await fetch(`${this.base}/sessions/${sessionId}${query}`);
    if (response.status === 304) return null;
    if (!response.ok) {
      const body = (await response.json()) as { code?: string; message?: string };
      throw new ApiError(body.code ?? `HTTP_${response.status}`, body.message ?? "", response.status);
    }
    return (await response.json()) as SessionSnapshot;
  }

  leaderboard(sessionId: string): Promise<{ leaderboard: LeaderboardEntry[]; version: number }> {
    return request(this.base, `/sessions/${sessionId}/leaderboard`);
  }

  velocity(sessionId: string): Promise<{ velocity: VelocityPoint[]; version: number }> {
    return request(this.base, `/sessions/${sessionId}/velocity`);
  }
}
