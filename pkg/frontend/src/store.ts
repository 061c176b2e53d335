// View-model for the planning room. Renders strictly from the latest
// server snapshot; the only client-side state is this participant's
// identity and which stories they already submitted (optimistic lock).

import type {
  Rational,
  RevealView,
  SessionSnapshot,
  StoryView,
} from "./api.js";

export interface RoomState {
  sessionId: string | null;
  token: string | null;
  participantId: string | null;
  displayName: string | null;
  snapshot: SessionSnapshot | null;
  mySubmissions: Set<string>;
  myRevisions: Set<string>;
  lastError: string | null;
}

export function initialState(): RoomState {
  return {
    sessionId: null,
    token: null,
    participantId: null,
    displayName: null,
    snapshot: null,
    mySubmissions: new Set(),
    myRevisions: new Set(),
    lastError: null,
  };
}

export function applySnapshot(state: RoomState, snapshot: SessionSnapshot | null): RoomState {
  // null means the server answered "no change"; keep everything as-is.
  if (snapshot === null) return state;
  return { ...state, snapshot };
}

export function joined(state: RoomState, sessionId: string, participantId: string, token: string, displayName: string): RoomState {
  return { ...state, sessionId, participantId, token, displayName };
}

export function markSubmitted(state: RoomState, storyId: string): RoomState {
  const mySubmissions = new Set(state.mySubmissions);
  mySubmissions.add(storyId);
  return { ...state, mySubmissions };
}

export function markRevised(state: RoomState, storyId: string): RoomState {
  const myRevisions = new Set(state.myRevisions);
  myRevisions.add(storyId);
  return { ...state, myRevisions };
}

// Render a server rational ("17/2" or 8) for display.
export function formatRational(value: Rational): string {
  if (typeof value === "number") return String(value);
  const parts = value.split("/");
  if (parts.length === 2) {
    const decimal = Number(parts[0]) / Number(parts[1]);
    return Number.isFinite(decimal) ? String(decimal) : value;
  }
  return value;
}

// Anonymous seat checkmarks: how many of the room submitted, never who.
export function seatChecks(story: StoryView): boolean[] {
  const seats: boolean[] = [];
  for (let i = 0; i < story.participant_count; i += 1) {
    seats.push(i < story.submitted_count);
  }
  return seats;
}

export interface HistogramBar {
  value: string;
  count: number;
}

// Bars for the reveal screen, one per distinct estimate value.
export function revealHistogram(reveal: RevealView): HistogramBar[] {
  const counts = new Map<string, number>();
  for (const value of reveal.values) {
    const key = formatRational(value);
    counts.set(key, (counts.get(key) ?? 0) + 1);
  }
  return [...counts.entries()]
    .map(([value, count]) => ({ value, count }))
    .sort((a, b) => Number(a.value) - Number(b.value));
}

export type StoryScreen =
  | "draft"
  | "estimate"
  | "sealed"
  | "reveal"
  | "commit"
  | "in-progress"
  | "done"
  | "scored";

// Which screen this participant sees for a story, given only the
// snapshot and their own submission memory.
export function storyScreen(state: RoomState, story: StoryView): StoryScreen {
  switch (story.state) {
    case "Draft":
      return "draft";
    case "Estimating":
      return state.mySubmissions.has(story.story_id) ? "sealed" : "estimate";
    case "Revealed":
      return "reveal";
    case "Committed":
      return "commit";
    case "InProgress":
      return "in-progress";
    case "Done":
      return "done";
    case "Scored":
      return "scored";
  }
}

export function canRevise(state: RoomState, story: StoryView): boolean {
  return story.state === "InProgress" && state.mySubmissions.has(story.story_id);
}

// Scale values offered by the picker come straight from the snapshot.
export function scaleChoices(snapshot: SessionSnapshot): string[] {
  return snapshot.scale.map(formatRational);
}

export function myLeaderboardRow(state: RoomState): { display_name: string; cumulative_points: number } | null {
  if (!state.snapshot || !state.participantId) return null;
  const me = state.snapshot.participants.find(
    (p) => p.participant_id === state.participantId,
  );
  return me ? { display_name: me.display_name, cumulative_points: me.cumulative_points } : null;
}

export interface PollDecision {
  sinceVersion: number | undefined;
}

// Poll with the last seen version so an unchanged session costs a 304.
export function nextPoll(state: RoomState): PollDecision {
  return { sinceVersion: state.snapshot?.version };
}
