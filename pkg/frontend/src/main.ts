// Bootstrap: wire the API client, the store, and the views together,
// and poll the session with the version protocol.

import { ApiError, SessionApi } from "./api.js";
import { describeError } from "./messages.js";
import {
  RoomState,
  applySnapshot,
  initialState,
  joined,
  markRevised,
  markSubmitted,
  nextPoll,
} from "./store.js";
import { Actions, renderError, renderJoin, renderRoom } from "./views.js";

const POLL_MS = 1500;

const api = new SessionApi("");
let state: RoomState = initialState();
const root = document.getElementById("app") as HTMLElement;

function sessionIdFromLocation(): string | null {
  const params = new URLSearchParams(window.location.search);
  return params.get("session");
}

async function refresh(forceFull = false): Promise<void> {
  const sessionId = state.sessionId;
  if (!sessionId) return;
  const { sinceVersion } = nextPoll(state);
  const snapshot = await api.snapshot(
    sessionId,
    forceFull ? undefined : sinceVersion,
  );
  if (snapshot === null) return; // no change; skip re-render entirely
  state = applySnapshot(state, snapshot);
  const [board, velocity] = await Promise.all([
    api.leaderboard(sessionId),
    api.velocity(sessionId),
  ]);
  renderRoom(root, state, board.leaderboard, velocity.velocity, actions);
}

function showError(error: unknown): void {
  const message =
    error instanceof ApiError
      ? describeError(error.code, error.message)
      : String(error);
  renderError(document.body, message);
  window.setTimeout(() => renderError(document.body, null), 4000);
}

function act(fn: () => Promise<unknown>): void {
  fn()
    .then(() => refresh(true))
    .catch(showError);
}

const actions: Actions = {
  join(name) {
    act(async () => {
      let sessionId = sessionIdFromLocation();
      if (!sessionId) {
        const created = await api.createSession({});
        sessionId = created.session_id;
        const url = new URL(window.location.href);
        url.searchParams.set("session", sessionId);
        window.history.replaceState(null, "", url.toString());
      }
      const membership = await api.join(sessionId, name);
      state = joined(state, sessionId, membership.participant_id, membership.token, name);
    });
  },
  addStory(role, fn, benefit) {
    act(() => api.addStory(state.sessionId!, { role, function: fn, benefit }));
  },
  open(storyId) {
    act(() => api.openEstimation(state.sessionId!, storyId));
  },
  submit(storyId, value) {
    act(async () => {
      await api.submitEstimate(state.sessionId!, storyId, state.token!, value);
      state = markSubmitted(state, storyId);
    });
  },
  clarify(storyId, question) {
    act(() => api.clarify(state.sessionId!, storyId, state.token!, question));
  },
  reveal(storyId, override) {
    act(() => api.reveal(state.sessionId!, storyId, override));
  },
  commit(storyId) {
    act(() => api.commit(state.sessionId!, storyId));
  },
  startSprint() {
    act(() => api.startSprint(state.sessionId!));
  },
  revise(storyId, value, note) {
    act(async () => {
      await api.revise(state.sessionId!, storyId, state.token!, value, note);
      state = markRevised(state, storyId);
    });
  },
  recordActual(storyId, value) {
    act(() => api.recordActual(state.sessionId!, storyId, value));
  },
  score(storyId) {
    act(() => api.score(state.sessionId!, storyId));
  },
};

renderJoin(root, actions);
window.setInterval(() => {
  refresh().catch(() => {
    // transient poll failures resolve on the next tick
  });
}, POLL_MS);
