// DOM rendering. Every number on screen is read from the latest snapshot
// (or another API response body); nothing is derived locally.

import type { LeaderboardEntry, StoryView, VelocityPoint } from "./api.js";
import {
  RoomState,
  canRevise,
  formatRational,
  revealHistogram,
  scaleChoices,
  seatChecks,
  storyScreen,
} from "./store.js";

export interface Actions {
  join(name: string): void;
  addStory(role: string, fn: string, benefit: string): void;
  open(storyId: string): void;
  submit(storyId: string, value: string): void;
  clarify(storyId: string, question: string): void;
  reveal(storyId: string, override: boolean): void;
  commit(storyId: string): void;
  startSprint(): void;
  revise(storyId: string, value: string, note: string): void;
  recordActual(storyId: string, value: string): void;
  score(storyId: string): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function button(label: string, onClick: () => void, className = "action"): HTMLButtonElement {
  const node = el("button", className, label);
  node.addEventListener("click", onClick);
  return node;
}

export function renderError(root: HTMLElement, message: string | null): void {
  const banner = root.querySelector(".error-banner");
  if (banner) banner.remove();
  if (!message) return;
  const node = el("div", "error-banner", message);
  root.prepend(node);
}

export function renderJoin(root: HTMLElement, actions: Actions): void {
  root.replaceChildren();
  const panel = el("div", "join-panel");
  panel.append(el("h2", "", "Join the planning room"));
  const input = el("input");
  input.placeholder = "your name";
  const go = button("Join", () => actions.join(input.value));
  panel.append(input, go);
  root.append(panel);
}

function renderStory(state: RoomState, story: StoryView, actions: Actions): HTMLElement {
  const card = el("section", `story state-${story.state.toLowerCase()}`);
  card.dataset.storyId = story.story_id;
  card.append(
    el("h3", "", `As a ${story.role}, I want to ${story.function}` +
      (story.benefit ? ` so that I can ${story.benefit}` : "")),
    el("div", "meta", `sprint ${story.sprint} · ${story.state}`),
  );

  const screen = storyScreen(state, story);

  if (screen === "draft") {
    card.append(button("Open estimation", () => actions.open(story.story_id)));
    return card;
  }

  if (screen === "estimate" || screen === "sealed") {
    const seats = el("div", "seats");
    for (const submitted of seatChecks(story)) {
      seats.append(el("span", submitted ? "seat done" : "seat", submitted ? "✓" : "·"));
    }
    card.append(seats);

    if (screen === "estimate" && state.snapshot) {
      const picker = el("div", "picker");
      for (const value of scaleChoices(state.snapshot)) {
        picker.append(button(value, () => actions.submit(story.story_id, value), "scale-value"));
      }
      card.append(picker);
      const question = el("input");
      question.placeholder = "ask a clarification…";
      card.append(
        question,
        button("Ask", () => actions.clarify(story.story_id, question.value), "secondary"),
      );
    } else {
      card.append(
        el("div", "sealed-notice", "Your estimate is sealed — submissions are irreversible."),
      );
    }
    for (const clarification of story.clarifications) {
      card.append(el("div", "clarification", `❓ ${clarification.question}`));
    }
    card.append(button("Reveal", () => actions.reveal(story.story_id, false), "secondary"));
    card.append(button("Reveal (override quorum)", () => actions.reveal(story.story_id, true), "ghost"));
    return card;
  }

  if (screen === "reveal" && story.reveal) {
    if (story.reveal.inconsistency) {
      card.append(
        el("div", "inconsistency", "Estimates diverge widely — discuss before committing."),
      );
    }
    const chart = el("div", "histogram");
    for (const bar of revealHistogram(story.reveal)) {
      const row = el("div", "bar-row");
      row.append(el("span", "bar-label", bar.value));
      const bar_ = el("span", "bar");
      bar_.style.width = `${bar.count * 48}px`;
      bar_.textContent = "×" + String(bar.count);
      row.append(bar_);
      chart.append(row);
    }
    card.append(chart, button("Commit second-highest", () => actions.commit(story.story_id)));
    return card;
  }

  if (screen === "commit") {
    card.append(
      el(
        "div",
        "final",
        `Final estimate: ${story.final_estimate === null ? "?" : formatRational(story.final_estimate)} — ` +
          "the second-highest sealed bid, so one extreme outlier cannot move it.",
      ),
      button("Start sprint", () => actions.startSprint()),
    );
    return card;
  }

  if (screen === "in-progress") {
    if (canRevise(state, story) && state.snapshot) {
      const note = el("input");
      note.placeholder = "what changed?";
      const picker = el("div", "picker");
      for (const value of scaleChoices(state.snapshot)) {
        picker.append(
          button(value, () => actions.revise(story.story_id, value, note.value), "scale-value"),
        );
      }
      card.append(el("div", "revise-label", "Revise your estimate (original is kept):"), picker, note);
    }
    const actual = el("input");
    actual.placeholder = "actual effort";
    card.append(actual, button("Record actual", () => actions.recordActual(story.story_id, actual.value)));
    return card;
  }

  if (screen === "done") {
    card.append(
      el("div", "meta", `Actual effort: ${story.actual === null ? "?" : formatRational(story.actual)}`),
      button("Score", () => actions.score(story.story_id)),
    );
    return card;
  }

  if (screen === "scored" && story.scores) {
    const table = el("table", "scores");
    const head = el("tr");
    for (const label of ["participant", "accuracy", "team", "contribution", "adaptability", "total"]) {
      head.append(el("th", "", label));
    }
    table.append(head);
    const names = new Map(
      (state.snapshot?.participants ?? []).map((p) => [p.participant_id, p.display_name]),
    );
    for (const [pid, score] of Object.entries(story.scores)) {
      const row = el("tr");
      row.append(el("td", "", names.get(pid) ?? pid));
      for (const cell of [
        score.accuracy_points,
        score.stag_points,
        score.contribution_points,
        score.adaptability_bonus,
        score.total,
      ]) {
        row.append(el("td", "", String(cell)));
      }
      table.append(row);
    }
    card.append(table);
    return card;
  }

  return card;
}

export function renderRoom(
  root: HTMLElement,
  state: RoomState,
  leaderboard: LeaderboardEntry[],
  velocity: VelocityPoint[],
  actions: Actions,
): void {
  const snapshot = state.snapshot;
  if (!snapshot) return;
  root.replaceChildren();

  const header = el("header");
  header.append(
    el("h1", "", `Room ${snapshot.session_id}`),
    el(
      "div",
      "meta",
      `sprint ${snapshot.sprint_counter} · v${snapshot.version} · you are ${state.displayName ?? "?"}`,
    ),
  );
  root.append(header);

  const main = el("main");
  const backlog = el("div", "backlog");
  const form = el("div", "add-story");
  const role = el("input");
  role.placeholder = "as a (role)";
  const fn = el("input");
  fn.placeholder = "I want to (function)";
  const benefit = el("input");
  benefit.placeholder = "so that I can (benefit)";
  form.append(
    role,
    fn,
    benefit,
    button("Add story", () => actions.addStory(role.value, fn.value, benefit.value)),
  );
  backlog.append(form);
  for (const story of snapshot.stories) {
    backlog.append(renderStory(state, story, actions));
  }
  main.append(backlog);

  const side = el("aside");
  const board = el("div", "leaderboard");
  board.append(el("h2", "", "Leaderboard"));
  for (const entry of leaderboard) {
    const row = el("div", "entry");
    row.append(
      el("span", "name", entry.display_name),
      el("span", "points", `${entry.cumulative_points} pts · ${entry.stories_scored} scored`),
    );
    board.append(row);
  }
  side.append(board);

  const velocityBox = el("div", "velocity");
  velocityBox.append(el("h2", "", "Velocity"));
  for (const point of velocity) {
    const row = el("div", "bar-row");
    row.append(el("span", "bar-label", `sprint ${point.sprint}`));
    const bar = el("span", "bar");
    const width = Number(formatRational(point.completed_points));
    bar.style.width = `${Math.max(width, 1) * 8}px`;
    bar.textContent = formatRational(point.completed_points);
    row.append(bar);
    velocityBox.append(row);
  }
  side.append(velocityBox);
  main.append(side);
  root.append(main);
}
