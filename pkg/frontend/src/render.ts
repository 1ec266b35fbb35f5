// DOM rendering: reads the view model, writes the screen. No game logic.

import type { ViewModel } from "./viewmodel.js";
import {
  advanceEnabled,
  confirmEnabled,
  cornerLegend,
  resetEnabled,
} from "./viewmodel.js";

export interface Screen {
  status: HTMLElement;
  question: HTMLElement;
  progress: HTMLElement;
  answers: HTMLElement[]; // indexed by corner
  confirmButton: HTMLButtonElement;
  advanceButton: HTMLButtonElement;
  resetButton: HTMLButtonElement;
  ladder: HTMLElement;
  minimap: HTMLElement;
  positionIcon: HTMLElement;
  banner: HTMLElement;
}

export function grabScreen(root: Document): Screen {
  const byId = (id: string) => {
    const el = root.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el;
  };
  return {
    status: byId("status"),
    question: byId("question"),
    progress: byId("progress"),
    answers: [0, 1, 2, 3].map((k) => byId(`answer-${k}`)),
    confirmButton: byId("confirm") as HTMLButtonElement,
    advanceButton: byId("advance") as HTMLButtonElement,
    resetButton: byId("reset") as HTMLButtonElement,
    ladder: byId("ladder"),
    minimap: byId("minimap"),
    positionIcon: byId("position-icon"),
    banner: byId("banner"),
  };
}

const PHASE_BANNERS: Record<string, string> = {
  idle: "Get ready...",
  won: "You won the million!",
  game_over: "Game over!",
};

export function render(vm: ViewModel, screen: Screen): void {
  screen.status.textContent = vm.status;
  screen.status.className = `status status-${vm.status}`;

  const snap = vm.snapshot;
  if (!snap) {
    screen.question.textContent = "Waiting for the game server...";
    return;
  }

  if (snap.question) {
    screen.question.textContent = snap.question.text;
    screen.progress.textContent =
      `Question ${snap.question.index + 1} of ${snap.question.total}`;
  } else {
    screen.question.textContent = "";
    screen.progress.textContent = "";
  }

  const feedback = snap.feedback;
  for (let corner = 0; corner < 4; corner++) {
    const el = screen.answers[corner];
    const legend = cornerLegend(vm, corner);
    const answer = snap.answers?.[corner];
    el.textContent = answer ? `${legend.number}. ${answer.text}` : "";
    el.style.setProperty("--corner-color", legend.color);
    el.classList.toggle("highlighted", snap.highlighted === corner);
    el.classList.toggle(
      "correct",
      feedback !== null && feedback.correct_corner === corner,
    );
    el.classList.toggle(
      "wrong",
      feedback !== null && !feedback.correct && feedback.corner === corner,
    );
  }

  screen.confirmButton.disabled = !confirmEnabled(vm);
  screen.advanceButton.disabled = !advanceEnabled(vm);
  screen.resetButton.disabled = !resetEnabled(vm);

  screen.positionIcon.style.left = `${snap.position.x * 100}%`;
  screen.positionIcon.style.top = `${snap.position.y * 100}%`;

  renderLadder(vm, screen);

  const banner = PHASE_BANNERS[snap.phase];
  if (banner) {
    screen.banner.textContent = banner;
  } else if (feedback) {
    screen.banner.textContent = feedback.correct ? "Correct!" : "Wrong answer";
  } else {
    screen.banner.textContent = vm.lastError ?? "";
  }
}

function renderLadder(vm: ViewModel, screen: Screen): void {
  const snap = vm.snapshot;
  const rungs = vm.ladder;
  if (!snap || rungs.length === 0) {
    screen.ladder.textContent = "";
    return;
  }
  // topmost rung is the biggest prize
  const items = rungs
    .map((label, i) => {
      const reached = i < snap.score_level;
      const current = i === snap.score_level - 1;
      const cls = current ? "rung current" : reached ? "rung reached" : "rung";
      return `<li class="${cls}">${escapeHtml(label)}</li>`;
    })
    .reverse()
    .join("");
  screen.ladder.innerHTML = `<ol reversed>${items}</ol>`;
}

function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;");
}
