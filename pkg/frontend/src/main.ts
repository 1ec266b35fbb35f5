import type { ServerConfig } from "./protocol.js";
import { GameSocket } from "./socket.js";
import { grabScreen, render } from "./render.js";
import {
  applyConfig,
  initialViewModel,
  minimapClickToMove,
  nudgeMove,
  reduceMessage,
  setStatus,
  ViewModel,
} from "./viewmodel.js";

let vm: ViewModel = initialViewModel();
let moveTarget = { x: 0.5, y: 0.5 };

function update(next: ViewModel, screen: ReturnType<typeof grabScreen>): void {
  vm = next;
  render(vm, screen);
}

async function boot(): Promise<void> {
  const screen = grabScreen(document);

  try {
    const resp = await fetch("/config");
    if (resp.ok) {
      const config = (await resp.json()) as ServerConfig;
      update(applyConfig(vm, config), screen);
    }
  } catch {
    // config is a nicety; the snapshot stream carries the essentials
  }

  const wsProtocol = location.protocol === "https:" ? "wss:" : "ws:";
  const socket = new GameSocket({
    url: `${wsProtocol}//${location.host}/ws`,
    onMessage: (raw) => update(reduceMessage(vm, raw), screen),
    onStatus: (status) => update(setStatus(vm, status), screen),
  });
  socket.connect();

  screen.confirmButton.addEventListener("click", () => {
    socket.send({ type: "confirm" });
  });
  screen.advanceButton.addEventListener("click", () => {
    socket.send({ type: "advance" });
  });
  screen.resetButton.addEventListener("click", () => {
    socket.send({ type: "reset" });
  });

  screen.minimap.addEventListener("click", (event) => {
    if (!vm.simWalkEnabled) return;
    const rect = screen.minimap.getBoundingClientRect();
    const frame = minimapClickToMove(
      event.clientX - rect.left,
      event.clientY - rect.top,
      rect.width,
      rect.height,
    );
    if (frame.type === "move") {
      moveTarget = { x: frame.x, y: frame.y };
    }
    socket.send(frame);
  });

  window.addEventListener("keydown", (event) => {
    if (!vm.simWalkEnabled) return;
    const frame = nudgeMove(moveTarget, event.key);
    if (frame && frame.type === "move") {
      moveTarget = { x: frame.x, y: frame.y };
      socket.send(frame);
      event.preventDefault();
    }
  });

  render(vm, screen);
}

boot();
