// Pure view-model: every screen decision lives here so it can be tested
// headlessly. The socket callback and user input both funnel through
// reduce(); rendering reads the result and nothing else.

import type {
  ClientFrame,
  CornerLegendEntry,
  ServerConfig,
  ServerFrame,
  Snapshot,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "live" | "reconnecting";

export interface ViewModel {
  status: ConnectionStatus;
  snapshot: Snapshot | null;
  legend: CornerLegendEntry[];
  ladder: string[];
  simWalkEnabled: boolean;
  lastError: string | null;
  droppedFrames: number; // malformed or stale frames ignored
}

export const DEFAULT_LEGEND: CornerLegendEntry[] = [
  { corner: 0, name: "NW", color: "blue", number: 1 },
  { corner: 1, name: "NE", color: "red", number: 2 },
  { corner: 2, name: "SW", color: "green", number: 3 },
  { corner: 3, name: "SE", color: "yellow", number: 4 },
];

export function initialViewModel(): ViewModel {
  return {
    status: "connecting",
    snapshot: null,
    legend: DEFAULT_LEGEND,
    ladder: [],
    simWalkEnabled: false,
    lastError: null,
    droppedFrames: 0,
  };
}

export function applyConfig(vm: ViewModel, config: ServerConfig): ViewModel {
  return {
    ...vm,
    legend: config.corners,
    ladder: config.ladder,
    simWalkEnabled: config.mode === "sim",
  };
}

/** Parse and fold one raw socket payload into the view model. */
export function reduceMessage(vm: ViewModel, raw: string): ViewModel {
  let frame: ServerFrame;
  try {
    frame = JSON.parse(raw) as ServerFrame;
    if (typeof frame !== "object" || frame === null || !("type" in frame)) {
      throw new Error("not a frame");
    }
  } catch {
    return { ...vm, droppedFrames: vm.droppedFrames + 1 };
  }
  if (frame.type === "error") {
    return { ...vm, lastError: frame.reason };
  }
  if (frame.type === "snapshot") {
    // never regress to a lower sequence number
    if (vm.snapshot !== null && frame.seq <= vm.snapshot.seq) {
      return { ...vm, droppedFrames: vm.droppedFrames + 1 };
    }
    return { ...vm, snapshot: frame };
  }
  return { ...vm, droppedFrames: vm.droppedFrames + 1 };
}

export function setStatus(vm: ViewModel, status: ConnectionStatus): ViewModel {
  return { ...vm, status };
}

/** The confirm control is interactable only while an answer is highlighted. */
export function confirmEnabled(vm: ViewModel): boolean {
  return vm.snapshot?.phase === "answer_highlighted";
}

export function advanceEnabled(vm: ViewModel): boolean {
  return vm.snapshot?.phase === "feedback";
}

export function resetEnabled(vm: ViewModel): boolean {
  const phase = vm.snapshot?.phase;
  return phase === "won" || phase === "game_over";
}

/** Legend entry for a screen corner; total and fixed per corner index. */
export function cornerLegend(vm: ViewModel, corner: number): CornerLegendEntry {
  return vm.legend[corner] ?? DEFAULT_LEGEND[corner];
}

/**
 * Where the position icon lands on an axis-aligned minimap of the given
 * pixel size. Same normalized space as the snapshot: x east, y south.
 */
export function iconPixelPosition(
  snapshot: Snapshot,
  width: number,
  height: number,
): { x: number; y: number } {
  return { x: snapshot.position.x * width, y: snapshot.position.y * height };
}

/** Grid cell of a normalized position, for cell-accuracy checks. */
export function positionCell(
  pos: { x: number; y: number },
  gridSize: number,
): { col: number; row: number } {
  const clamp = (v: number) => Math.min(Math.max(v, 0), 1 - 1e-9);
  return {
    col: Math.floor(clamp(pos.x) * gridSize),
    row: Math.floor(clamp(pos.y) * gridSize),
  };
}

/** Map a click inside the minimap to a move frame in normalized coords. */
export function minimapClickToMove(
  clickX: number,
  clickY: number,
  width: number,
  height: number,
): ClientFrame {
  const clamp01 = (v: number) => Math.min(Math.max(v, 0), 1);
  return {
    type: "move",
    x: clamp01(clickX / width),
    y: clamp01(clickY / height),
  };
}

/** Nudge the current move target with the arrow keys. */
export function nudgeMove(
  current: { x: number; y: number },
  key: string,
  step = 0.05,
): ClientFrame | null {
  const deltas: Record<string, [number, number]> = {
    ArrowLeft: [-step, 0],
    ArrowRight: [step, 0],
    ArrowUp: [0, -step],
    ArrowDown: [0, step],
  };
  const delta = deltas[key];
  if (!delta) return null;
  const clamp01 = (v: number) => Math.min(Math.max(v, 0), 1);
  return {
    type: "move",
    x: clamp01(current.x + delta[0]),
    y: clamp01(current.y + delta[1]),
  };
}
