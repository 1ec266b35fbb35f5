// Live-loop integration: spawn the real sim-mode server, walk a scripted
// client to a corner over the actual WebSocket, confirm, and check that
// the snapshot stream passes through question_shown -> answer_highlighted
// -> feedback.

import { afterAll, beforeAll, expect, it } from "vitest";
import { spawn, ChildProcess } from "node:child_process";
import { createServer } from "node:net";
import { mkdtemp, writeFile, rm } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import WebSocket from "ws";

import type { Snapshot } from "../src/protocol.js";
import { GameSocket, SocketLike } from "../src/socket.js";
import { initialViewModel, reduceMessage } from "../src/viewmodel.js";

const PYTHON = process.env.PYTHON ?? "python3";

let child: ChildProcess | null = null;
let baseUrl = "";
let workDir = "";

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port"));
        return;
      }
      const port = address.port;
      server.close(() => resolve(port));
    });
  });
}

async function waitForHealthz(url: string, timeoutMs = 20000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${url}/healthz`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error("server did not come up");
}

beforeAll(async () => {
  workDir = await mkdtemp(join(tmpdir(), "beaconquiz-ui-"));
  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  const configPath = join(workDir, "config.json");
  await writeFile(
    configPath,
    JSON.stringify({
      mode: "sim",
      seed: 12,
      listen: `127.0.0.1:${port}`,
      tick_rate_hz: 50,
      walk_speed_mps: 6.0,
      feedback_auto_advance_ms: 0,
      shuffle_answers: false,
      room: {
        propagation: { noise_sigma_db: 0.0 },
        beacons: [0, 1, 2, 3].map((id) => ({ id, advertise_interval_ms: 50 })),
      },
    }),
  );
  child = spawn(PYTHON, ["-m", "beaconquiz.cli", "serve", "--config", configPath], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  await waitForHealthz(baseUrl);
}, 30000);

afterAll(async () => {
  child?.kill("SIGINT");
  await new Promise((r) => setTimeout(r, 300));
  child?.kill("SIGKILL");
  if (workDir) await rm(workDir, { recursive: true, force: true });
});

it(
  "walks to a corner, confirms, and sees the phase sequence",
  async () => {
    const config = await (await fetch(`${baseUrl}/config`)).json();
    expect(config.mode).toBe("sim");
    expect(config.corners).toHaveLength(4);

    let vm = initialViewModel();
    const seenPhases: string[] = [];
    const seqs: number[] = [];
    let confirmed = false;

    const done = new Promise<void>((resolve, reject) => {
      const timer = setTimeout(
        () => reject(new Error(`timed out; saw ${seenPhases.join(",")}`)),
        25000,
      );
      const socket = new GameSocket({
        url: `ws://127.0.0.1:${new URL(baseUrl).port}/ws`,
        onStatus: () => {},
        socketFactory: (url) => new WebSocket(url) as unknown as SocketLike,
        onMessage: (raw) => {
          vm = reduceMessage(vm, raw);
          const snap = vm.snapshot as Snapshot | null;
          if (!snap) return;
          if (seenPhases[seenPhases.length - 1] !== snap.phase) {
            seenPhases.push(snap.phase);
          }
          seqs.push(snap.seq);
          if (snap.phase === "question_shown" && seenPhases.length === 1) {
            socket.send({ type: "move", x: 0.95, y: 0.95 });
          }
          if (snap.phase === "answer_highlighted" && snap.highlighted === 3 && !confirmed) {
            confirmed = true;
            socket.send({ type: "confirm" });
          }
          if (snap.phase === "feedback") {
            clearTimeout(timer);
            socket.close();
            resolve();
          }
        },
      });
      socket.connect();
    });

    await done;

    const shown = seenPhases.indexOf("question_shown");
    const highlighted = seenPhases.indexOf("answer_highlighted");
    const feedback = seenPhases.indexOf("feedback");
    expect(shown).toBeGreaterThanOrEqual(0);
    expect(highlighted).toBeGreaterThan(shown);
    expect(feedback).toBeGreaterThan(highlighted);
    // monotone seq stream all the way through
    expect(seqs.every((seq, i) => i === 0 || seq > seqs[i - 1])).toBe(true);
  },
  30000,
);
