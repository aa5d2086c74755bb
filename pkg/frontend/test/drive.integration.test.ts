// Full drive-through against a live core: spawn the broker stack, emulate
// the console's pointer logic over the real WebSocket endpoint, then diff
// the recorded core log against an equivalent headless run.

import { spawn, execFile } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";

import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { BusClient } from "../src/bus.js";

const execFileP = promisify(execFile);

const TCP_PORT = 7742;
const WS_PORT = 7743;
const WS_URL = `ws://127.0.0.1:${WS_PORT}/`;

const tmp = mkdtempSync(join(tmpdir(), "cobot-ui-"));
const UI_LOG = join(tmp, "ui_session.jsonl");

let serveProc: ReturnType<typeof spawn>;

function sleep(ms: number) {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

function wsFactory(url: string) {
  return new WebSocket(url) as any;
}

async function connectedClient(): Promise<BusClient> {
  const client = new BusClient(WS_URL, { wsFactory });
  client.connect();
  for (let i = 0; i < 100; i++) {
    if (client.status === "connected") return client;
    await sleep(100);
  }
  throw new Error("broker did not come up");
}

interface LogMessage {
  topic: string;
  seq: number;
  data: any;
}

function readLog(path: string): LogMessage[] {
  return readFileSync(path, "utf-8")
    .split("\n")
    .filter((l) => l.trim())
    .slice(1) // header line
    .map((l) => JSON.parse(l));
}

// ordered press/release/trigger-edge sequence: the topology both kinds of
// session must share regardless of clocking
function eventTopology(messages: LogMessage[]): string[] {
  const events: string[] = [];
  let triggerActive = false;
  for (const m of messages) {
    if (m.topic === "gui/button_events") {
      events.push(`${m.data.kind}:${m.data.action}`);
    } else if (m.topic === "haptics/trigger") {
      if (m.data.active && !triggerActive) {
        events.push(`trigger_on:${m.data.direction}`);
        triggerActive = true;
      } else if (!m.data.active && triggerActive) {
        events.push("trigger_off");
        triggerActive = false;
      }
    }
  }
  return events;
}

beforeAll(async () => {
  serveProc = spawn("cobot", [
    "--tcp-port", String(TCP_PORT), "--ws-port", String(WS_PORT),
    "serve", "--clock", "wall", "--log", UI_LOG,
    "--tlx-csv", join(tmp, "tlx.csv"),
  ], { stdio: "ignore" });
  await sleep(1500);
}, 30000);

afterAll(async () => {
  if (serveProc && serveProc.exitCode === null) {
    serveProc.kill("SIGTERM");
    await sleep(1000);
  }
});

describe("operator console drive-through", () => {
  it("drives the core and matches a headless scenario's topology", async () => {
    const client = await connectedClient();

    const robotStates: any[] = [];
    const contacts: any[] = [];
    const buttonEvents: any[] = [];
    client.on("robot/state", (d) => robotStates.push(d));
    client.on("haptics/contact", (d) => contacts.push(d));
    client.on("gui/button_events", (d) => buttonEvents.push(d));
    await sleep(300);

    // rotate button center on the default 300x200 panel: column 3, row 3
    const cursor = { x_mm: 246.666, y_mm: 163.333 };

    // pointer logic exactly as the app publishes it: 30 Hz cursor frames
    const publishCursor = (gesture: string) =>
      client.publish("ui/cursor", { ...cursor, gesture });
    const emit = async (gesture: string, ms: number) => {
      const end = Date.now() + ms;
      while (Date.now() < end) {
        publishCursor(gesture);
        await sleep(1000 / 30);
      }
    };

    await emit("palm", 300);   // hover arms the button
    const wristBefore = robotStates.at(-1)?.joints[5] ?? 0;
    await emit("one", 600);    // press and hold
    const wristDuringHold = robotStates.at(-1)?.joints[5] ?? 0;
    await emit("palm", 300);   // release
    await sleep(400);

    // press/release arrived and carried the Rotate action
    const kinds = buttonEvents.map((e) => `${e.kind}:${e.action}`);
    expect(kinds).toContain("press:Rotate");
    expect(kinds).toContain("release:Rotate");

    // the wrist turned while held, and stopped after release
    expect(wristDuringHold).toBeGreaterThan(wristBefore + 0.1);
    const wristAfterRelease = robotStates.at(-1)?.joints[5] ?? 0;
    await sleep(300);
    const wristFinal = robotStates.at(-1)?.joints[5] ?? 0;
    expect(Math.abs(wristFinal - wristAfterRelease)).toBeLessThan(1e-9);

    // haptic contact animated with opposed sliding (clockwise cue)
    expect(contacts.length).toBeGreaterThan(5);
    const first = contacts[0];
    const last = contacts.at(-1);
    expect(first.pattern).toBe(7);
    expect(last.thumb.s - first.thumb.s).toBeGreaterThan(0.05);
    expect(last.index.s - first.index.s).toBeLessThan(-0.05);

    // contact stream stops once released
    const countAtRelease = contacts.length;
    await sleep(300);
    expect(contacts.length).toBe(countAtRelease);

    client.close();

    // shut the stack down so the core log lands on disk
    serveProc.kill("SIGTERM");
    await new Promise((resolve) => serveProc.once("exit", resolve));

    // equivalent headless scenario
    const scenarioPath = join(tmp, "rotate_once.json");
    writeFileSync(scenarioPath, JSON.stringify({
      name: "rotate_once",
      seed: 1,
      steps: [{ action: "press_button", button: 9, hold_s: 0.6 }],
    }));
    const headlessLog = join(tmp, "headless.jsonl");
    await execFileP("cobot", ["run", scenarioPath, "--log", headlessLog]);

    const uiTopology = eventTopology(readLog(UI_LOG));
    const headlessTopology = eventTopology(readLog(headlessLog));
    expect(uiTopology).toEqual([
      "press:Rotate", "trigger_on:cw", "release:Rotate", "trigger_off",
    ]);
    expect(headlessTopology).toEqual(uiTopology);
  }, 60000);
});
