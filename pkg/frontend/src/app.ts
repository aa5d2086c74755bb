// Operator console wiring: pointer = fingertip, button/space = gesture
// toggle, all state rendered straight from bus messages.

import { BusClient } from "./bus.js";
import { canvasToMm, drawPanel } from "./panel.js";
import { drawChain } from "./robotview.js";
import { drawFingertip } from "./hapticview.js";
import { drawScene } from "./sceneview.js";
import { SUBSCALES, formatScore, rawScore, validateTlx, TlxValues } from "./tlx.js";
import type { ContactMsg, GestureName, PanelModel, RobotStateMsg, SceneMsg } from "./types.js";

const CURSOR_RATE_HZ = 30;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function ctx2d(canvas: HTMLCanvasElement) {
  const c = canvas.getContext("2d");
  if (!c) throw new Error("no 2d context");
  return c;
}

const banner = el<HTMLDivElement>("banner");
const timerEl = el<HTMLSpanElement>("timer");
const gestureEl = el<HTMLSpanElement>("gesture-state");
const panelCanvas = el<HTMLCanvasElement>("panel");
const topCanvas = el<HTMLCanvasElement>("robot-top");
const sideCanvas = el<HTMLCanvasElement>("robot-side");
const thumbCanvas = el<HTMLCanvasElement>("haptic-thumb");
const indexCanvas = el<HTMLCanvasElement>("haptic-index");
const sceneCanvas = el<HTMLCanvasElement>("scene");
const jointsEl = el<HTMLDivElement>("joints");

let panelModel: PanelModel | null = null;
let robotState: RobotStateMsg | null = null;
let contact: ContactMsg | null = null;
let scene: SceneMsg | null = null;
let cursorMm: [number, number] | null = null;
let gesture: GestureName = "palm";
let sessionStart: number | null = null;

const wsUrl = `ws://${location.host}/`;
const bus = new BusClient(wsUrl, {
  onStatus: (status) => {
    banner.textContent =
      status === "connected" ? "" : `bus ${status}… retrying`;
    banner.style.display = status === "connected" ? "none" : "block";
    if (status === "connected" && sessionStart === null) {
      sessionStart = Date.now();
    }
  },
});

bus.on("gui/panel_state", (data: PanelModel) => {
  panelModel = data;
});
bus.on("robot/state", (data: RobotStateMsg) => {
  robotState = data;
});
bus.on("haptics/contact", (data: ContactMsg) => {
  contact = data;
});
bus.on("scene/state", (data: SceneMsg) => {
  scene = data;
});
bus.connect();

// -- pointer -> panel-space cursor -------------------------------------------
panelCanvas.addEventListener("pointermove", (ev) => {
  if (!panelModel) return;
  const rect = panelCanvas.getBoundingClientRect();
  cursorMm = canvasToMm(
    panelModel,
    { width: panelCanvas.width, height: panelCanvas.height },
    ((ev.clientX - rect.left) / rect.width) * panelCanvas.width,
    ((ev.clientY - rect.top) / rect.height) * panelCanvas.height,
  );
});
panelCanvas.addEventListener("pointerleave", () => {
  cursorMm = null;
});

function setGesture(g: GestureName) {
  gesture = g;
  gestureEl.textContent = g === "one" ? "One (pressing)" : "Palm (hovering)";
}
panelCanvas.addEventListener("pointerdown", () => setGesture("one"));
panelCanvas.addEventListener("pointerup", () => setGesture("palm"));
document.addEventListener("keydown", (ev) => {
  if (ev.code === "Space") {
    ev.preventDefault();
    setGesture("one");
  }
});
document.addEventListener("keyup", (ev) => {
  if (ev.code === "Space") setGesture("palm");
});

// cursor publication at a steady 30 Hz
setInterval(() => {
  if (cursorMm) {
    bus.publish("ui/cursor", {
      x_mm: cursorMm[0],
      y_mm: cursorMm[1],
      gesture,
    });
  }
}, 1000 / CURSOR_RATE_HZ);

// -- recorded landmark playback ----------------------------------------------
el<HTMLInputElement>("playback").addEventListener("change", async (ev) => {
  const input = ev.target as HTMLInputElement;
  const file = input.files?.[0];
  if (!file) return;
  const lines = (await file.text()).split("\n").filter((l) => l.trim());
  let i = 0;
  const timer = setInterval(() => {
    if (i >= lines.length) {
      clearInterval(timer);
      input.value = "";
      return;
    }
    try {
      bus.publish("hand/frames", JSON.parse(lines[i]));
    } catch {
      clearInterval(timer);
    }
    i += 1;
  }, 1000 / CURSOR_RATE_HZ);
});

// -- TLX form ------------------------------------------------------------------
const tlxStatus = el<HTMLDivElement>("tlx-status");
el<HTMLButtonElement>("tlx-submit").addEventListener("click", () => {
  const values: TlxValues = {};
  for (const name of SUBSCALES) {
    const field = el<HTMLInputElement>(`tlx-${name}`);
    values[name] = field.value === "" ? null : Number(field.value);
  }
  const errors = validateTlx(values);
  if (errors.length) {
    tlxStatus.textContent = errors.join("; ");
    tlxStatus.className = "error";
    return;
  }
  const subject = el<HTMLInputElement>("tlx-subject").value || "anonymous";
  bus.publish("study/tlx", { subject, ...values });
  tlxStatus.textContent = `submitted, raw score ${formatScore(rawScore(values))}`;
  tlxStatus.className = "ok";
});
for (const name of SUBSCALES) {
  el<HTMLInputElement>(`tlx-${name}`).addEventListener("input", () => {
    const values: TlxValues = {};
    for (const n of SUBSCALES) {
      const field = el<HTMLInputElement>(`tlx-${n}`);
      values[n] = field.value === "" ? null : Number(field.value);
    }
    if (validateTlx(values).length === 0) {
      el<HTMLSpanElement>("tlx-preview").textContent = formatScore(rawScore(values));
    }
  });
}

// -- render loop ----------------------------------------------------------------
function render() {
  if (panelModel) {
    drawPanel(
      ctx2d(panelCanvas), panelModel,
      { width: panelCanvas.width, height: panelCanvas.height },
      cursorMm, gesture,
    );
  }
  if (robotState) {
    drawChain(ctx2d(topCanvas) as any, robotState.links, "top",
              { width: topCanvas.width, height: topCanvas.height });
    drawChain(ctx2d(sideCanvas) as any, robotState.links, "side",
              { width: sideCanvas.width, height: sideCanvas.height });
    jointsEl.textContent = robotState.joints
      .map((q, i) => `q${i + 1} ${(q * 180 / Math.PI).toFixed(1)}°`)
      .join("  ") +
      `   gripper ${robotState.gripper.opening_mm.toFixed(0)} mm` +
      (robotState.gripper.holding ? ` (${robotState.gripper.holding})` : "");
  }
  const thumbView = { width: thumbCanvas.width, height: thumbCanvas.height };
  const indexView = { width: indexCanvas.width, height: indexCanvas.height };
  drawFingertip(ctx2d(thumbCanvas) as any, "thumb",
                contact?.thumb.s ?? 0.5, contact?.thumb.f ?? 0, thumbView);
  drawFingertip(ctx2d(indexCanvas) as any, "index",
                contact?.index.s ?? 0.5, contact?.index.f ?? 0, indexView);
  if (scene) {
    drawScene(ctx2d(sceneCanvas), scene,
              { width: sceneCanvas.width, height: sceneCanvas.height });
  }
  if (sessionStart !== null) {
    const s = Math.floor((Date.now() - sessionStart) / 1000);
    timerEl.textContent = `${Math.floor(s / 60)}:${String(s % 60).padStart(2, "0")}`;
  }
  requestAnimationFrame(render);
}
requestAnimationFrame(render);
