// Panel geometry and drawing.  The highlight always comes from the last
// gui/panel_state message; nothing here predicts presses locally.

import type { PanelModel } from "./types.js";

export interface Viewport {
  width: number;
  height: number;
}

// uniform scale, centered; returns canvas px per mm and offsets
export function panelTransform(model: PanelModel, view: Viewport) {
  const [pw, ph] = model.panel_size_mm;
  const scale = Math.min(view.width / pw, view.height / ph);
  return {
    scale,
    ox: (view.width - pw * scale) / 2,
    oy: (view.height - ph * scale) / 2,
  };
}

export function mmToCanvas(
  model: PanelModel, view: Viewport, x_mm: number, y_mm: number,
): [number, number] {
  const t = panelTransform(model, view);
  return [t.ox + x_mm * t.scale, t.oy + y_mm * t.scale];
}

export function canvasToMm(
  model: PanelModel, view: Viewport, px: number, py: number,
): [number, number] {
  const t = panelTransform(model, view);
  return [(px - t.ox) / t.scale, (py - t.oy) / t.scale];
}

export function pressedButtonIds(model: PanelModel): number[] {
  return model.buttons.filter((b) => b.state === "pressed").map((b) => b.id);
}

// minimal slice of CanvasRenderingContext2D used by the draw routines,
// mockable in tests
export interface Draw2d {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  font: string;
  textAlign: CanvasTextAlign;
  textBaseline: CanvasTextBaseline;
  lineWidth: number;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillText(s: string, x: number, y: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  clearRect(x: number, y: number, w: number, h: number): void;
}

export function drawPanel(
  ctx: Draw2d, model: PanelModel, view: Viewport,
  cursor_mm: [number, number] | null, gesture: string,
): void {
  ctx.clearRect(0, 0, view.width, view.height);
  const t = panelTransform(model, view);
  ctx.fillStyle = "#1a202c";
  ctx.fillRect(t.ox, t.oy, model.panel_size_mm[0] * t.scale, model.panel_size_mm[1] * t.scale);
  for (const b of model.buttons) {
    const [x, y, w, h] = b.rect_mm;
    const [cx, cy] = mmToCanvas(model, view, x, y);
    ctx.fillStyle = b.color;
    ctx.fillRect(cx, cy, w * t.scale, h * t.scale);
    ctx.strokeStyle = "#0b0e14";
    ctx.lineWidth = 2;
    ctx.strokeRect(cx, cy, w * t.scale, h * t.scale);
    ctx.fillStyle = "#f7fafc";
    ctx.font = `${Math.round(14 * t.scale / 2)}px sans-serif`;
    ctx.textAlign = "center";
    ctx.textBaseline = "middle";
    ctx.fillText(b.label, cx + (w * t.scale) / 2, cy + (h * t.scale) / 2);
  }
  if (cursor_mm) {
    const [cx, cy] = mmToCanvas(model, view, cursor_mm[0], cursor_mm[1]);
    ctx.beginPath();
    ctx.arc(cx, cy, gesture === "one" ? 6 : 10, 0, Math.PI * 2);
    ctx.fillStyle = gesture === "one" ? "#f56565" : "#ecc94b";
    ctx.fill();
  }
}
