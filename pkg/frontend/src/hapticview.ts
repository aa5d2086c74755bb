// Two fingertip diagrams; the contact dot position tracks s, its radius
// tracks f, and both always stay inside the diagram outline.

import type { Draw2d, Viewport } from "./panel.js";

export interface DotGeometry {
  x: number;
  y: number;
  r: number;
}

const MIN_R = 3;

export function dotGeometry(
  s: number, f: number, view: Viewport,
): DotGeometry {
  const cs = Math.min(Math.max(s, 0), 1);
  const cf = Math.min(Math.max(f, 0), 1);
  const maxR = Math.min(view.width, view.height) * 0.18;
  const r = MIN_R + cf * (maxR - MIN_R);
  // dot center is confined so the full disc stays inside the viewport
  const x = r + cs * (view.width - 2 * r);
  const y = view.height / 2;
  return { x, y, r };
}

export function drawFingertip(
  ctx: Draw2d & { ellipse?: unknown; stroke(): void },
  label: string, s: number, f: number, view: Viewport,
): void {
  ctx.clearRect(0, 0, view.width, view.height);
  ctx.strokeStyle = "#4a5568";
  ctx.lineWidth = 2;
  ctx.strokeRect(1, 1, view.width - 2, view.height - 2);
  ctx.fillStyle = "#cbd5e0";
  ctx.font = "12px sans-serif";
  ctx.textAlign = "left";
  ctx.textBaseline = "top";
  ctx.fillText(label, 6, 4);
  const dot = dotGeometry(s, f, view);
  ctx.beginPath();
  ctx.arc(dot.x, dot.y, dot.r, 0, Math.PI * 2);
  ctx.fillStyle = f > 0 ? "#68d391" : "#2d3748";
  ctx.fill();
}
