// Orthographic top (x,y) and side (x,z) projections of the kinematic chain,
// drawn from the link endpoints the core publishes in robot/state.

import type { Draw2d, Viewport } from "./panel.js";

export interface Bounds {
  min: [number, number];
  max: [number, number];
}

export function chainBounds(points2d: [number, number][], pad = 0.15): Bounds {
  let minX = Infinity, minY = Infinity, maxX = -Infinity, maxY = -Infinity;
  for (const [x, y] of points2d) {
    minX = Math.min(minX, x); maxX = Math.max(maxX, x);
    minY = Math.min(minY, y); maxY = Math.max(maxY, y);
  }
  const spanX = Math.max(maxX - minX, 0.1);
  const spanY = Math.max(maxY - minY, 0.1);
  return {
    min: [minX - pad * spanX, minY - pad * spanY],
    max: [maxX + pad * spanX, maxY + pad * spanY],
  };
}

export function fitToView(b: Bounds, view: Viewport) {
  const spanX = b.max[0] - b.min[0];
  const spanY = b.max[1] - b.min[1];
  const scale = Math.min(view.width / spanX, view.height / spanY);
  return (x: number, y: number): [number, number] => [
    (x - b.min[0]) * scale + (view.width - spanX * scale) / 2,
    // canvas y grows downward
    view.height - ((y - b.min[1]) * scale + (view.height - spanY * scale) / 2),
  ];
}

export function projectLinks(
  links: number[][], plane: "top" | "side",
): [number, number][] {
  return links.map((p) => (plane === "top" ? [p[0], p[1]] : [p[0], p[2]]));
}

export function drawChain(
  ctx: Draw2d & {
    moveTo(x: number, y: number): void;
    lineTo(x: number, y: number): void;
    stroke(): void;
  },
  links: number[][], plane: "top" | "side", view: Viewport, bounds?: Bounds,
): void {
  ctx.clearRect(0, 0, view.width, view.height);
  const pts = projectLinks(links, plane);
  const map = fitToView(bounds ?? chainBounds(pts), view);
  ctx.strokeStyle = "#63b3ed";
  ctx.lineWidth = 3;
  ctx.beginPath();
  pts.forEach(([x, y], i) => {
    const [cx, cy] = map(x, y);
    if (i === 0) ctx.moveTo(cx, cy);
    else ctx.lineTo(cx, cy);
  });
  ctx.stroke();
  for (const [i, [x, y]] of pts.entries()) {
    const [cx, cy] = map(x, y);
    ctx.beginPath();
    ctx.arc(cx, cy, i === pts.length - 1 ? 5 : 3, 0, Math.PI * 2);
    ctx.fillStyle = i === pts.length - 1 ? "#f56565" : "#a0aec0";
    ctx.fill();
  }
}
