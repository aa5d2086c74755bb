// Fill-level bars for the two containers and the box.

import type { Draw2d, Viewport } from "./panel.js";
import type { SceneMsg } from "./types.js";

export interface Bar {
  label: string;
  fraction: number;
  capacity: number;
}

export function sceneBars(scene: SceneMsg): Bar[] {
  const bars: Bar[] = scene.containers.map((c) => ({
    label: c.id,
    fraction: c.fill_fraction,
    capacity: 1,
  }));
  bars.push({ label: "box", fraction: scene.box.content_fraction, capacity: 2 });
  return bars;
}

export function barGeometry(bars: Bar[], view: Viewport) {
  const gap = 12;
  const w = (view.width - gap * (bars.length + 1)) / bars.length;
  return bars.map((b, i) => {
    const h = (view.height - 30) * Math.min(b.fraction / b.capacity, 1);
    return {
      x: gap + i * (w + gap),
      y: view.height - 18 - h,
      w,
      h,
      label: b.label,
      fraction: b.fraction,
    };
  });
}

export function drawScene(ctx: Draw2d, scene: SceneMsg, view: Viewport): void {
  ctx.clearRect(0, 0, view.width, view.height);
  for (const g of barGeometry(sceneBars(scene), view)) {
    ctx.strokeStyle = "#4a5568";
    ctx.lineWidth = 1.5;
    ctx.strokeRect(g.x, 12, g.w, view.height - 30);
    ctx.fillStyle = scene.pouring ? "#f6ad55" : "#68d391";
    ctx.fillRect(g.x, g.y, g.w, g.h);
    ctx.fillStyle = "#cbd5e0";
    ctx.font = "11px sans-serif";
    ctx.textAlign = "center";
    ctx.textBaseline = "bottom";
    ctx.fillText(`${g.label} ${(g.fraction).toFixed(2)}`, g.x + g.w / 2, view.height - 4);
  }
}
