// Top-down canvas rendering of the planar scene: robot, trail, props, the
// command/assist arrows, the arbitration gauge and its sparkline.

import { Frame, Scene } from "./protocol.js";
import { ClientView } from "./state.js";

const COLORS = {
  background: "#11151a",
  workspace: "#1c232b",
  grid: "#28313b",
  robot: "#f5f7fa",
  trail: "rgba(245,247,250,0.35)",
  human: "#46d46a",
  assist: "#4aa8ff",
  goal: "#e0b63c",
  skill: "#b07be0",
  text: "#c8d2dc",
};

export interface Mapper {
  toCanvas(p: number[]): [number, number];
  scale: number;
}

export function makeMapper(scene: Scene, width: number, height: number, margin = 30): Mapper {
  const [lx, ly] = scene.workspace.low;
  const [hx, hy] = scene.workspace.high;
  const sx = (width - 2 * margin) / (hx - lx);
  const sy = (height - 2 * margin) / (hy - ly);
  const scale = Math.min(sx, sy);
  return {
    scale,
    toCanvas(p: number[]): [number, number] {
      // world y points up, canvas y points down
      return [margin + (p[0] - lx) * scale, height - margin - (p[1] - ly) * scale];
    },
  };
}

export function betaColor(beta: number, betaMax: number): string {
  const t = Math.max(0, Math.min(1, betaMax > 0 ? beta / betaMax : 0));
  const hue = Math.round(t * 120); // red (human) to green (autonomous)
  return `hsl(${hue},75%,55%)`;
}

function arrow(ctx: CanvasRenderingContext2D, from: [number, number], v: number[], scale: number, color: string) {
  const norm = Math.hypot(v[0], v[1]);
  if (norm < 1e-3) return;
  const to: [number, number] = [from[0] + v[0] * scale, from[1] - v[1] * scale];
  ctx.strokeStyle = color;
  ctx.fillStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(from[0], from[1]);
  ctx.lineTo(to[0], to[1]);
  ctx.stroke();
  const ang = Math.atan2(to[1] - from[1], to[0] - from[0]);
  ctx.beginPath();
  ctx.moveTo(to[0], to[1]);
  ctx.lineTo(to[0] - 8 * Math.cos(ang - 0.4), to[1] - 8 * Math.sin(ang - 0.4));
  ctx.lineTo(to[0] - 8 * Math.cos(ang + 0.4), to[1] - 8 * Math.sin(ang + 0.4));
  ctx.closePath();
  ctx.fill();
}

export function drawView(ctx: CanvasRenderingContext2D, view: ClientView, width: number, height: number): void {
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, width, height);
  const scene = view.scene;
  if (!scene) {
    ctx.fillStyle = COLORS.text;
    ctx.font = "16px system-ui";
    ctx.fillText("waiting for scene…", 20, 30);
    return;
  }
  const map = makeMapper(scene, width, height);
  const [wx0, wy0] = map.toCanvas([scene.workspace.low[0], scene.workspace.high[1]]);
  const [wx1, wy1] = map.toCanvas([scene.workspace.high[0], scene.workspace.low[1]]);
  ctx.fillStyle = COLORS.workspace;
  ctx.fillRect(wx0, wy0, wx1 - wx0, wy1 - wy0);
  ctx.strokeStyle = COLORS.grid;
  ctx.strokeRect(wx0, wy0, wx1 - wx0, wy1 - wy0);

  for (const prop of scene.props) {
    if (prop.kind === "goal") {
      const [cx, cy] = map.toCanvas(prop.points[0]);
      ctx.strokeStyle = COLORS.goal;
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.arc(cx, cy, prop.radius * map.scale, 0, 2 * Math.PI);
      ctx.stroke();
      ctx.fillStyle = COLORS.text;
      ctx.font = "12px system-ui";
      ctx.fillText(prop.name, cx + 8, cy - 8);
    } else {
      ctx.strokeStyle = COLORS.skill;
      ctx.lineWidth = 2;
      ctx.beginPath();
      prop.points.forEach((p, i) => {
        const [cx, cy] = map.toCanvas(p);
        if (i === 0) ctx.moveTo(cx, cy);
        else ctx.lineTo(cx, cy);
      });
      ctx.stroke();
      for (const p of prop.points) {
        const [cx, cy] = map.toCanvas(p);
        ctx.beginPath();
        ctx.arc(cx, cy, 4, 0, 2 * Math.PI);
        ctx.fillStyle = COLORS.skill;
        ctx.fill();
      }
      const [lx2, ly2] = map.toCanvas(prop.points[0]);
      ctx.fillStyle = COLORS.text;
      ctx.font = "12px system-ui";
      ctx.fillText(prop.name, lx2 + 8, ly2 - 8);
    }
  }

  const trail = view.trail.toArray();
  if (trail.length > 1) {
    ctx.strokeStyle = COLORS.trail;
    ctx.lineWidth = 2;
    ctx.beginPath();
    trail.forEach((p, i) => {
      const [cx, cy] = map.toCanvas(p);
      if (i === 0) ctx.moveTo(cx, cy);
      else ctx.lineTo(cx, cy);
    });
    ctx.stroke();
  }

  const frame = view.frame;
  if (frame) {
    const pos = map.toCanvas(frame.state);
    const arrowScale = 0.35 * map.scale;
    arrow(ctx, pos, frame.a_h, arrowScale, COLORS.human);
    if (frame.beta > 0.001) arrow(ctx, pos, frame.a_r, arrowScale, COLORS.assist);
    ctx.fillStyle = COLORS.robot;
    ctx.beginPath();
    ctx.arc(pos[0], pos[1], 7, 0, 2 * Math.PI);
    ctx.fill();
  }

  drawBetaPanel(ctx, view, width, height);
}

function drawBetaPanel(ctx: CanvasRenderingContext2D, view: ClientView, width: number, height: number): void {
  const scene = view.scene;
  const betaMax = scene ? scene.beta_max : 1.0;
  const beta = view.frame?.beta ?? 0;

  // gauge
  const gx = width - 46;
  const gy = 40;
  const gh = height - 160;
  ctx.fillStyle = COLORS.grid;
  ctx.fillRect(gx, gy, 16, gh);
  const frac = Math.max(0, Math.min(1, betaMax > 0 ? beta / betaMax : 0));
  ctx.fillStyle = betaColor(beta, betaMax);
  ctx.fillRect(gx, gy + gh * (1 - frac), 16, gh * frac);
  ctx.fillStyle = COLORS.text;
  ctx.font = "11px system-ui";
  ctx.fillText("assist", gx - 6, gy - 10);
  ctx.fillText(beta.toFixed(2), gx - 4, gy + gh + 16);

  // sparkline of the beta trace
  const sw = 180;
  const sh = 44;
  const sx0 = width - sw - 70;
  const sy0 = height - sh - 18;
  ctx.strokeStyle = COLORS.grid;
  ctx.strokeRect(sx0, sy0, sw, sh);
  const hist = view.betaHistory.toArray();
  if (hist.length > 1) {
    ctx.strokeStyle = COLORS.assist;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    hist.forEach((b, i) => {
      const x = sx0 + (i / (view.betaHistory.capacity - 1)) * sw;
      const y = sy0 + sh - (betaMax > 0 ? Math.min(1, b / betaMax) : 0) * sh;
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }

  // bundle badge + mode
  ctx.fillStyle = COLORS.text;
  ctx.font = "13px system-ui";
  ctx.fillText(`bundle v${view.bundleVersion()}`, 16, height - 40);
  ctx.fillText(`mode: ${view.mode()}`, 16, height - 22);
  if (view.connection !== "open") {
    ctx.fillStyle = "#e05555";
    ctx.font = "bold 15px system-ui";
    ctx.fillText(`${view.connection}… commands suppressed`, 16, 26);
  }
}
