// Top-view map: project the received lat/lon history onto a local metric
// plane about the first fix and scale it to the canvas.  The polyline is
// the history as received, no smoothing or interpolation.

import { TrackPoint } from "./state.js";

const EARTH_RADIUS_M = 6371000;

export interface CanvasPoint {
  x: number;
  y: number;
}

export function projectTrack(track: ReadonlyArray<TrackPoint>,
                             width: number, height: number,
                             margin = 12): CanvasPoint[] {
  if (track.length === 0) return [];
  const origin = track[0];
  const cosLat = Math.cos((origin.lat * Math.PI) / 180);
  const metric = track.map((p) => ({
    e: ((p.lon - origin.lon) * Math.PI / 180) * EARTH_RADIUS_M * cosLat,
    n: ((p.lat - origin.lat) * Math.PI / 180) * EARTH_RADIUS_M,
  }));
  let minE = Infinity, maxE = -Infinity, minN = Infinity, maxN = -Infinity;
  for (const p of metric) {
    minE = Math.min(minE, p.e); maxE = Math.max(maxE, p.e);
    minN = Math.min(minN, p.n); maxN = Math.max(maxN, p.n);
  }
  const spanE = Math.max(maxE - minE, 1);
  const spanN = Math.max(maxN - minN, 1);
  const scale = Math.min((width - 2 * margin) / spanE,
                         (height - 2 * margin) / spanN);
  const offsetX = (width - spanE * scale) / 2;
  const offsetY = (height - spanN * scale) / 2;
  // North up: canvas y grows downward.
  return metric.map((p) => ({
    x: offsetX + (p.e - minE) * scale,
    y: height - (offsetY + (p.n - minN) * scale),
  }));
}

export function drawMap(canvas: HTMLCanvasElement,
                        track: ReadonlyArray<TrackPoint>): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.fillStyle = "#10151c";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  const points = projectTrack(track, canvas.width, canvas.height);
  if (points.length === 0) {
    ctx.fillStyle = "#5c6a7a";
    ctx.font = "12px sans-serif";
    ctx.fillText("no fixes yet", 10, 20);
    return;
  }
  ctx.strokeStyle = "#4da3ff";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  points.forEach((p, i) => (i === 0 ? ctx.moveTo(p.x, p.y) : ctx.lineTo(p.x, p.y)));
  ctx.stroke();
  const head = points[points.length - 1];
  ctx.fillStyle = "#ffd24d";
  ctx.beginPath();
  ctx.arc(head.x, head.y, 4, 0, 2 * Math.PI);
  ctx.fill();
}
