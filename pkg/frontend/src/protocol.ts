// Bridge WebSocket protocol: JSON text messages, three kinds downstream
// (state, frame, status) and stick commands upstream.

export interface FlightState {
  t: number;
  lat: number | null;
  lon: number | null;
  relAlt: number | null;
  groundSpeed: number | null;
  climb: number | null;
  yawDeg: number | null;
}

export interface StateMessage extends FlightState {
  type: "state";
}

export interface FrameMessage {
  type: "frame";
  view: "front" | "bottom";
  data: string; // base64 PNG
}

export interface StatusMessage {
  type: "status";
  relay: "connected" | "disconnected";
}

export type BridgeMessage = StateMessage | FrameMessage | StatusMessage;

export interface StickCommand {
  roll: number;
  pitch: number;
  yaw: number;
  throttle: number;
}

export const ZERO_STICKS: StickCommand = { roll: 0, pitch: 0, yaw: 0, throttle: 0 };

export function clamp(value: number): number {
  return Math.max(-1, Math.min(1, value));
}

function numberOrNull(value: unknown): number | null {
  return typeof value === "number" && Number.isFinite(value) ? value : null;
}

export function parseMessage(text: string): BridgeMessage | null {
  let data: any;
  try {
    data = JSON.parse(text);
  } catch {
    return null;
  }
  if (data === null || typeof data !== "object") return null;
  if (data.type === "state") {
    return {
      type: "state",
      t: numberOrNull(data.t) ?? 0,
      lat: numberOrNull(data.lat),
      lon: numberOrNull(data.lon),
      relAlt: numberOrNull(data.relAlt),
      groundSpeed: numberOrNull(data.groundSpeed),
      climb: numberOrNull(data.climb),
      yawDeg: numberOrNull(data.yawDeg),
    };
  }
  if (data.type === "frame" && (data.view === "front" || data.view === "bottom")
      && typeof data.data === "string") {
    return { type: "frame", view: data.view, data: data.data };
  }
  if (data.type === "status") {
    return {
      type: "status",
      relay: data.relay === "connected" ? "connected" : "disconnected",
    };
  }
  return null;
}

export function stickMessage(cmd: StickCommand, t: number): string {
  return JSON.stringify({
    type: "stick",
    t,
    roll: clamp(cmd.roll),
    pitch: clamp(cmd.pitch),
    yaw: clamp(cmd.yaw),
    throttle: clamp(cmd.throttle),
  });
}

export function sticksEqual(a: StickCommand, b: StickCommand): boolean {
  return a.roll === b.roll && a.pitch === b.pitch && a.yaw === b.yaw
    && a.throttle === b.throttle;
}

export function isZero(cmd: StickCommand): boolean {
  return sticksEqual(cmd, ZERO_STICKS);
}
