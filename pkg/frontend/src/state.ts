// Console state: latest values only, never a backlog.  Messages are applied
// synchronously as they arrive; the render loop reads whatever is newest,
// so a widget reflects a message on the very next frame.

import { BridgeMessage, FlightState } from "./protocol.js";

export const STALE_AFTER_MS = 1000;

export interface TrackPoint {
  lat: number;
  lon: number;
}

export type ConnectionState = "connecting" | "open" | "closed";

export class ConsoleStore {
  connection: ConnectionState = "connecting";
  relay: "connected" | "disconnected" | "unknown" = "unknown";
  flight: FlightState | null = null;
  flightAt: number | null = null;
  frames: { front: string | null; bottom: string | null } = {
    front: null,
    bottom: null,
  };
  // Received position history verbatim; the map draws exactly this.
  track: TrackPoint[] = [];

  apply(message: BridgeMessage, now: number): void {
    if (message.type === "state") {
      this.flight = message;
      this.flightAt = now;
      if (message.lat !== null && message.lon !== null) {
        this.track.push({ lat: message.lat, lon: message.lon });
      }
    } else if (message.type === "frame") {
      this.frames[message.view] = message.data;
    } else {
      this.relay = message.relay;
    }
  }

  isStale(now: number): boolean {
    if (this.flightAt === null) return true;
    return now - this.flightAt > STALE_AFTER_MS;
  }

  disconnected(): boolean {
    return this.connection === "closed" || this.relay === "disconnected";
  }
}

function fixed(value: number | null, digits: number, unit: string): string {
  return value === null ? "—" : `${value.toFixed(digits)}${unit}`;
}

// Widget text, matching the cockpit's three primary readouts plus heading.
export function formatAltitude(flight: FlightState | null): string {
  return fixed(flight?.relAlt ?? null, 2, " m");
}

export function formatGroundSpeed(flight: FlightState | null): string {
  return fixed(flight?.groundSpeed ?? null, 2, " m/s");
}

export function formatClimb(flight: FlightState | null): string {
  return fixed(flight?.climb ?? null, 2, " m/s");
}

export function formatHeading(flight: FlightState | null): string {
  const yaw = flight?.yawDeg ?? null;
  return yaw === null ? "—" : `${yaw.toFixed(0)}°`;
}

export function formatPosition(flight: FlightState | null): string {
  if (!flight || flight.lat === null || flight.lon === null) return "—";
  return `${flight.lat.toFixed(6)}, ${flight.lon.toFixed(6)}`;
}
