import { describe, expect, it } from "vitest";
import { parseMessage, stickMessage, ZERO_STICKS } from "../src/protocol";

describe("parseMessage", () => {
  it("parses a full state message", () => {
    const msg = parseMessage(JSON.stringify({
      type: "state", t: 2.5, lat: 43.0008, lon: -78.789, relAlt: 4.0,
      groundSpeed: 1.2, climb: 0.1, yawDeg: 90,
    }));
    expect(msg).toEqual({
      type: "state", t: 2.5, lat: 43.0008, lon: -78.789, relAlt: 4.0,
      groundSpeed: 1.2, climb: 0.1, yawDeg: 90,
    });
  });

  it("maps missing numeric fields to null", () => {
    const msg = parseMessage(JSON.stringify({
      type: "state", t: 1.0, lat: 1.0, lon: 2.0, relAlt: 3.0,
      groundSpeed: null, climb: null, yawDeg: null,
    }));
    expect(msg).toMatchObject({ groundSpeed: null, climb: null, yawDeg: null });
  });

  it("parses frame and status messages", () => {
    expect(parseMessage('{"type":"frame","view":"front","data":"QUJD"}'))
      .toEqual({ type: "frame", view: "front", data: "QUJD" });
    expect(parseMessage('{"type":"status","relay":"connected"}'))
      .toEqual({ type: "status", relay: "connected" });
  });

  it("rejects garbage without throwing", () => {
    expect(parseMessage("not json")).toBeNull();
    expect(parseMessage('{"type":"unknown"}')).toBeNull();
    expect(parseMessage('{"type":"frame","view":"side","data":"x"}')).toBeNull();
    expect(parseMessage("null")).toBeNull();
  });
});

describe("stickMessage", () => {
  it("serializes with clamped components", () => {
    const text = stickMessage({ roll: 2, pitch: -3, yaw: 0.25, throttle: 0.5 }, 1.5);
    expect(JSON.parse(text)).toEqual({
      type: "stick", t: 1.5, roll: 1, pitch: -1, yaw: 0.25, throttle: 0.5,
    });
  });

  it("zero sticks serialize as zeros", () => {
    expect(JSON.parse(stickMessage(ZERO_STICKS, 0))).toMatchObject({
      roll: 0, pitch: 0, yaw: 0, throttle: 0,
    });
  });
});
