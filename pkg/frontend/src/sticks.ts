// Stick computation from keyboard and gamepad, kept free of DOM types so
// the mapping rules are unit-testable.
//
// Keyboard is mode-2: W/S throttle, A/D yaw, arrows pitch (up/down) and
// roll (left/right).  Opposing keys cancel to zero.  Gamepad: left stick
// yaw/throttle, right stick roll/pitch, with a small deadzone; vertical
// axes are inverted so pushing up means climb / nose down-range.

import { StickCommand, ZERO_STICKS, clamp } from "./protocol.js";

export type InputMode = "keyboard" | "gamepad";

const KEY_AXES: Record<string, { axis: keyof StickCommand; sign: number }> = {
  KeyW: { axis: "throttle", sign: 1 },
  KeyS: { axis: "throttle", sign: -1 },
  KeyA: { axis: "yaw", sign: -1 },
  KeyD: { axis: "yaw", sign: 1 },
  ArrowUp: { axis: "pitch", sign: 1 },
  ArrowDown: { axis: "pitch", sign: -1 },
  ArrowLeft: { axis: "roll", sign: -1 },
  ArrowRight: { axis: "roll", sign: 1 },
};

export function isControlKey(code: string): boolean {
  return code in KEY_AXES;
}

export function sticksFromKeys(pressed: ReadonlySet<string>): StickCommand {
  const cmd = { ...ZERO_STICKS };
  for (const code of pressed) {
    const mapping = KEY_AXES[code];
    if (mapping) cmd[mapping.axis] = clamp(cmd[mapping.axis] + mapping.sign);
  }
  return cmd;
}

export const GAMEPAD_DEADZONE = 0.08;

function deadzone(value: number): number {
  return Math.abs(value) < GAMEPAD_DEADZONE ? 0 : clamp(value);
}

export function sticksFromGamepadAxes(axes: ReadonlyArray<number>): StickCommand {
  return {
    yaw: deadzone(axes[0] ?? 0),
    throttle: deadzone(-(axes[1] ?? 0)),
    roll: deadzone(axes[2] ?? 0),
    pitch: deadzone(-(axes[3] ?? 0)),
  };
}

// Sender policy: at least 20 Hz while any input is active, and exactly one
// zero message on release so the craft enters position hold immediately.
export class StickSender {
  private lastSent: StickCommand | null = null;

  constructor(private send: (cmd: StickCommand) => void) {}

  tick(cmd: StickCommand): void {
    const zero = cmd.roll === 0 && cmd.pitch === 0 && cmd.yaw === 0
      && cmd.throttle === 0;
    const wasZero = this.lastSent === null
      || (this.lastSent.roll === 0 && this.lastSent.pitch === 0
          && this.lastSent.yaw === 0 && this.lastSent.throttle === 0);
    if (!zero || !wasZero) {
      this.send(cmd);
      this.lastSent = cmd;
    }
  }

  release(): void {
    this.send({ ...ZERO_STICKS });
    this.lastSent = { ...ZERO_STICKS };
  }
}
