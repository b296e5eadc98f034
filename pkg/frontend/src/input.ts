// DOM wiring for stick capture.  A 25 ms timer (40 Hz, comfortably above
// the 20 Hz floor) samples whichever device is active and hands the result
// to the StickSender; tab blur releases the sticks immediately.

import { StickCommand } from "./protocol.js";
import { InputMode, StickSender, isControlKey, sticksFromGamepadAxes,
         sticksFromKeys } from "./sticks.js";

const SAMPLE_INTERVAL_MS = 25;

export class InputCapture {
  mode: InputMode;
  notice: string | null = null;
  private pressed = new Set<string>();
  private timer: number | null = null;
  private sender: StickSender;

  constructor(requestedMode: InputMode,
              send: (cmd: StickCommand) => void) {
    this.sender = new StickSender(send);
    this.mode = requestedMode;
    if (requestedMode === "gamepad" && !this.gamepad()) {
      this.mode = "keyboard";
      this.notice = "no gamepad detected, using keyboard";
    }
  }

  start(): void {
    window.addEventListener("keydown", this.onKeyDown);
    window.addEventListener("keyup", this.onKeyUp);
    window.addEventListener("blur", this.onBlur);
    window.addEventListener("gamepadconnected", this.onGamepadConnected);
    this.timer = window.setInterval(() => this.sample(), SAMPLE_INTERVAL_MS);
  }

  stop(): void {
    if (this.timer !== null) window.clearInterval(this.timer);
    window.removeEventListener("keydown", this.onKeyDown);
    window.removeEventListener("keyup", this.onKeyUp);
    window.removeEventListener("blur", this.onBlur);
    window.removeEventListener("gamepadconnected", this.onGamepadConnected);
    this.sender.release();
  }

  private onKeyDown = (event: KeyboardEvent) => {
    if (!isControlKey(event.code)) return;
    event.preventDefault();
    this.pressed.add(event.code);
  };

  private onKeyUp = (event: KeyboardEvent) => {
    if (!isControlKey(event.code)) return;
    event.preventDefault();
    this.pressed.delete(event.code);
  };

  private onBlur = () => {
    this.pressed.clear();
    this.sender.release(); // position hold the moment focus is lost
  };

  private onGamepadConnected = () => {
    if (this.mode === "keyboard" && this.notice !== null) {
      this.mode = "gamepad";
      this.notice = null;
    }
  };

  private gamepad(): Gamepad | null {
    const pads = navigator.getGamepads?.() ?? [];
    for (const pad of pads) if (pad) return pad;
    return null;
  }

  private sample(): void {
    if (this.mode === "gamepad") {
      const pad = this.gamepad();
      if (pad) {
        this.sender.tick(sticksFromGamepadAxes(pad.axes));
        return;
      }
      this.notice = "gamepad lost, using keyboard";
      this.mode = "keyboard";
    }
    this.sender.tick(sticksFromKeys(this.pressed));
  }
}
