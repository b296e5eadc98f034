// Console bootstrap: connect to the bridge given by the ?bridge= query
// parameter, apply incoming messages to the store as they arrive, and
// repaint widgets once per animation frame.

import { drawMap } from "./map.js";
import { parseMessage, stickMessage, StickCommand } from "./protocol.js";
import { ConsoleStore, formatAltitude, formatClimb, formatGroundSpeed,
         formatHeading, formatPosition } from "./state.js";
import { InputCapture } from "./input.js";
import { InputMode } from "./sticks.js";

const params = new URLSearchParams(window.location.search);
const bridgeUrl = params.get("bridge") ?? "ws://127.0.0.1:8765";
const requestedMode = (params.get("input") === "gamepad"
  ? "gamepad" : "keyboard") as InputMode;

const store = new ConsoleStore();
const startedAt = performance.now();

function element<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const frontView = element<HTMLImageElement>("front-view");
const bottomView = element<HTMLImageElement>("bottom-view");
const mapCanvas = element<HTMLCanvasElement>("map");
const banner = element<HTMLDivElement>("banner");
const noticeBox = element<HTMLDivElement>("notice");
const widgetBox = element<HTMLDivElement>("widgets");
const widgets = {
  altitude: element<HTMLSpanElement>("w-altitude"),
  speed: element<HTMLSpanElement>("w-speed"),
  climb: element<HTMLSpanElement>("w-climb"),
  heading: element<HTMLSpanElement>("w-heading"),
  position: element<HTMLSpanElement>("w-position"),
};

let socket: WebSocket | null = null;
let retryDelay = 500;

function connect(): void {
  store.connection = "connecting";
  const ws = new WebSocket(bridgeUrl);
  socket = ws;
  ws.onopen = () => {
    store.connection = "open";
    retryDelay = 500;
  };
  ws.onmessage = (event) => {
    const message = parseMessage(String(event.data));
    if (message) store.apply(message, performance.now());
  };
  ws.onclose = () => {
    store.connection = "closed";
    socket = null;
    window.setTimeout(connect, retryDelay);
    retryDelay = Math.min(retryDelay * 2, 5000);
  };
  ws.onerror = () => ws.close();
}

function sendStick(cmd: StickCommand): void {
  if (socket && socket.readyState === WebSocket.OPEN) {
    socket.send(stickMessage(cmd, (performance.now() - startedAt) / 1000));
  }
}

const input = new InputCapture(requestedMode, sendStick);
input.start();
window.addEventListener("beforeunload", () => input.stop());

function render(): void {
  const now = performance.now();
  widgets.altitude.textContent = formatAltitude(store.flight);
  widgets.speed.textContent = formatGroundSpeed(store.flight);
  widgets.climb.textContent = formatClimb(store.flight);
  widgets.heading.textContent = formatHeading(store.flight);
  widgets.position.textContent = formatPosition(store.flight);
  widgetBox.classList.toggle("stale", store.isStale(now));

  if (store.frames.front) {
    frontView.src = `data:image/png;base64,${store.frames.front}`;
  }
  if (store.frames.bottom) {
    bottomView.src = `data:image/png;base64,${store.frames.bottom}`;
  }
  drawMap(mapCanvas, store.track);

  if (store.disconnected()) {
    banner.hidden = false;
    banner.textContent = store.connection === "closed"
      ? `bridge unreachable (${bridgeUrl})`
      : "relay disconnected";
  } else {
    banner.hidden = true;
  }
  noticeBox.textContent = input.notice ?? "";
  noticeBox.hidden = input.notice === null;

  requestAnimationFrame(render);
}

element<HTMLSpanElement>("task-input-mode").textContent = input.mode;
connect();
requestAnimationFrame(render);
