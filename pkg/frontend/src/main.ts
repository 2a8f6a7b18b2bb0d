import { InputCapture } from "./input.js";
import { SocketClient, defaultServerUrl } from "./net.js";
import { commandMessage, endMessage, setMethodMessage, startMessage } from "./protocol.js";
import { drawView } from "./render.js";
import { ClientView } from "./state.js";

const CLIENT_TICK_MS = 50; // one command per tick, never more

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function main(): void {
  const canvas = el<HTMLCanvasElement>("view");
  const ctx = canvas.getContext("2d")!;
  const view = new ClientView();
  const input = new InputCapture();
  input.attach(window);

  const params = new URLSearchParams(window.location.search);
  const url = params.get("server") ?? defaultServerUrl();

  const client = new SocketClient(
    url,
    (msg) => view.apply(msg),
    (open) => {
      view.connection = open ? "open" : "closed";
    },
  );
  client.connect();

  el<HTMLButtonElement>("start").onclick = () => client.send(startMessage(null));
  el<HTMLButtonElement>("end").onclick = () => client.send(endMessage());
  el<HTMLButtonElement>("retrain").onclick = () => {
    fetch("/api/retrain", { method: "POST" }).catch((e) => console.warn("retrain failed:", e));
  };
  el<HTMLSelectElement>("method").onchange = (e) => {
    const name = (e.target as HTMLSelectElement).value as "ours" | "bayes" | "noassist";
    client.send(setMethodMessage(name));
  };

  setInterval(() => {
    if (!client.open) return; // disconnected: suppress input entirely
    client.send(commandMessage(input.current()));
  }, CLIENT_TICK_MS);

  const render = () => {
    drawView(ctx, view, canvas.width, canvas.height);
    requestAnimationFrame(render);
  };
  requestAnimationFrame(render);
}

main();
