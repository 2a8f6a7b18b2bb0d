import { describe, expect, it } from "vitest";
import {
  commandMessage,
  endMessage,
  parseServerMessage,
  setMethodMessage,
  startMessage,
} from "../src/protocol.js";

const FRAME = JSON.stringify({
  type: "frame",
  tick: 3,
  state: [0.1, -0.2],
  a_h: [0, 0],
  a_r: [0.3, 0.4],
  beta: 0.5,
  bundle: 2,
});

describe("parseServerMessage", () => {
  it("accepts a valid frame", () => {
    const msg = parseServerMessage(FRAME);
    expect(msg.type).toBe("frame");
    if (msg.type === "frame") {
      expect(msg.tick).toBe(3);
      expect(msg.beta).toBeCloseTo(0.5);
    }
  });

  it("accepts scene and status", () => {
    const scene = parseServerMessage(
      JSON.stringify({
        type: "scene",
        workspace: { low: [-1, -1], high: [1, 1] },
        props: [{ name: "cup", kind: "goal", points: [[0.3, 0.4]], radius: 0.1 }],
        start: [0, -0.8],
        dt: 0.05,
        beta_max: 0.9,
      }),
    );
    expect(scene.type).toBe("scene");
    const status = parseServerMessage(
      JSON.stringify({ type: "status", mode: "live", bundle: 0, dataset_size: 0, method: "ours" }),
    );
    expect(status.type).toBe("status");
  });

  it("rejects malformed frames", () => {
    expect(() => parseServerMessage("not json")).toThrow();
    expect(() => parseServerMessage(JSON.stringify({ type: "frame", tick: "x" }))).toThrow();
    expect(() =>
      parseServerMessage(JSON.stringify({ type: "frame", tick: 1, state: [NaN], a_h: [0], a_r: [0], beta: 0, bundle: 0 })),
    ).toThrow();
    expect(() => parseServerMessage(JSON.stringify({ type: "telepathy" }))).toThrow();
  });
});

describe("client messages", () => {
  it("serializes the exact wire field names", () => {
    expect(JSON.parse(commandMessage([0.5, -0.5]))).toEqual({ type: "command", v: [0.5, -0.5] });
    expect(JSON.parse(startMessage())).toEqual({ type: "start", task_hint: null });
    expect(JSON.parse(endMessage())).toEqual({ type: "end" });
    expect(JSON.parse(setMethodMessage("bayes"))).toEqual({ type: "set_method", name: "bayes" });
  });
});
