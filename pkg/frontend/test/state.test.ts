import { describe, expect, it } from "vitest";
import { Ring } from "../src/ring.js";
import { ClientView } from "../src/state.js";
import { Frame, Scene } from "../src/protocol.js";

function scene(dt = 0.05): Scene {
  return {
    type: "scene",
    workspace: { low: [-1, -1], high: [1, 1] },
    props: [],
    start: [0, -0.8],
    dt,
    beta_max: 0.9,
  };
}

function frame(tick: number, bundle = 0): Frame {
  return {
    type: "frame",
    tick,
    state: [tick * 0.01, 0],
    a_h: [1, 0],
    a_r: [0, 0],
    beta: Math.min(0.9, tick * 0.01),
    bundle,
  };
}

describe("Ring", () => {
  it("keeps only the newest entries", () => {
    const r = new Ring<number>(3);
    [1, 2, 3, 4, 5].forEach((x) => r.push(x));
    expect(r.toArray()).toEqual([3, 4, 5]);
    expect(r.last()).toBe(5);
    expect(r.length).toBe(3);
  });

  it("clears", () => {
    const r = new Ring<number>(2);
    r.push(1);
    r.clear();
    expect(r.length).toBe(0);
    expect(r.last()).toBeUndefined();
  });
});

describe("ClientView", () => {
  it("sizes the trail from the server tick rate", () => {
    const view = new ClientView();
    view.apply(scene(0.05));
    expect(view.trail.capacity).toBe(100); // 5 s at 20 Hz
  });

  it("trail shows the last five seconds after 400 frames", () => {
    const view = new ClientView();
    view.apply(scene(0.05));
    for (let t = 0; t < 400; t++) view.apply(frame(t));
    expect(view.framesSeen).toBe(400);
    const trail = view.trail.toArray();
    expect(trail.length).toBe(100);
    expect(trail[0][0]).toBeCloseTo(300 * 0.01);
    expect(trail[99][0]).toBeCloseTo(399 * 0.01);
  });

  it("rebuilds cleanly from a fresh scene (reconnect)", () => {
    const view = new ClientView();
    view.apply(scene());
    for (let t = 0; t < 50; t++) view.apply(frame(t));
    view.apply(scene());
    expect(view.trail.length).toBe(0);
    expect(view.betaHistory.length).toBe(0);
    expect(view.frame).toBeNull();
  });

  it("reports the bundle version from the newest frame", () => {
    const view = new ClientView();
    view.apply(scene());
    view.apply(frame(0, 3));
    expect(view.bundleVersion()).toBe(3);
  });
});
