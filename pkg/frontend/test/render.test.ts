import { describe, expect, it } from "vitest";
import { betaColor, makeMapper } from "../src/render.js";
import { Scene } from "../src/protocol.js";

const SCENE: Scene = {
  type: "scene",
  workspace: { low: [-1, -1], high: [1, 1] },
  props: [],
  start: [0, -0.8],
  dt: 0.05,
  beta_max: 0.9,
};

describe("makeMapper", () => {
  it("maps world corners inside the canvas with y flipped", () => {
    const map = makeMapper(SCENE, 800, 600, 30);
    const [lx, ly] = map.toCanvas([-1, -1]);
    const [hx, hy] = map.toCanvas([1, 1]);
    expect(lx).toBeCloseTo(30);
    expect(ly).toBeCloseTo(600 - 30);
    expect(hx).toBeGreaterThan(lx);
    expect(hy).toBeLessThan(ly); // world up is canvas up(-y)
  });

  it("preserves aspect ratio via a single scale", () => {
    const map = makeMapper(SCENE, 800, 600, 30);
    const a = map.toCanvas([0, 0]);
    const b = map.toCanvas([0.1, 0]);
    const c = map.toCanvas([0, 0.1]);
    expect(Math.abs(b[0] - a[0])).toBeCloseTo(Math.abs(c[1] - a[1]));
  });
});

describe("betaColor", () => {
  it("ramps from red at zero to green at the ceiling", () => {
    expect(betaColor(0, 0.9)).toBe("hsl(0,75%,55%)");
    expect(betaColor(0.9, 0.9)).toBe("hsl(120,75%,55%)");
  });

  it("clamps outside the range", () => {
    expect(betaColor(-1, 0.9)).toBe("hsl(0,75%,55%)");
    expect(betaColor(2, 0.9)).toBe("hsl(120,75%,55%)");
  });
});
