// Wire protocol: message shapes and strict parsing. The UI renders only what
// the server sends; anything malformed is rejected here and skipped upstream.

export interface Frame {
  type: "frame";
  tick: number;
  state: number[];
  a_h: number[];
  a_r: number[];
  beta: number;
  bundle: number;
}

export interface Prop {
  name: string;
  kind: "goal" | "skill";
  points: number[][];
  radius: number;
}

export interface Scene {
  type: "scene";
  workspace: { low: number[]; high: number[] };
  props: Prop[];
  start: number[];
  dt: number;
  beta_max: number;
}

export interface Status {
  type: "status";
  mode: string;
  bundle: number;
  dataset_size: number;
  method: string;
  detail?: string | null;
}

export type ServerMessage = Frame | Scene | Status;

function isVec(v: unknown): v is number[] {
  return Array.isArray(v) && v.length > 0 && v.every((x) => typeof x === "number" && isFinite(x));
}

export function parseServerMessage(raw: string): ServerMessage {
  let data: any;
  try {
    data = JSON.parse(raw);
  } catch (e) {
    throw new Error(`not JSON: ${e}`);
  }
  switch (data?.type) {
    case "frame": {
      if (
        typeof data.tick !== "number" ||
        !isVec(data.state) ||
        !isVec(data.a_h) ||
        !isVec(data.a_r) ||
        typeof data.beta !== "number" ||
        typeof data.bundle !== "number"
      ) {
        throw new Error("malformed frame");
      }
      return data as Frame;
    }
    case "scene": {
      if (!data.workspace || !isVec(data.workspace.low) || !isVec(data.workspace.high) || !Array.isArray(data.props)) {
        throw new Error("malformed scene");
      }
      return data as Scene;
    }
    case "status": {
      if (typeof data.mode !== "string" || typeof data.bundle !== "number") {
        throw new Error("malformed status");
      }
      return data as Status;
    }
    default:
      throw new Error(`unknown message type ${data?.type}`);
  }
}

export function commandMessage(v: number[]): string {
  return JSON.stringify({ type: "command", v });
}

export function startMessage(taskHint: string | null = null): string {
  return JSON.stringify({ type: "start", task_hint: taskHint });
}

export function endMessage(): string {
  return JSON.stringify({ type: "end" });
}

export function setMethodMessage(name: "ours" | "bayes" | "noassist"): string {
  return JSON.stringify({ type: "set_method", name });
}
