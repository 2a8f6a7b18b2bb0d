// Keyboard and gamepad capture. The pure mapping is separated from the DOM
// listeners so it can be tested headlessly.

const KEY_AXES: Record<string, [number, number]> = {
  ArrowUp: [0, 1],
  KeyW: [0, 1],
  ArrowDown: [0, -1],
  KeyS: [0, -1],
  ArrowLeft: [-1, 0],
  KeyA: [-1, 0],
  ArrowRight: [1, 0],
  KeyD: [1, 0],
};

export const GAMEPAD_DEADZONE = 0.15;

// pressed key codes -> velocity command, normalized to norm <= 1;
// opposing keys cancel, no keys means a zero (idle) command
export function keysToCommand(pressed: Set<string>): [number, number] {
  let x = 0;
  let y = 0;
  for (const code of pressed) {
    const axes = KEY_AXES[code];
    if (axes) {
      x += axes[0];
      y += axes[1];
    }
  }
  x = Math.sign(x);
  y = Math.sign(y);
  const norm = Math.hypot(x, y);
  if (norm > 1) {
    x /= norm;
    y /= norm;
  }
  return [x, y];
}

export function gamepadToCommand(axes: readonly number[]): [number, number] {
  let x = axes[0] ?? 0;
  let y = -(axes[1] ?? 0); // stick up means forward
  if (Math.hypot(x, y) < GAMEPAD_DEADZONE) return [0, 0];
  const norm = Math.hypot(x, y);
  if (norm > 1) {
    x /= norm;
    y /= norm;
  }
  return [x, y];
}

export class InputCapture {
  private pressed = new Set<string>();

  attach(target: EventTarget): void {
    target.addEventListener("keydown", (e) => {
      const ke = e as KeyboardEvent;
      if (KEY_AXES[ke.code]) {
        this.pressed.add(ke.code);
        ke.preventDefault();
      }
    });
    target.addEventListener("keyup", (e) => {
      this.pressed.delete((e as KeyboardEvent).code);
    });
    target.addEventListener("blur", () => this.pressed.clear());
  }

  // keyboard wins when both are active so the gamepad cannot mask key input
  current(): [number, number] {
    const keys = keysToCommand(this.pressed);
    if (keys[0] !== 0 || keys[1] !== 0) return keys;
    const pads = typeof navigator !== "undefined" && navigator.getGamepads ? navigator.getGamepads() : [];
    for (const pad of pads) {
      if (pad && pad.connected) {
        const cmd = gamepadToCommand(pad.axes);
        if (cmd[0] !== 0 || cmd[1] !== 0) return cmd;
      }
    }
    return [0, 0];
  }
}
