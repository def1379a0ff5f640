/** Keyboard bindings; the whole task is operable without a mouse.
 *
 *   ArrowRight / j   select next assignment target
 *   ArrowLeft  / k   select previous assignment target
 *   Enter            assign current mention to the selected target
 *   e                assign current mention to a new entity
 *   n / p            move the cursor to the next / previous mention
 *   u / Ctrl+Z       undo
 *   r / Ctrl+Y       redo
 */

import {
  confirmSelection, cycleSelection, newEntity, nextMention, prevMention,
  redo, undo, UiState,
} from "./state";

export type KeyAction =
  | { type: "cycle"; dir: 1 | -1 }
  | { type: "confirm" }
  | { type: "new-entity" }
  | { type: "next" }
  | { type: "prev" }
  | { type: "undo" }
  | { type: "redo" };

export function keyToAction(key: string, ctrl = false): KeyAction | null {
  if (ctrl) {
    if (key === "z" || key === "Z") return { type: "undo" };
    if (key === "y" || key === "Y") return { type: "redo" };
    return null;
  }
  switch (key) {
    case "ArrowRight":
    case "j":
      return { type: "cycle", dir: 1 };
    case "ArrowLeft":
    case "k":
      return { type: "cycle", dir: -1 };
    case "Enter":
      return { type: "confirm" };
    case "e":
      return { type: "new-entity" };
    case "n":
      return { type: "next" };
    case "p":
      return { type: "prev" };
    case "u":
      return { type: "undo" };
    case "r":
      return { type: "redo" };
    default:
      return null;
  }
}

export function applyAction(state: UiState, action: KeyAction): UiState {
  switch (action.type) {
    case "cycle":
      return cycleSelection(state, action.dir);
    case "confirm":
      return confirmSelection(state);
    case "new-entity":
      return newEntity(state);
    case "next":
      return nextMention(state);
    case "prev":
      return prevMention(state);
    case "undo":
      return undo(state);
    case "redo":
      return redo(state);
  }
}

/** Convenience for scripted sessions and tests. */
export function pressKeys(state: UiState, keys: string[]): UiState {
  let out = state;
  for (const key of keys) {
    const ctrl = key.startsWith("Ctrl+");
    const action = keyToAction(ctrl ? key.slice(5) : key, ctrl);
    if (action) out = applyAction(out, action);
  }
  return out;
}
