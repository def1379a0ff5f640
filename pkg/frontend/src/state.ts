/** Annotation state machine.
 *
 * Pure functions over an immutable-ish state: every action returns a new
 * state object. The cursor ("current mention") walks the mentions in
 * document order; assigning the current mention to a target (an existing
 * entity or a fresh one) advances it to the next unassigned mention.
 * Undo/redo are snapshot stacks, so one undo followed by one redo lands
 * on exactly the state it left.
 */

import type { MentionPayload } from "./types";

export interface MentionRef {
  mentionId: string;
  span: [number, number];
}

interface Snapshot {
  clusters: string[][];
  current: string | null;
  selection: number;
}

export interface UiState {
  mentions: MentionRef[];
  clusters: string[][];
  current: string | null;
  /** Index into the target list; clusters.length means "new entity". */
  selection: number;
  undoStack: Snapshot[];
  redoStack: Snapshot[];
}

export function documentOrder(a: MentionRef, b: MentionRef): number {
  if (a.span[0] !== b.span[0]) return a.span[0] - b.span[0];
  return (b.span[1] - b.span[0]) - (a.span[1] - a.span[0]); // wider first
}

export function initState(
  mentions: MentionPayload[],
  draft?: string[][] | null,
): UiState {
  const refs = mentions
    .map((m) => ({ mentionId: m.mention_id, span: m.span }))
    .sort(documentOrder);
  const known = new Set(refs.map((m) => m.mentionId));
  const clusters = (draft ?? [])
    .map((cluster) => cluster.filter((id) => known.has(id)))
    .filter((cluster) => cluster.length > 0);
  const state: UiState = {
    mentions: refs,
    clusters,
    current: null,
    selection: clusters.length,
    undoStack: [],
    redoStack: [],
  };
  state.current = firstUnassigned(state);
  return state;
}

export function clusterIndexOf(state: UiState, mentionId: string): number | null {
  for (let i = 0; i < state.clusters.length; i++) {
    if (state.clusters[i].includes(mentionId)) return i;
  }
  return null;
}

export function assignedCount(state: UiState): number {
  return state.mentions.filter((m) => clusterIndexOf(state, m.mentionId) !== null)
    .length;
}

export function submitEnabled(state: UiState): boolean {
  return assignedCount(state) === state.mentions.length;
}

export function targetCount(state: UiState): number {
  return state.clusters.length + 1; // existing entities + "new entity"
}

function firstUnassigned(state: UiState): string | null {
  for (const m of state.mentions) {
    if (clusterIndexOf(state, m.mentionId) === null) return m.mentionId;
  }
  return null;
}

function nextUnassignedAfter(state: UiState, mentionId: string): string | null {
  const start = state.mentions.findIndex((m) => m.mentionId === mentionId);
  for (let i = start + 1; i < state.mentions.length; i++) {
    if (clusterIndexOf(state, state.mentions[i].mentionId) === null) {
      return state.mentions[i].mentionId;
    }
  }
  return firstUnassigned(state);
}

function snapshot(state: UiState): Snapshot {
  return {
    clusters: state.clusters.map((c) => [...c]),
    current: state.current,
    selection: state.selection,
  };
}

function restore(state: UiState, snap: Snapshot): UiState {
  return {
    ...state,
    clusters: snap.clusters.map((c) => [...c]),
    current: snap.current,
    selection: snap.selection,
  };
}

function pushUndo(state: UiState): UiState {
  return {
    ...state,
    undoStack: [...state.undoStack, snapshot(state)],
    redoStack: [],
  };
}

function clampSelection(state: UiState): UiState {
  const max = state.clusters.length;
  return state.selection > max ? { ...state, selection: max } : state;
}

/** Remove a mention from whatever cluster holds it; empty clusters vanish. */
function withoutMention(clusters: string[][], mentionId: string): string[][] {
  return clusters
    .map((c) => c.filter((id) => id !== mentionId))
    .filter((c) => c.length > 0);
}

export function cycleSelection(state: UiState, dir: 1 | -1): UiState {
  const n = targetCount(state);
  return { ...state, selection: (state.selection + dir + n) % n };
}

/** Assign the current mention to the cluster at ``target`` (an index, or
 * clusters.length for a new entity), then advance the cursor. The
 * selection follows the receiving cluster, so repeated confirms keep
 * extending the same entity. */
export function assignCurrent(state: UiState, target: number): UiState {
  if (state.current === null) return state;
  const id = state.current;
  const already = clusterIndexOf(state, id);
  if (already !== null && already === target) {
    return { ...state, current: nextUnassignedAfter(state, id) ?? id };
  }
  let next = pushUndo(state);
  // Identify the target cluster by content before removal shifts indices.
  const targetCluster =
    target < next.clusters.length ? next.clusters[target] : null;
  let clusters = withoutMention(next.clusters, id);
  if (targetCluster === null) {
    clusters = [...clusters, [id]];
  } else {
    const kept = clusters.find(
      (c) => c.length > 0 && targetCluster.includes(c[0]),
    );
    if (kept) {
      clusters = clusters.map((c) => (c === kept ? [...c, id] : c));
    } else {
      clusters = [...clusters, [id]]; // target emptied away: new entity
    }
  }
  next = { ...next, clusters };
  next = { ...next, current: nextUnassignedAfter(next, id) ?? id };
  next = {
    ...next,
    selection: clusters.findIndex((c) => c.includes(id)),
  };
  return clampSelection(next);
}

export function confirmSelection(state: UiState): UiState {
  return assignCurrent(state, state.selection);
}

export function newEntity(state: UiState): UiState {
  return assignCurrent(state, state.clusters.length);
}

/** Join the cluster of ``otherId`` (creating a pair when it is loose). */
export function assignCurrentToMention(state: UiState, otherId: string): UiState {
  if (state.current === null || otherId === state.current) return state;
  const target = clusterIndexOf(state, otherId);
  if (target !== null) return assignCurrent(state, target);
  let next = pushUndo(state);
  const clusters = [
    ...withoutMention(next.clusters, next.current as string),
    [otherId, next.current as string],
  ];
  next = { ...next, clusters, selection: clusters.length - 1 };
  next = {
    ...next,
    current: nextUnassignedAfter(next, state.current) ?? state.current,
  };
  return clampSelection(next);
}

export function selectMention(state: UiState, mentionId: string): UiState {
  if (!state.mentions.some((m) => m.mentionId === mentionId)) return state;
  return { ...state, current: mentionId };
}

function moveCursor(state: UiState, dir: 1 | -1): UiState {
  if (state.mentions.length === 0) return state;
  const idx = state.mentions.findIndex((m) => m.mentionId === state.current);
  const n = state.mentions.length;
  const next = idx === -1 ? 0 : (idx + dir + n) % n;
  return { ...state, current: state.mentions[next].mentionId };
}

export function nextMention(state: UiState): UiState {
  return moveCursor(state, 1);
}

export function prevMention(state: UiState): UiState {
  return moveCursor(state, -1);
}

export function undo(state: UiState): UiState {
  if (state.undoStack.length === 0) return state;
  const undoStack = [...state.undoStack];
  const snap = undoStack.pop() as Snapshot;
  const redoStack = [...state.redoStack, snapshot(state)];
  return { ...restore(state, snap), undoStack, redoStack };
}

export function redo(state: UiState): UiState {
  if (state.redoStack.length === 0) return state;
  const redoStack = [...state.redoStack];
  const snap = redoStack.pop() as Snapshot;
  const undoStack = [...state.undoStack, snapshot(state)];
  return { ...restore(state, snap), undoStack, redoStack };
}

/** The submission body; call only when submitEnabled. */
export function toPayload(
  state: UiState,
  passageId: string,
): { passage_id: string; clusters: string[][] } {
  return {
    passage_id: passageId,
    clusters: state.clusters.map((c) => [...c].sort()),
  };
}

/** Equality of the annotator-visible assignment (for undo/redo checks). */
export function assignmentEquals(a: UiState, b: UiState): boolean {
  return (
    JSON.stringify(a.clusters) === JSON.stringify(b.clusters) &&
    a.current === b.current &&
    a.selection === b.selection
  );
}
