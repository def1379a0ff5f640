/** Deterministic HTML rendering: same payload + state, same markup.
 *
 * Mention frames nest (inner fully inside outer); the current mention
 * carries the cursor class; entity frames get their palette color and a
 * numeric badge. Crossing spans cannot be rendered and raise.
 */

import { entityColor, entityLabel } from "./palette";
import {
  assignedCount, clusterIndexOf, documentOrder, submitEnabled, UiState,
} from "./state";
import type { PassagePayload } from "./types";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

interface Frame {
  mentionId: string;
  span: [number, number];
}

export function renderPassage(payload: PassagePayload, state: UiState): string {
  const mentions = [...payload.mentions]
    .map((m) => ({ mentionId: m.mention_id, span: m.span }))
    .sort(documentOrder);

  const opensAt = new Map<number, Frame[]>();
  for (const m of mentions) {
    const list = opensAt.get(m.span[0]) ?? [];
    list.push(m);
    opensAt.set(m.span[0], list);
  }

  const parts: string[] = [];
  parts.push(`<div class="passage" data-passage-id="${escapeHtml(payload.passage_id)}">`);
  parts.push(`<div class="text">`);
  const stack: Frame[] = [];
  for (const sentence of payload.sentences) {
    parts.push(`<p class="sentence" data-sent-id="${escapeHtml(sentence.sent_id)}">`);
    for (const token of sentence.tokens) {
      for (const frame of opensAt.get(token.doc_offset) ?? []) {
        const top = stack[stack.length - 1];
        if (top && top.span[1] < frame.span[1]) {
          throw new Error(
            `crossing spans: [${top.span}] and [${frame.span}]`);
        }
        stack.push(frame);
        parts.push(openTag(frame, state));
      }
      parts.push(`<span class="token" data-offset="${token.doc_offset}">` +
        `${escapeHtml(token.surface)}</span> `);
      while (stack.length > 0 &&
             stack[stack.length - 1].span[1] === token.doc_offset) {
        stack.pop();
        parts.push(`</span>`);
      }
    }
    parts.push(`</p>`);
  }
  parts.push(`</div>`);
  parts.push(renderSidePanel(payload, state));
  parts.push(renderTargets(state));
  const done = assignedCount(state);
  parts.push(`<div class="progress">${done} / ${state.mentions.length} assigned</div>`);
  const disabled = submitEnabled(state) ? "" : " disabled";
  parts.push(`<button class="submit"${disabled}>Submit</button>`);
  parts.push(`</div>`);
  return parts.join("");
}

function openTag(frame: Frame, state: UiState): string {
  const cluster = clusterIndexOf(state, frame.mentionId);
  const classes = ["mention"];
  if (frame.mentionId === state.current) classes.push("current");
  if (cluster === null) classes.push("unassigned");
  const color = cluster === null ? "" :
    ` style="--frame-color:${entityColor(cluster)}"`;
  const badge = cluster === null ? "" :
    `<sup class="eid">${entityLabel(cluster)}</sup>`;
  return `<span class="${classes.join(" ")}" ` +
    `data-mention-id="${escapeHtml(frame.mentionId)}"` +
    `${cluster === null ? "" : ` data-entity="${cluster}"`}${color}>${badge}`;
}

/** Mentions of the entity currently being annotated (the cluster of the
 * selected target, else of the current mention). */
function renderSidePanel(payload: PassagePayload, state: UiState): string {
  let cluster: number | null = null;
  if (state.selection < state.clusters.length) {
    cluster = state.selection;
  } else if (state.current !== null) {
    cluster = clusterIndexOf(state, state.current);
  }
  const parts = [`<aside class="side-panel">`];
  if (cluster === null) {
    parts.push(`<p class="empty">no entity selected</p>`);
  } else {
    parts.push(`<h3><span class="chip" style="--frame-color:${entityColor(cluster)}">` +
      `${entityLabel(cluster)}</span></h3><ul>`);
    for (const id of state.clusters[cluster]) {
      parts.push(`<li>${escapeHtml(mentionText(payload, id))}</li>`);
    }
    parts.push(`</ul>`);
  }
  parts.push(`</aside>`);
  return parts.join("");
}

function renderTargets(state: UiState): string {
  const parts = [`<div class="targets">`];
  for (let i = 0; i < state.clusters.length; i++) {
    const selected = state.selection === i ? " selected" : "";
    parts.push(`<span class="target${selected}" data-target="${i}" ` +
      `style="--frame-color:${entityColor(i)}">${entityLabel(i)}` +
      ` (${state.clusters[i].length})</span>`);
  }
  const selected = state.selection === state.clusters.length ? " selected" : "";
  parts.push(`<span class="target new-entity${selected}" ` +
    `data-target="${state.clusters.length}">new entity</span>`);
  parts.push(`</div>`);
  return parts.join("");
}

export function mentionText(payload: PassagePayload, mentionId: string): string {
  const mention = payload.mentions.find((m) => m.mention_id === mentionId);
  if (!mention) return mentionId;
  const surfaces: string[] = [];
  for (const sentence of payload.sentences) {
    for (const token of sentence.tokens) {
      if (token.doc_offset >= mention.span[0] &&
          token.doc_offset <= mention.span[1]) {
        surfaces.push(token.surface);
      }
    }
  }
  return surfaces.join(" ");
}
