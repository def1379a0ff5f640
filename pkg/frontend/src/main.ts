/** Browser bootstrap: register -> tutorial -> annotate loop.
 *
 * All annotation logic lives in the pure modules (state/render/keyboard);
 * this file only wires DOM events, localStorage drafts and the API client.
 */

import { ApiClient } from "./api";
import { applyAction, keyToAction } from "./keyboard";
import { renderPassage } from "./render";
import {
  initState, selectMention, submitEnabled, toPayload, UiState,
} from "./state";
import { TutorialFlow } from "./tutorial";
import type { PassagePayload } from "./types";

const root = document.getElementById("app") as HTMLElement;
const api = new ApiClient("");

function draftKey(passageId: string): string {
  return `corefkit-draft:${passageId}`;
}

async function start() {
  let token = localStorage.getItem("corefkit-token");
  if (!token) {
    const registration = await api.register();
    token = registration.token;
    localStorage.setItem("corefkit-token", token);
  }
  api.setToken(token);
  await runTutorial();
  await annotateLoop();
}

async function runTutorial() {
  const flow = new TutorialFlow(api);
  await flow.load();
  while (flow.status === "in-progress") {
    const step = flow.currentStep();
    if (!step) break;
    await runStep(flow, step.step_id);
  }
  if (flow.status === "locked-out") {
    root.innerHTML = `<div class="lockout"><h2>Thanks for your time!</h2>
      <p>Your screening score was below the required threshold, so the
      annotation task is not available.</p></div>`;
    throw new Error("screening failed");
  }
}

function stepToPassage(flow: TutorialFlow): PassagePayload {
  const step = flow.currentStep();
  if (!step) throw new Error("no active step");
  return {
    passage_id: step.step_id,
    doc_id: "tutorial",
    domain: "tutorial",
    sentences: [{
      sent_id: step.step_id,
      tokens: step.tokens.map((surface, i) => ({ doc_offset: i, surface })),
    }],
    mentions: step.mentions.map((m) => ({ mention_id: m.mention_id,
                                          span: m.span })),
    draft: null,
  };
}

function runStep(flow: TutorialFlow, stepId: string): Promise<void> {
  const payload = stepToPassage(flow);
  let state = initState(payload.mentions);
  return new Promise((resolve) => {
    const prompt = flow.currentStep()?.prompt ?? "";
    const feedback = () => flow.lastFeedback?.messages.join(" ") ?? "";
    const draw = () => {
      root.innerHTML =
        `<div class="prompt">${prompt}</div>` +
        `<div class="feedback">${feedback()}</div>` +
        renderPassage(payload, state);
      wire();
    };
    const wire = () => {
      bindClicks((next) => { state = next; draw(); }, () => state, payload);
      const submitButton = root.querySelector("button.submit");
      submitButton?.addEventListener("click", async () => {
        const result = await flow.submit(toPayload(state, stepId).clusters);
        if (result.kind === "screening" || result.correct) {
          resolve();
        } else {
          draw();
        }
      });
    };
    const onKey = (event: KeyboardEvent) => {
      const action = keyToAction(event.key, event.ctrlKey);
      if (!action) return;
      event.preventDefault();
      state = applyAction(state, action);
      draw();
    };
    document.addEventListener("keydown", onKey);
    draw();
  });
}

function bindClicks(update: (s: UiState) => void, current: () => UiState,
                    _payload: PassagePayload) {
  for (const el of root.querySelectorAll<HTMLElement>(".mention")) {
    el.addEventListener("click", (event) => {
      event.stopPropagation();
      const id = el.dataset.mentionId;
      if (id) update(selectMention(current(), id));
    });
  }
}

async function annotateLoop() {
  for (;;) {
    const assignment = await api.nextAssignment();
    if (!assignment) {
      root.innerHTML = `<div class="done"><h2>All done</h2>
        <p>No more passages need annotation. Thank you!</p></div>`;
      return;
    }
    await annotatePassage(assignment.passage_id);
  }
}

function annotatePassage(passageId: string): Promise<void> {
  return new Promise(async (resolve) => {
    const payload = await api.passage(passageId);
    const local = localStorage.getItem(draftKey(passageId));
    const draft = local ? JSON.parse(local) as string[][]
      : payload.draft?.clusters ?? null;
    let state = initState(payload.mentions, draft);

    const draw = () => {
      root.innerHTML = renderPassage(payload, state);
      bindClicks((next) => { state = next; save(); draw(); }, () => state,
                 payload);
      root.querySelector("button.submit")?.addEventListener("click", submit);
    };
    const save = () => {
      localStorage.setItem(draftKey(passageId),
                           JSON.stringify(state.clusters));
    };
    const submit = async () => {
      if (!submitEnabled(state)) return;
      await api.submitAnnotation(passageId, toPayload(state, passageId).clusters);
      localStorage.removeItem(draftKey(passageId));
      document.removeEventListener("keydown", onKey);
      resolve();
    };
    const onKey = (event: KeyboardEvent) => {
      const action = keyToAction(event.key, event.ctrlKey);
      if (!action) return;
      event.preventDefault();
      state = applyAction(state, action);
      save();
      draw();
    };
    document.addEventListener("keydown", onKey);
    draw();
  });
}

start().catch((err) => {
  console.error(err);
});
