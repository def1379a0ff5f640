/** Tutorial controller: steps in order, inline feedback, screening gate.
 *
 * The server tracks per-annotator progress (next_step), so reloading or a
 * dropped connection resumes at the last incomplete step.
 */

import { ApiClient } from "./api";
import type {
  ScreeningOutcome, StepFeedback, TutorialPayload, TutorialStepPublic,
} from "./types";

export type TutorialStatus = "in-progress" | "unlocked" | "locked-out";

export class TutorialFlow {
  steps: TutorialStepPublic[] = [];
  stepIndex = 0;
  status: TutorialStatus = "in-progress";
  lastFeedback: StepFeedback | null = null;
  screening: ScreeningOutcome | null = null;

  constructor(private api: ApiClient) {}

  /** Fetch the script and resume where the server says we are. */
  async load(): Promise<TutorialPayload> {
    const payload = await this.api.tutorial();
    this.steps = payload.steps;
    this.stepIndex = payload.next_step;
    if (payload.screening) {
      this.status = payload.screening.passed ? "unlocked" : "locked-out";
    } else if (this.stepIndex >= this.steps.length) {
      this.status = "locked-out"; // finished without a pass on record
    } else {
      this.status = "in-progress";
    }
    return payload;
  }

  currentStep(): TutorialStepPublic | null {
    return this.stepIndex < this.steps.length ? this.steps[this.stepIndex] : null;
  }

  /** Submit clusters for the current step; advances on success. */
  async submit(clusters: string[][]): Promise<StepFeedback | ScreeningOutcome> {
    const step = this.currentStep();
    if (!step) throw new Error("tutorial already finished");
    const result = await this.api.submitTutorialStep(this.stepIndex, clusters);
    if (result.kind === "screening") {
      this.screening = result;
      this.stepIndex += 1;
      this.status = result.passed ? "unlocked" : "locked-out";
    } else {
      this.lastFeedback = result;
      if (result.correct) {
        this.stepIndex += 1;
        this.lastFeedback = null;
      }
    }
    return result;
  }
}
