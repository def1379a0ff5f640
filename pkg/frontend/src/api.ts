/** Typed client for the annotation service. */

import type {
  ApiErrorBody, Assignment, PassagePayload, ScreeningOutcome, StepFeedback,
  TutorialPayload,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public details: Record<string, unknown> = {},
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private token: string | null = null,
    private fetchFn: typeof fetch = fetch,
  ) {}

  setToken(token: string) {
    this.token = token;
  }

  private async request<T>(method: string, path: string, body?: unknown):
      Promise<T> {
    const headers: Record<string, string> = {
      "Content-Type": "application/json",
    };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      let errorBody: ApiErrorBody | null = null;
      try {
        errorBody = (await resp.json()) as ApiErrorBody;
      } catch {
        /* non-JSON error */
      }
      throw new ApiError(
        resp.status,
        errorBody?.code ?? "http_error",
        errorBody?.message ?? resp.statusText,
        errorBody?.details ?? {},
      );
    }
    return (await resp.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/healthz");
  }

  async register(name?: string): Promise<{ annotator_id: string; token: string;
      tutorial_steps: number }> {
    const out = await this.request<{ annotator_id: string; token: string;
        tutorial_steps: number }>(
      "POST", "/api/annotators", { name: name ?? null });
    this.setToken(out.token);
    return out;
  }

  tutorial(): Promise<TutorialPayload> {
    return this.request("GET", "/api/tutorial");
  }

  submitTutorialStep(index: number, clusters: string[][]):
      Promise<StepFeedback | ScreeningOutcome> {
    return this.request("POST", `/api/tutorial/steps/${index}`, { clusters });
  }

  async nextAssignment(): Promise<Assignment | null> {
    const out = await this.request<{ assignment: Assignment | null }>(
      "GET", "/api/assignments/next");
    return out.assignment;
  }

  passage(passageId: string): Promise<PassagePayload> {
    return this.request("GET", `/api/passages/${passageId}`);
  }

  submitAnnotation(passageId: string, clusters: string[][]):
      Promise<{ status: string; replaced: boolean }> {
    return this.request("POST", "/api/annotations", {
      passage_id: passageId,
      clusters,
    });
  }
}
