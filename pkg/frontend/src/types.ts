/** Payload shapes of the annotation service API. */

export interface TokenPayload {
  doc_offset: number;
  surface: string;
}

export interface SentencePayload {
  sent_id: string;
  tokens: TokenPayload[];
}

export interface MentionPayload {
  mention_id: string;
  span: [number, number];
  head?: number;
}

export interface ClusteringPayload {
  passage_id: string;
  annotator_id: string;
  clusters: string[][];
}

export interface PassagePayload {
  passage_id: string;
  doc_id: string;
  domain: string;
  sentences: SentencePayload[];
  mentions: MentionPayload[];
  draft: ClusteringPayload | null;
}

export interface Assignment {
  passage_id: string;
  expires_at: number;
}

export interface TutorialStepPublic {
  step_id: string;
  prompt: string;
  tokens: string[];
  mentions: { mention_id: string; span: [number, number] }[];
  is_screening: boolean;
}

export interface TutorialPayload {
  steps: TutorialStepPublic[];
  next_step: number;
  screening: { b3_f1: number; passed: boolean } | null;
}

export interface StepFeedback {
  kind: "feedback";
  correct: boolean;
  missing_links: [string, string][];
  wrong_links: [string, string][];
  messages: string[];
}

export interface ScreeningOutcome {
  kind: "screening";
  b3_f1: number;
  passed: boolean;
  threshold: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  details: Record<string, unknown>;
}
