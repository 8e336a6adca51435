/** Payload types of the annotation service API. */

export interface Progress {
  completed: number;
  total: number;
}

export type Hint =
  | { kind: "none" }
  | { kind: "sentence"; text: string }
  | { kind: "document"; sentences: string[]; highlight_index: number };

export type Segment =
  | { kind: "text"; text: string }
  | { kind: "gap"; position: number };

export interface ProblemPayload {
  status: "problem";
  problem_id: string;
  instructions: string;
  progress: Progress;
  hint: Hint;
  sentence: { rendered: string; segments: Segment[] };
  gap_count: number;
}

export interface DonePayload {
  status: "done";
  completed: number;
  total: number;
}

export type NextPayload = ProblemPayload | DonePayload;

export interface Receipt {
  status: "accepted" | "duplicate";
  receipt_id: number;
  informant_id: string;
  problem_id: string;
}

export type Fills = Record<string, string>;

export interface InformantProgress {
  completed: number;
  total: number;
  done: boolean;
}

export type AdminProgress = Record<string, InformantProgress>;

export function isDone(payload: NextPayload): payload is DonePayload {
  return payload.status === "done";
}
