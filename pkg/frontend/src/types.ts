/**
 * Payload types for the review service API (/api/v1).
 */

export type TaskName = "KnowledgeQA" | "ContextQA" | "TermInterpretation";

export type ReviewStateName = "Pending" | "Accepted" | "Edited" | "Rejected";

export type DecisionAction = "Accept" | "Reject" | "Edit";

export interface SampleRecord {
  id: string;
  task: TaskName;
  instruction: string;
  context: string | null;
  output: string;
  provenance: string;
  source_doc_id: string | null;
  review_state: ReviewStateName;
  edited_output: string | null;
  source_snippet?: string;
}

export interface SamplePage {
  items: SampleRecord[];
  page: number;
  page_size: number;
  total: number;
}

export interface QueueStats {
  pending: number;
  accepted: number;
  edited: number;
  rejected: number;
  total: number;
}

export interface DecisionRequest {
  sample_id: string;
  action: DecisionAction;
  edited_output?: string;
  reviewer: string;
}
