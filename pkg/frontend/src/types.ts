/** Wire types mirroring the service API responses. */

export type JobState = "queued" | "running" | "done" | "failed";

export interface StageRecord {
  stage: string;
  prompt_digest: string;
  prompt_text: string;
  response_text: string;
  parsed: Record<string, string>;
}

export interface VerdictRecord {
  c_ooc: 0 | 1;
  explanation: string;
  trace: StageRecord[];
  config_used: Record<string, boolean>;
}

export interface JobView {
  job_id: string;
  request: { caption: string; image_ref: string };
  state: JobState;
  result: VerdictRecord | null;
  error: string | null;
}

export interface EvidenceHit {
  record_id: string;
  source_news_id: string;
  payload: string;
  distance: number;
}

export interface EvidenceRecord {
  visual_hits: EvidenceHit[];
  textual_hits: EvidenceHit[];
  event_hits: EvidenceHit[];
  verified: boolean;
}

export interface RankSample {
  sample_id: string;
  caption: string;
  image_ref: string;
  explanations: Record<string, string>;
}

export interface RankSamplesResponse {
  methods: string[];
  samples: RankSample[];
}

export interface RankReport {
  methods: string[];
  means: Record<string, number>;
  submissions: number;
}
