/**
 * Typed client for the detection service. 4xx/5xx bodies are surfaced
 * verbatim in ApiError.detail so the UI can show exactly what the
 * service said.
 */

import type {
  EvidenceRecord,
  JobView,
  RankReport,
  RankSamplesResponse,
  StageRecord,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
  text(): Promise<string>;
}>;

export class ServiceClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = fetch.bind(globalThis),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail: string;
      try {
        const body = (await response.json()) as { detail?: unknown };
        detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail ?? body);
      } catch {
        detail = await response.text();
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  submitDetection(caption: string, imageRef = "", imageB64?: string): Promise<{ job_id: string }> {
    const body: Record<string, string> = { caption, image_ref: imageRef };
    if (imageB64) body.image_b64 = imageB64;
    return this.request("/detect", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getJob(jobId: string): Promise<JobView> {
    return this.request(`/jobs/${jobId}`);
  }

  getTrace(jobId: string): Promise<{ job_id: string; state: string; stages: StageRecord[] }> {
    return this.request(`/jobs/${jobId}/trace`);
  }

  getEvidence(jobId: string): Promise<{ job_id: string; state: string; evidence: EvidenceRecord | null }> {
    return this.request(`/jobs/${jobId}/evidence`);
  }

  getRankSamples(): Promise<RankSamplesResponse> {
    return this.request("/rank-study/samples");
  }

  submitRanking(judgeId: string, sampleId: string, ranks: Record<string, number>): Promise<{ accepted: boolean }> {
    return this.request("/rank-study/submissions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ judge_id: judgeId, sample_id: sampleId, ranks }),
    });
  }

  getRankReport(): Promise<RankReport> {
    return this.request("/rank-study/report");
  }
}
