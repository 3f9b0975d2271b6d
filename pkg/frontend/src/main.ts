/** SPA wiring: detection triage on one tab, the rank study on the other. */

import { ApiError, ServiceClient } from "./api";
import { pollJob } from "./poll";
import { buildCard, setRank, submissionPayload, type RankCard } from "./ranks";
import {
  renderEvidence,
  renderExplanation,
  renderJobStatus,
  renderRankCard,
  renderReport,
  renderTrace,
} from "./render";
import type { RankSamplesResponse } from "./types";

const client = new ServiceClient("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showError(target: HTMLElement, error: unknown): void {
  const message = error instanceof ApiError ? error.detail : String(error);
  target.innerHTML = `<p class="error">${message.replace(/</g, "&lt;")}</p>`;
}

// -- detection triage --

async function onSubmitDetection(): Promise<void> {
  const caption = el<HTMLTextAreaElement>("caption-input").value;
  const imageRef = el<HTMLInputElement>("image-input").value;
  const status = el<HTMLDivElement>("job-status");
  const details = el<HTMLDivElement>("job-details");
  details.innerHTML = "";
  try {
    const { job_id } = await client.submitDetection(caption, imageRef);
    status.innerHTML = `<p>job <code>${job_id}</code> queued</p>`;
    const job = await pollJob(client, job_id, {
      onUpdate: (view) => {
        status.innerHTML = renderJobStatus(view);
      },
    });
    status.innerHTML = renderJobStatus(job);
    if (job.state === "done") {
      const [trace, evidence] = await Promise.all([
        client.getTrace(job_id),
        client.getEvidence(job_id),
      ]);
      details.innerHTML =
        renderExplanation(job) +
        `<h2>Evidence</h2>` +
        renderEvidence(evidence.evidence) +
        `<h2>Reasoning trace</h2>` +
        renderTrace(trace.stages);
    }
  } catch (error) {
    showError(status, error);
  }
}

// -- rank study --

interface StudyState {
  judgeId: string;
  samples: RankSamplesResponse;
  position: number;
  card: RankCard | null;
}

let study: StudyState | null = null;

async function startStudy(): Promise<void> {
  const judgeId = el<HTMLInputElement>("judge-input").value.trim();
  const container = el<HTMLDivElement>("rank-card");
  if (!judgeId) {
    container.innerHTML = `<p class="error">enter a judge id first</p>`;
    return;
  }
  try {
    const samples = await client.getRankSamples();
    study = { judgeId, samples, position: 0, card: null };
    nextCard();
    await refreshReport();
  } catch (error) {
    showError(container, error);
  }
}

function nextCard(): void {
  if (!study) return;
  const container = el<HTMLDivElement>("rank-card");
  if (study.position >= study.samples.samples.length) {
    container.innerHTML = `<p class="done">Study complete. Thank you!</p>`;
    study.card = null;
    return;
  }
  const sample = study.samples.samples[study.position];
  study.card = buildCard(study.judgeId, sample, study.samples.methods);
  container.innerHTML = renderRankCard(study.card);
  wireCard(container);
}

function wireCard(container: HTMLDivElement): void {
  container.querySelectorAll<HTMLSelectElement>("select[data-position]").forEach((select) => {
    select.addEventListener("change", () => {
      if (!study?.card) return;
      const position = Number(select.dataset.position);
      study.card = setRank(study.card, position, Number(select.value));
      container.innerHTML = renderRankCard(study.card);
      wireCard(container);
    });
  });
  container.querySelector<HTMLButtonElement>("button.submit-ranks")?.addEventListener("click", async () => {
    if (!study?.card) return;
    try {
      await client.submitRanking(study.judgeId, study.card.sampleId, submissionPayload(study.card));
      study.position += 1;
      nextCard();
      await refreshReport();
    } catch (error) {
      showError(el<HTMLDivElement>("rank-errors"), error);
    }
  });
}

async function refreshReport(): Promise<void> {
  const target = el<HTMLDivElement>("rank-report");
  try {
    target.innerHTML = renderReport(await client.getRankReport());
  } catch (error) {
    showError(target, error);
  }
}

// -- tabs and boot --

function switchTab(name: "triage" | "study"): void {
  el<HTMLElement>("tab-triage").style.display = name === "triage" ? "block" : "none";
  el<HTMLElement>("tab-study").style.display = name === "study" ? "block" : "none";
}

export function boot(): void {
  el<HTMLButtonElement>("nav-triage").addEventListener("click", () => switchTab("triage"));
  el<HTMLButtonElement>("nav-study").addEventListener("click", () => switchTab("study"));
  el<HTMLButtonElement>("detect-submit").addEventListener("click", () => {
    void onSubmitDetection();
  });
  el<HTMLButtonElement>("study-start").addEventListener("click", () => {
    void startStudy();
  });
  switchTab("triage");
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  boot();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", boot);
}
