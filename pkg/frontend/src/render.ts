/**
 * HTML renderers for the console views. Pure string functions so they
 * are unit-testable without a browser; main.ts injects the output into
 * the page. Every figure shown comes straight out of a service
 * response; nothing is recomputed client-side.
 */

import type { EvidenceHit, EvidenceRecord, JobView, RankReport, StageRecord } from "./types";
import type { RankCard } from "./ranks";
import { duplicateRanks, isCompletePermutation } from "./ranks";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Verdict badge; non-done jobs never show a verdict. */
export function renderJobStatus(job: JobView): string {
  if (job.state === "done" && job.result) {
    const ooc = job.result.c_ooc === 1;
    const badge = ooc ? "OOC" : "PRISTINE";
    const cls = ooc ? "badge badge-ooc" : "badge badge-pristine";
    return `<span class="${cls}">${badge}</span>`;
  }
  if (job.state === "failed") {
    return `<span class="badge badge-failed">FAILED: ${escapeHtml(job.error ?? "unknown error")}</span>`;
  }
  return `<span class="badge badge-pending">${job.state}…</span>`;
}

export function renderExplanation(job: JobView): string {
  if (job.state !== "done" || !job.result) {
    return "";
  }
  return `<p class="explanation">${escapeHtml(job.result.explanation)}</p>`;
}

function renderHitRow(hit: EvidenceHit): string {
  return (
    `<tr><td>${escapeHtml(hit.source_news_id)}</td>` +
    `<td class="dist">${hit.distance.toFixed(4)}</td>` +
    `<td>${escapeHtml(hit.payload)}</td></tr>`
  );
}

export function renderEvidence(evidence: EvidenceRecord | null): string {
  if (!evidence) {
    return `<p class="muted">Evidence becomes available when the job finishes.</p>`;
  }
  const sections: Array<[string, EvidenceHit[]]> = [
    ["Visual entities", evidence.visual_hits],
    ["Textual entities", evidence.textual_hits],
    ["Events", evidence.event_hits],
  ];
  return sections
    .map(([title, hits]) => {
      const rows = hits.length
        ? hits.map(renderHitRow).join("")
        : `<tr><td colspan="3" class="muted">no hits</td></tr>`;
      return (
        `<section class="evidence"><h3>${title}</h3>` +
        `<table><thead><tr><th>source</th><th>distance</th><th>payload</th></tr></thead>` +
        `<tbody>${rows}</tbody></table></section>`
      );
    })
    .join("");
}

const FLAG_LINE = /^\s*(FLAGS:|- )/;
const ELEMENT_LINE = /^\s*ELEMENT\s+\w+:/;
const VERDICT_LINE = /^\s*VERDICT:\s*(OOC|PRISTINE)\s*$/;

/** Stage responses with the structured lines highlighted. */
export function renderTrace(stages: StageRecord[]): string {
  if (!stages.length) {
    return `<p class="muted">Trace becomes available when the job finishes.</p>`;
  }
  return stages
    .map((stage) => {
      const body = stage.response_text
        .split("\n")
        .map((line) => {
          const escaped = escapeHtml(line);
          if (ELEMENT_LINE.test(line)) return `<span class="hl-element">${escaped}</span>`;
          if (FLAG_LINE.test(line)) return `<span class="hl-flag">${escaped}</span>`;
          if (VERDICT_LINE.test(line)) return `<span class="hl-verdict">${escaped}</span>`;
          return escaped;
        })
        .join("\n");
      return (
        `<section class="stage"><h3>${escapeHtml(stage.stage)}</h3>` +
        `<pre>${body}</pre>` +
        `<p class="digest">prompt ${escapeHtml(stage.prompt_digest.slice(0, 12))}</p></section>`
      );
    })
    .join("");
}

/** One blinded rank card; the submit button unlocks on a permutation. */
export function renderRankCard(card: RankCard): string {
  const m = card.displayOrder.length;
  const options = (position: number) =>
    [...Array(m).keys()]
      .map((i) => {
        const rank = i + 1;
        const selected = card.chosen[position] === rank ? " selected" : "";
        return `<option value="${rank}"${selected}>${rank}</option>`;
      })
      .join("");
  const blocks = card.explanations
    .map(
      (text, position) =>
        `<article class="candidate"><h4>Explanation ${position + 1}</h4>` +
        `<p>${escapeHtml(text)}</p>` +
        `<label>rank <select data-position="${position}">` +
        `<option value="0"${card.chosen[position] === 0 ? " selected" : ""}>-</option>` +
        `${options(position)}</select></label></article>`,
    )
    .join("");
  const complete = isCompletePermutation(card.chosen);
  const dupes = duplicateRanks(card.chosen);
  const warning = dupes.length
    ? `<p class="warning">duplicate rank${dupes.length > 1 ? "s" : ""}: ${dupes.join(", ")}</p>`
    : "";
  return (
    `<div class="rank-card" data-sample="${escapeHtml(card.sampleId)}">` +
    `<p class="caption">${escapeHtml(card.caption)}</p>` +
    blocks +
    warning +
    `<button class="submit-ranks"${complete ? "" : " disabled"}>Submit ranking</button></div>`
  );
}

/** Live mean-rank table; means arrive from the service and are shown to 2 dp. */
export function renderReport(report: RankReport): string {
  if (!report.submissions) {
    return `<p class="muted">No submissions yet.</p>`;
  }
  const rows = report.methods
    .map((method) => {
      const mean = report.means[method];
      const shown = mean === undefined ? "-" : mean.toFixed(2);
      return `<tr><td>${escapeHtml(method)}</td><td class="mean">${shown}</td></tr>`;
    })
    .join("");
  return (
    `<table class="report"><thead><tr><th>method</th><th>mean rank</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>` +
    `<p class="muted">${report.submissions} submission${report.submissions === 1 ? "" : "s"}</p>`
  );
}
