import { describe, expect, it } from "vitest";

import { buildCard, setRank } from "../src/ranks";
import {
  renderEvidence,
  renderJobStatus,
  renderRankCard,
  renderReport,
  renderTrace,
} from "../src/render";
import type { EvidenceRecord, JobView, RankSample, StageRecord } from "../src/types";

function jobView(state: JobView["state"], cOoc: 0 | 1 = 1): JobView {
  return {
    job_id: "j1",
    request: { caption: "c", image_ref: "" },
    state,
    error: state === "failed" ? "boom" : null,
    result:
      state === "done"
        ? { c_ooc: cOoc, explanation: "because reasons", trace: [], config_used: {} }
        : null,
  };
}

describe("renderJobStatus", () => {
  it("shows the OOC badge for a done out-of-context job", () => {
    expect(renderJobStatus(jobView("done", 1))).toContain("OOC");
    expect(renderJobStatus(jobView("done", 0))).toContain("PRISTINE");
  });

  it("never shows a verdict while the job is queued or running", () => {
    for (const state of ["queued", "running"] as const) {
      const html = renderJobStatus(jobView(state));
      expect(html).not.toContain("OOC");
      expect(html).not.toContain("PRISTINE");
    }
  });

  it("surfaces failure text", () => {
    expect(renderJobStatus(jobView("failed"))).toContain("boom");
  });
});

describe("renderEvidence", () => {
  const evidence: EvidenceRecord = {
    visual_hits: [{ record_id: "v1", source_news_id: "n1", payload: "bridge", distance: 0.12345 }],
    textual_hits: [],
    event_hits: [
      { record_id: "e1", source_news_id: "n2", payload: "Mayor opens bridge", distance: 0.5 },
    ],
    verified: true,
  };

  it("renders three sections with distances to four places", () => {
    const html = renderEvidence(evidence);
    expect(html).toContain("Visual entities");
    expect(html).toContain("Textual entities");
    expect(html).toContain("Events");
    expect(html).toContain("0.1235");
    expect(html).toContain("0.5000");
  });

  it("handles the not-yet-available case", () => {
    expect(renderEvidence(null)).toContain("available when the job finishes");
  });
});

describe("renderTrace", () => {
  const stages: StageRecord[] = [
    {
      stage: "retrieval",
      prompt_digest: "abcdef1234567890",
      prompt_text: "p",
      response_text: "looked at evidence\nFLAGS:\n- low event overlap (source=n2)",
      parsed: {},
    },
    {
      stage: "detective",
      prompt_digest: "fedcba0987654321",
      prompt_text: "p",
      response_text: "ELEMENT place: contradicted — wrong city",
      parsed: {},
    },
  ];

  it("highlights FLAGS bullets and ELEMENT lines", () => {
    const html = renderTrace(stages);
    expect(html).toContain("hl-flag");
    expect(html).toContain("hl-element");
    expect(html).toContain("low event overlap");
  });

  it("escapes markup in responses", () => {
    const hostile: StageRecord[] = [
      {
        stage: "analyst",
        prompt_digest: "00",
        prompt_text: "p",
        response_text: "<script>alert(1)</script>\nVERDICT: OOC",
        parsed: {},
      },
    ];
    const html = renderTrace(hostile);
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("renderRankCard", () => {
  const sample: RankSample = {
    sample_id: "s1",
    caption: "caption",
    image_ref: "",
    explanations: { m1: "a", m2: "b", m3: "c", m4: "d" },
  };
  const methods = ["m1", "m2", "m3", "m4"];

  it("blinds method names behind Explanation 1..M labels", () => {
    const html = renderRankCard(buildCard("judge", sample, methods));
    expect(html).toContain("Explanation 1");
    expect(html).toContain("Explanation 4");
    for (const method of methods) {
      expect(html).not.toContain(`>${method}<`);
    }
  });

  it("disables submit until the ranks form a permutation", () => {
    let card = buildCard("judge", sample, methods);
    expect(renderRankCard(card)).toContain("disabled");
    card = setRank(card, 0, 1);
    card = setRank(card, 1, 1); // duplicate
    card = setRank(card, 2, 3);
    card = setRank(card, 3, 4);
    const withDuplicate = renderRankCard(card);
    expect(withDuplicate).toContain("disabled");
    expect(withDuplicate).toContain("duplicate rank");
    card = setRank(card, 1, 2);
    expect(renderRankCard(card)).not.toContain("disabled");
  });
});

describe("renderReport", () => {
  it("shows service means to two decimals", () => {
    const html = renderReport({
      methods: ["m1", "m2", "m3", "m4"],
      means: { m1: 1.5, m2: 1.5, m3: 3.0, m4: 4.0 },
      submissions: 2,
    });
    expect(html).toContain("1.50");
    expect(html).toContain("3.00");
    expect(html).toContain("4.00");
    expect(html).toContain("2 submissions");
  });

  it("handles the empty study", () => {
    expect(renderReport({ methods: [], means: {}, submissions: 0 })).toContain("No submissions");
  });
});
