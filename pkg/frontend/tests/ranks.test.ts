import { describe, expect, it } from "vitest";

import {
  buildCard,
  duplicateRanks,
  isCompletePermutation,
  setRank,
  submissionPayload,
} from "../src/ranks";
import type { RankSample } from "../src/types";

const METHODS = ["m1", "m2", "m3", "m4"];

const SAMPLE: RankSample = {
  sample_id: "s1",
  caption: "Runners cross the finish line",
  image_ref: "img/s1.jpg",
  explanations: {
    m1: "first method text",
    m2: "second method text",
    m3: "third method text",
    m4: "fourth method text",
  },
};

describe("buildCard", () => {
  it("shuffles explanations into the blinded display order", () => {
    const card = buildCard("judge-1", SAMPLE, METHODS);
    expect([...card.displayOrder].sort()).toEqual(METHODS);
    card.displayOrder.forEach((method, i) => {
      expect(card.explanations[i]).toBe(SAMPLE.explanations[method]);
    });
    expect(card.chosen).toEqual([0, 0, 0, 0]);
  });

  it("is stable for the same judge and sample", () => {
    const a = buildCard("judge-1", SAMPLE, METHODS);
    const b = buildCard("judge-1", SAMPLE, METHODS);
    expect(a.displayOrder).toEqual(b.displayOrder);
  });
});

describe("isCompletePermutation", () => {
  it("accepts a strict 1..M assignment", () => {
    expect(isCompletePermutation([2, 1, 4, 3])).toBe(true);
  });

  it("rejects duplicates, gaps and out-of-range ranks", () => {
    expect(isCompletePermutation([1, 1, 3, 4])).toBe(false);
    expect(isCompletePermutation([1, 2, 3, 0])).toBe(false);
    expect(isCompletePermutation([1, 2, 3, 5])).toBe(false);
    expect(isCompletePermutation([1.5, 2, 3, 4])).toBe(false);
  });
});

describe("duplicateRanks", () => {
  it("lists ranks chosen more than once", () => {
    expect(duplicateRanks([1, 1, 3, 0])).toEqual([1]);
    expect(duplicateRanks([1, 2, 3, 4])).toEqual([]);
  });
});

describe("setRank / submissionPayload", () => {
  it("round-trips display positions back onto method names", () => {
    let card = buildCard("judge-1", SAMPLE, METHODS);
    card.displayOrder.forEach((_, position) => {
      card = setRank(card, position, position + 1);
    });
    const payload = submissionPayload(card);
    card.displayOrder.forEach((method, position) => {
      expect(payload[method]).toBe(position + 1);
    });
    expect(Object.keys(payload).sort()).toEqual(METHODS);
  });

  it("does not mutate the previous card state", () => {
    const card = buildCard("judge-1", SAMPLE, METHODS);
    const next = setRank(card, 0, 2);
    expect(card.chosen[0]).toBe(0);
    expect(next.chosen[0]).toBe(2);
  });
});
