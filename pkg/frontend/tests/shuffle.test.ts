import { describe, expect, it } from "vitest";

import { cardSeed, seededRng, seededShuffle } from "../src/shuffle";

const METHODS = ["llava-fewshot", "gpt-fewshot", "staged-llava", "staged-gpt"];

describe("seededRng", () => {
  it("yields the same stream for the same seed", () => {
    const a = seededRng("judge-1::s1");
    const b = seededRng("judge-1::s1");
    for (let i = 0; i < 20; i++) {
      expect(a()).toBe(b());
    }
  });

  it("stays in [0, 1)", () => {
    const rng = seededRng("any-seed");
    for (let i = 0; i < 200; i++) {
      const value = rng();
      expect(value).toBeGreaterThanOrEqual(0);
      expect(value).toBeLessThan(1);
    }
  });
});

describe("seededShuffle", () => {
  it("is deterministic per (judge, sample) seed", () => {
    const first = seededShuffle(METHODS, cardSeed("judge-1", "s1"));
    const second = seededShuffle(METHODS, cardSeed("judge-1", "s1"));
    expect(first).toEqual(second);
  });

  it("permutes without losing elements", () => {
    const out = seededShuffle(METHODS, "whatever");
    expect([...out].sort()).toEqual([...METHODS].sort());
  });

  it("does not mutate its input", () => {
    const input = [...METHODS];
    seededShuffle(input, "seed");
    expect(input).toEqual(METHODS);
  });

  it("gives different judges different orders somewhere in the study", () => {
    const samples = ["s1", "s2", "s3", "s4", "s5"];
    const ordersDiffer = samples.some(
      (sample) =>
        seededShuffle(METHODS, cardSeed("judge-1", sample)).join() !==
        seededShuffle(METHODS, cardSeed("judge-2", sample)).join(),
    );
    expect(ordersDiffer).toBe(true);
  });
});
