/**
 * Rank-card state for the blinded explanation study.
 *
 * Method identities are hidden behind "Explanation 1..M" labels whose
 * order is seeded per (judge, sample). The submit payload maps the
 * chosen ranks back onto real method names; submission is possible only
 * when the chosen ranks form a strict permutation of 1..M.
 */

import { cardSeed, seededShuffle } from "./shuffle";
import type { RankSample } from "./types";

export interface RankCard {
  sampleId: string;
  caption: string;
  /** Methods in blinded display order; index i renders as "Explanation i+1". */
  displayOrder: string[];
  /** Explanation text per display position. */
  explanations: string[];
  /** Chosen rank per display position (0 = unranked). */
  chosen: number[];
}

export function buildCard(judgeId: string, sample: RankSample, methods: string[]): RankCard {
  const displayOrder = seededShuffle(methods, cardSeed(judgeId, sample.sample_id));
  return {
    sampleId: sample.sample_id,
    caption: sample.caption,
    displayOrder,
    explanations: displayOrder.map((method) => sample.explanations[method] ?? ""),
    chosen: displayOrder.map(() => 0),
  };
}

export function setRank(card: RankCard, position: number, rank: number): RankCard {
  const chosen = [...card.chosen];
  chosen[position] = rank;
  return { ...card, chosen };
}

/** Strict permutation of 1..M chosen: the submit gate. */
export function isCompletePermutation(chosen: readonly number[]): boolean {
  const m = chosen.length;
  const seen = new Set<number>();
  for (const rank of chosen) {
    if (!Number.isInteger(rank) || rank < 1 || rank > m || seen.has(rank)) {
      return false;
    }
    seen.add(rank);
  }
  return seen.size === m;
}

/** Ranks that appear more than once (for inline warnings). */
export function duplicateRanks(chosen: readonly number[]): number[] {
  const counts = new Map<number, number>();
  for (const rank of chosen) {
    if (rank >= 1) counts.set(rank, (counts.get(rank) ?? 0) + 1);
  }
  return [...counts.entries()].filter(([, n]) => n > 1).map(([rank]) => rank);
}

/** Map display-position ranks back to method-keyed ranks for the service. */
export function submissionPayload(card: RankCard): Record<string, number> {
  const ranks: Record<string, number> = {};
  card.displayOrder.forEach((method, position) => {
    ranks[method] = card.chosen[position];
  });
  return ranks;
}
