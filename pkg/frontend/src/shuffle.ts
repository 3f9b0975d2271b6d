/**
 * Deterministic shuffling for the blinded rank study. The same
 * (judge, sample) pair always yields the same explanation order, so a
 * judge who revisits a card sees it unchanged, while different judges
 * get different orders.
 */

/** FNV-1a over the seed string, then an xorshift32 stream. */
export function seededRng(seed: string): () => number {
  let h = 0x811c9dc5;
  for (let i = 0; i < seed.length; i++) {
    h ^= seed.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  let state = h >>> 0 || 0x6d2b79f5;
  return () => {
    state ^= state << 13;
    state ^= state >>> 17;
    state ^= state << 5;
    state >>>= 0;
    return state / 0x100000000;
  };
}

export function seededShuffle<T>(items: readonly T[], seed: string): T[] {
  const rng = seededRng(seed);
  const result = [...items];
  for (let i = result.length - 1; i > 0; i--) {
    const j = Math.floor(rng() * (i + 1));
    [result[i], result[j]] = [result[j], result[i]];
  }
  return result;
}

export function cardSeed(judgeId: string, sampleId: string): string {
  return `${judgeId}::${sampleId}`;
}
