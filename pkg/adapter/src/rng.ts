/** Deterministic numerics: string hashing, seeded PRNG, gaussian draws.
 *
 * Everything the adapter emits must be reproducible from the dataset bytes
 * alone, so all randomness is keyed to strings via FNV-1a.
 */

export function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193);
  }
  return hash >>> 0;
}

/** mulberry32: small fast PRNG with 32-bit state. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Standard normal draws via Box-Muller on a seeded uniform stream. */
export function gaussianVector(seedText: string, dim: number): number[] {
  const next = mulberry32(fnv1a(seedText));
  const out: number[] = [];
  while (out.length < dim) {
    const u1 = Math.max(next(), 1e-12);
    const u2 = next();
    const radius = Math.sqrt(-2 * Math.log(u1));
    out.push(radius * Math.cos(2 * Math.PI * u2));
    if (out.length < dim) out.push(radius * Math.sin(2 * Math.PI * u2));
  }
  return out;
}

export function round5(x: number): number {
  return Math.round(x * 1e5) / 1e5;
}

export function round6(x: number): number {
  return Math.round(x * 1e6) / 1e6;
}
