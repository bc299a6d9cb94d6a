/**
 * Deterministic 64-bit RNG (splitmix64) over BigInt.
 *
 * Pass seeds arrive as unsigned 64-bit integers and must drive the exact
 * same corruption everywhere, so all state stays in BigInt and only the
 * final unit-interval draw is narrowed to a double.
 */

const MASK64 = (1n << 64n) - 1n;

export function mix64(x: bigint): bigint {
  x = (x + 0x9e3779b97f4a7c15n) & MASK64;
  let z = x;
  z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
  z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
  return z ^ (z >> 31n);
}

export class SplitMix64 {
  private state: bigint;

  constructor(seed: bigint) {
    this.state = seed & MASK64;
  }

  next(): bigint {
    this.state = (this.state + 0x9e3779b97f4a7c15n) & MASK64;
    let z = this.state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
    return z ^ (z >> 31n);
  }

  /** Uniform double in [0, 1) from the top 53 bits. */
  nextUnit(): number {
    return Number(this.next() >> 11n) / 2 ** 53;
  }
}
