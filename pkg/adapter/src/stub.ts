/**
 * Stub echo model: repeats the request payload with a seeded word dropout,
 * so repeated passes over one utterance disagree exactly the way a
 * dropout-perturbed model's transcripts would, with zero ML weights.
 *
 * The corruption is a pure function of (payload, pass_seed); the golden
 * transcripts in protocol_goldens/ pin it byte for byte. Changing anything
 * here is a protocol-breaking change.
 */

import { Model } from "./model";
import { SplitMix64 } from "./rng";

export const DROP_RATE = 0.15;

export function dropoutEcho(payload: string, passSeed: bigint, dropRate = DROP_RATE): string {
  const words = payload.split(/\s+/).filter((w) => w.length > 0);
  const rng = new SplitMix64(passSeed);
  const kept = words.filter(() => rng.nextUnit() >= dropRate);
  return kept.join(" ");
}

export function createStubModel(): Model {
  return {
    name: "stub-echo",
    supportsDropout: true,
    transcribe(payload: string, _passIndex: number, passSeed: bigint): string {
      return dropoutEcho(payload, passSeed);
    },
    adapt(_manifestRef: string): boolean {
      // inference-only reference: acknowledge without finetuning
      return false;
    },
  };
}
