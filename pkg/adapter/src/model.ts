/**
 * The model behind the protocol server.
 *
 * "stub" is the built-in deterministic echo model used for conformance
 * testing. Any other model spec is treated as a path to a CommonJS module
 * exporting createModel(): Model — the extension point for wrapping a real
 * dropout-capable speech model without touching the server.
 */

import * as path from "path";

export interface Model {
  name: string;
  supportsDropout: boolean;
  transcribe(payload: string, passIndex: number, passSeed: bigint): string;
  /** Returns true when the backend actually finetuned on the manifest. */
  adapt(manifestRef: string): boolean;
}

export function loadModel(spec: string): Model {
  if (spec === "stub") {
    const { createStubModel } = require("./stub");
    return createStubModel();
  }
  const resolved = path.resolve(spec);
  let mod: { createModel?: () => Model };
  try {
    mod = require(resolved);
  } catch (err) {
    throw new Error(`cannot load model module ${spec}: ${(err as Error).message}`);
  }
  if (typeof mod.createModel !== "function") {
    throw new Error(`model module ${spec} does not export createModel()`);
  }
  return mod.createModel();
}
