/**
 * Wire protocol framing: newline-delimited JSON, UTF-8, compact separators.
 * Response field order is normative and matches the engine's golden files:
 *
 *   {"type":"pong","backend_name":...,"supports_dropout":...}
 *   {"type":"hypothesis","id":...,"pass_index":...,"text":...}
 *   {"type":"ack","adapted":...}
 *   {"type":"error","message":...}
 *
 * pass_seed is an unsigned 64-bit integer sent as a bare JSON number.
 * JSON.parse would round it through a double, so the digits are lifted out
 * of the raw line and parsed as BigInt before the rest of the message.
 */

export interface ParsedRequest {
  message: Record<string, unknown>;
  passSeed: bigint;
}

const PASS_SEED_PATTERN = /"pass_seed"\s*:\s*(-?\d+)/;

export function parseRequest(line: string): ParsedRequest {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch {
    // engine-version-stable wording; runtime parser details stay out of the wire
    throw new Error("invalid JSON");
  }
  if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
    throw new Error("message must be a JSON object");
  }
  const message = parsed as Record<string, unknown>;
  if (typeof message.type !== "string") {
    throw new Error("message needs a string 'type' field");
  }
  let passSeed = 0n;
  const match = PASS_SEED_PATTERN.exec(line);
  if (match) {
    passSeed = BigInt(match[1]);
    if (passSeed < 0n) {
      throw new Error("pass_seed must be non-negative");
    }
  }
  return { message, passSeed };
}

export function encodeResponse(response: Record<string, unknown>): string {
  return JSON.stringify(response) + "\n";
}

export function pong(backendName: string, supportsDropout: boolean): Record<string, unknown> {
  return { type: "pong", backend_name: backendName, supports_dropout: supportsDropout };
}

export function hypothesis(
  id: string,
  passIndex: number,
  text: string
): Record<string, unknown> {
  return { type: "hypothesis", id, pass_index: passIndex, text };
}

export function ack(adapted: boolean): Record<string, unknown> {
  return { type: "ack", adapted };
}

export function protocolError(message: string): Record<string, unknown> {
  return { type: "error", message };
}
