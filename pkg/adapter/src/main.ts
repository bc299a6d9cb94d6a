/**
 * Entry point: asral-adapter --port 9999 --model stub
 *
 * Options:
 *   --host <addr>    bind address (default 127.0.0.1)
 *   --port <n>       TCP port (default 9999; 0 picks an ephemeral port)
 *   --socket <path>  listen on a UNIX socket instead of TCP
 *   --model <spec>   "stub" or a path to a module exporting createModel()
 */

import { loadModel } from "./model";
import { serve } from "./server";

interface Args {
  host: string;
  port: number;
  socketPath?: string;
  model: string;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { host: "127.0.0.1", port: 9999, model: "stub" };
  for (let i = 0; i < argv.length; i += 1) {
    const flag = argv[i];
    const value = argv[i + 1];
    switch (flag) {
      case "--host":
        args.host = requireValue(flag, value);
        i += 1;
        break;
      case "--port":
        args.port = Number.parseInt(requireValue(flag, value), 10);
        if (Number.isNaN(args.port)) {
          throw new Error("--port must be an integer");
        }
        i += 1;
        break;
      case "--socket":
        args.socketPath = requireValue(flag, value);
        i += 1;
        break;
      case "--model":
        args.model = requireValue(flag, value);
        i += 1;
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  return args;
}

function requireValue(flag: string, value: string | undefined): string {
  if (value === undefined) {
    throw new Error(`${flag} needs a value`);
  }
  return value;
}

async function main(): Promise<void> {
  const args = parseArgs(process.argv.slice(2));
  const model = loadModel(args.model);
  const server = await serve(model, {
    host: args.host,
    port: args.port,
    socketPath: args.socketPath,
  });
  const address = server.address();
  const where =
    typeof address === "string" ? address : `${address?.address}:${address?.port}`;
  process.stderr.write(
    `asral-adapter listening on ${where} (model=${model.name}, ` +
      `supports_dropout=${model.supportsDropout})\n`
  );
}

main().catch((err: Error) => {
  process.stderr.write(`error: ${err.message}\n`);
  process.exit(1);
});
