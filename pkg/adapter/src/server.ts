/**
 * Protocol server: one JSON message per line over TCP or a UNIX socket.
 *
 * Requests on one connection are answered strictly in order (single
 * in-flight request per connection); any number of connections may be open.
 * Malformed lines produce {"type":"error",...} and the connection stays up.
 */

import * as net from "net";

import { Model } from "./model";
import {
  ack,
  encodeResponse,
  hypothesis,
  parseRequest,
  pong,
  protocolError,
} from "./protocol";

export function handleLine(model: Model, line: string): string {
  let response: Record<string, unknown>;
  try {
    const { message, passSeed } = parseRequest(line);
    switch (message.type) {
      case "ping":
        response = pong(model.name, model.supportsDropout);
        break;
      case "transcribe": {
        const id = typeof message.id === "string" ? message.id : "";
        const passIndex = typeof message.pass_index === "number" ? message.pass_index : 0;
        const payload = typeof message.payload === "string" ? message.payload : "";
        response = hypothesis(id, passIndex, model.transcribe(payload, passIndex, passSeed));
        break;
      }
      case "adapt": {
        const ref = typeof message.manifest_ref === "string" ? message.manifest_ref : "";
        response = ack(model.adapt(ref));
        break;
      }
      default:
        response = protocolError(`unknown message type '${String(message.type)}'`);
    }
  } catch (err) {
    response = protocolError(`malformed message: ${(err as Error).message}`);
  }
  return encodeResponse(response);
}

export interface ServeOptions {
  host?: string;
  port?: number;
  socketPath?: string;
}

export function createServer(model: Model): net.Server {
  return net.createServer((socket) => {
    socket.setEncoding("utf-8");
    let buffer = "";
    socket.on("data", (chunk: string) => {
      buffer += chunk;
      let index = buffer.indexOf("\n");
      while (index >= 0) {
        const line = buffer.slice(0, index);
        buffer = buffer.slice(index + 1);
        if (line.trim().length > 0) {
          socket.write(handleLine(model, line));
        }
        index = buffer.indexOf("\n");
      }
    });
    socket.on("error", () => {
      socket.destroy();
    });
  });
}

export function serve(model: Model, options: ServeOptions): Promise<net.Server> {
  const server = createServer(model);
  return new Promise((resolve, reject) => {
    server.once("error", reject);
    const onListening = () => resolve(server);
    if (options.socketPath) {
      server.listen(options.socketPath, onListening);
    } else {
      server.listen(options.port ?? 0, options.host ?? "127.0.0.1", onListening);
    }
  });
}
