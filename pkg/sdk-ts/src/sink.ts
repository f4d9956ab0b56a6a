/**
 * Event sinks: append-to-file or TCP line socket (the ingestion
 * service's `ingest --listen` endpoint).
 */

import * as fs from "node:fs";
import * as net from "node:net";

export interface Sink {
  write(line: string): void;
  close(): Promise<void>;
}

class FileSink implements Sink {
  private stream: fs.WriteStream;

  constructor(path: string) {
    this.stream = fs.createWriteStream(path, { flags: "a", encoding: "utf-8" });
  }

  write(line: string): void {
    this.stream.write(line + "\n");
  }

  close(): Promise<void> {
    return new Promise((resolve, reject) => {
      this.stream.end((err?: Error | null) => (err ? reject(err) : resolve()));
    });
  }
}

class SocketSink implements Sink {
  constructor(private socket: net.Socket) {}

  write(line: string): void {
    this.socket.write(line + "\n");
  }

  close(): Promise<void> {
    return new Promise((resolve) => this.socket.end(() => resolve()));
  }
}

const HOST_PORT = /^(.+):(\d+)$/;

/** Open a sink from its spec: "HOST:PORT" connects, anything else is a file path. */
export function openSink(spec: string): Promise<Sink> {
  const m = HOST_PORT.exec(spec);
  if (m && !spec.includes("/")) {
    const host = m[1];
    const port = Number(m[2]);
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port }, () =>
        resolve(new SocketSink(socket)),
      );
      socket.on("error", reject);
    });
  }
  return Promise.resolve(new FileSink(spec));
}
