import * as net from 'node:net';

// One JSON object per line in each direction; the gateway answers
// requests on a connection strictly in order, so a FIFO of pending
// resolvers is enough to pair responses with requests.

export class NdjsonConnection {
  private buffer = '';
  private pending: Array<{
    resolve: (value: any) => void;
    reject: (err: Error) => void;
  }> = [];

  private constructor(private socket: net.Socket) {
    socket.setEncoding('utf-8');
    socket.on('data', (chunk: string) => this.onData(chunk));
    socket.on('error', (err) => this.failAll(err));
    socket.on('close', () => this.failAll(new Error('connection closed')));
  }

  static connect(host: string, port: number): Promise<NdjsonConnection> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port });
      socket.once('connect', () => resolve(new NdjsonConnection(socket)));
      socket.once('error', reject);
    });
  }

  request(body: object): Promise<any> {
    return new Promise((resolve, reject) => {
      this.pending.push({ resolve, reject });
      this.socket.write(JSON.stringify(body) + '\n');
    });
  }

  close(): void {
    this.pending = [];
    this.socket.destroy();
  }

  private onData(chunk: string): void {
    this.buffer += chunk;
    let idx: number;
    while ((idx = this.buffer.indexOf('\n')) >= 0) {
      const line = this.buffer.slice(0, idx).trim();
      this.buffer = this.buffer.slice(idx + 1);
      if (line === '') continue;
      const waiter = this.pending.shift();
      if (!waiter) continue;
      try {
        waiter.resolve(JSON.parse(line));
      } catch (err) {
        waiter.reject(err as Error);
      }
    }
  }

  private failAll(err: Error): void {
    const waiters = this.pending;
    this.pending = [];
    for (const w of waiters) w.reject(err);
  }
}
