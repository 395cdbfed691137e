import * as net from 'node:net';

import type { Negotiation, ResultRow, Service } from '../src/protocol.js';

export type Handler = (request: any) => object;

/**
 * Minimal scripted stand-in for the real gateway: an NDJSON TCP server
 * answering each op from a handler table.  Records every request so
 * tests can assert exactly what the console put on the wire.
 */
export class FakeGateway {
  requests: any[] = [];
  private server: net.Server;
  private sockets = new Set<net.Socket>();

  constructor(private handlers: Record<string, Handler>) {
    this.server = net.createServer((socket) => {
      this.sockets.add(socket);
      socket.on('close', () => this.sockets.delete(socket));
      let buffer = '';
      socket.on('data', (chunk) => {
        buffer += chunk.toString('utf-8');
        let idx: number;
        while ((idx = buffer.indexOf('\n')) >= 0) {
          const line = buffer.slice(0, idx);
          buffer = buffer.slice(idx + 1);
          socket.write(JSON.stringify(this.answer(line)) + '\n');
        }
      });
    });
  }

  private answer(line: string): object {
    let request: any;
    try {
      request = JSON.parse(line);
    } catch {
      return { ok: false, error: 'malformed-request', message: 'bad json' };
    }
    this.requests.push(request);
    const handler = this.handlers[request.op];
    if (!handler) {
      return {
        ok: false,
        error: 'malformed-request',
        message: `unknown op ${request.op}`,
      };
    }
    return { ok: true, ...handler(request) };
  }

  listen(): Promise<number> {
    return new Promise((resolve) => {
      this.server.listen(0, '127.0.0.1', () => {
        resolve((this.server.address() as net.AddressInfo).port);
      });
    });
  }

  close(): void {
    for (const socket of this.sockets) socket.destroy();
    this.server.close();
  }
}

export function makeService(id: string, provider: string, name: string,
                            attributes: Record<string, number>): Service {
  return {
    'service-id': id,
    'provider-id': provider,
    name,
    category: 'Transport',
    inputs: [['cargo', 'Cargo']],
    outputs: [['shipment', 'Transport']],
    attributes,
    'ontology-id': 'port',
  };
}

export function makeRow(service: Service,
                        degree: ResultRow['degree'] = 'plugin'): ResultRow {
  return { service, degree, 'component-degrees': [degree] };
}

export function makeNegotiation(
  overrides: Partial<Negotiation> = {},
): Negotiation {
  return {
    'negotiation-id': 'neg-000001',
    state: 'open',
    round: 1,
    'max-rounds': 8,
    'provider-offer': { price: 110, 'delivery-time': 72 },
    'customer-offer': { price: 60, 'delivery-time': 36 },
    transcript: [
      { side: 'provider', round: 0, offer: { price: 110, 'delivery-time': 72 } },
      { side: 'customer', round: 1, offer: { price: 60, 'delivery-time': 36 } },
    ],
    'contract-id': null,
    'service-id': 'svc-000003',
    ...overrides,
  };
}
