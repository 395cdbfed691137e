import { afterEach, beforeEach, describe, expect, it } from 'vitest';

import { GatewayClient } from '../src/client.js';
import { ConsoleSession } from '../src/console.js';
import { ConsoleServer } from '../src/server.js';
import {
  FakeGateway,
  Handler,
  makeNegotiation,
  makeRow,
  makeService,
} from './fake_gateway.js';

const SERVICES = [
  makeService('svc-000004', 'portco', 'Sea freight', { price: 100 }),
  makeService('svc-000003', 'roadco', 'Road freight', { price: 110 }),
];

function handlers(): Record<string, Handler> {
  return {
    authenticate: (r) => {
      if (r.login === 'newco') {
        return { ok: false, error: 'unknown-user-error',
                 message: 'no account newco' } as any;
      }
      return { 'session-id': 'sess-1', 'account-id': r.login };
    },
    'submit-request': () => ({ 'request-id': 'req-1', source: 'central',
                               hops: 4 }),
    'list-results': () => ({
      source: 'central',
      hops: 4,
      results: SERVICES.map((s) => makeRow(s)),
    }),
    'list-proposals': () => ({ ranked: [] }),
    'choose-service': () => ({
      'negotiation-id': 'neg-000001',
      negotiation: makeNegotiation(),
    }),
    'negotiation-status': () => ({ negotiation: makeNegotiation() }),
  };
}

async function post(base: string, path: string,
                    form: Record<string, string>): Promise<Response> {
  return fetch(base + path, {
    method: 'POST',
    redirect: 'manual',
    headers: { 'content-type': 'application/x-www-form-urlencoded' },
    body: new URLSearchParams(form).toString(),
  });
}

describe('ConsoleServer routes', () => {
  let gateway: FakeGateway;
  let server: ConsoleServer;
  let session: ConsoleSession;
  let base: string;

  beforeEach(async () => {
    gateway = new FakeGateway(handlers());
    const gatewayPort = await gateway.listen();
    session = new ConsoleSession(
      await GatewayClient.connect('127.0.0.1', gatewayPort));
    server = new ConsoleServer(session);
    const port = await server.listen(0);
    base = `http://127.0.0.1:${port}`;
  });

  afterEach(() => {
    server.close();
    session.client.close();
    gateway.close();
  });

  it('serves the login view before sign-in', async () => {
    const html = await (await fetch(base + '/')).text();
    expect(html).toContain('login-view');
  });

  it('redirects to the workspace after a good login', async () => {
    const res = await post(base, '/login',
      { login: 'acme', password: 'pw', role: 'customer' });
    expect(res.status).toBe(303);
    const html = await (await fetch(base + '/')).text();
    expect(html).toContain('query-form');
  });

  it('offers registration for an unknown login', async () => {
    const res = await post(base, '/login',
      { login: 'newco', password: 'pw', role: 'provider' });
    const html = await res.text();
    expect(html).toContain('registration-form');
    expect(html).toContain('newco');
  });

  it('renders gateway-ordered results and routes choose by service id',
     async () => {
    await post(base, '/login',
      { login: 'acme', password: 'pw', role: 'customer' });
    const submit = await post(base, '/query', {
      category: 'Transport',
      'ontology-id': 'port',
      'required-outputs': 'Transport',
      'provided-inputs': 'Cargo',
      preferences: 'price:1:cost:50:150',
    });
    expect(submit.headers.get('location')).toBe('/results/req-1');

    const html = await (await fetch(base + '/results/req-1')).text();
    const displayed = [...html.matchAll(/<tr data-service-id="([^"]+)"/g)]
      .map((m) => m[1]);
    expect(displayed).toEqual(['svc-000004', 'svc-000003']);

    const choose = await post(base, '/choose',
      { 'request-id': 'req-1', 'service-id': 'svc-000003' });
    expect(choose.headers.get('location')).toBe('/negotiation/neg-000001');
    const wire = gateway.requests.find((r) => r.op === 'choose-service');
    expect(wire['service-id']).toBe('svc-000003');
  });

  it('shows the negotiation panel with a polling refresh while open',
     async () => {
    const html = await (await fetch(base + '/negotiation/neg-000001')).text();
    expect(html).toContain('negotiation-panel');
    expect(html).toContain('http-equiv="refresh"');
  });
});
