import { afterEach, beforeEach, describe, expect, it } from 'vitest';

import { GatewayClient, GatewayError } from '../src/client.js';
import { ConsoleSession } from '../src/console.js';
import type { Query } from '../src/protocol.js';
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

const QUERY: Query = {
  'query-id': 'q-test',
  category: 'Transport',
  'required-outputs': ['Transport'],
  'provided-inputs': ['Cargo'],
  'ontology-id': 'port',
  preferences: {
    weights: { price: 1 },
    directions: { price: 'cost' },
    bounds: { price: [50, 150] },
  },
};

function handlers(): Record<string, Handler> {
  return {
    authenticate: (r) => ({ 'session-id': 'sess-1', 'account-id': r.login }),
    register: (r) => ({ 'account-id': r.login }),
    publish: () => ({ 'service-id': 'svc-000007' }),
    'submit-request': () => ({ 'request-id': 'req-1', source: 'central', hops: 4 }),
    'list-results': () => ({
      source: 'central',
      hops: 4,
      results: SERVICES.map((s) => makeRow(s)),
    }),
    'choose-service': () => ({
      'negotiation-id': 'neg-000001',
      negotiation: makeNegotiation(),
    }),
    'negotiation-status': () => ({ negotiation: makeNegotiation() }),
    accept: () => ({
      contract: {
        'contract-id': 'ctr-000001',
        'customer-account': 'acme',
        'provider-account': 'roadco',
        'service-id': 'svc-000003',
        'agreed-attributes': { price: 110 },
        'concluded-at': 10,
        'negotiation-rounds': 1,
      },
    }),
  };
}

describe('ConsoleSession against a scripted gateway', () => {
  let gateway: FakeGateway;
  let session: ConsoleSession;

  beforeEach(async () => {
    const table = handlers();
    gateway = new FakeGateway(table);
    // wire-level errors need the envelope, not a thrown exception
    const registered = new Set<string>();
    table.register = (r) => {
      registered.add(r.login);
      return { 'account-id': r.login };
    };
    table.authenticate = (r) => {
      if (r.login === 'ghost' && !registered.has('ghost')) {
        return { ok: false, error: 'unknown-user-error',
                 message: 'no account ghost' } as any;
      }
      if (r.password === 'bad') {
        return { ok: false, error: 'wrong-credentials-error',
                 message: 'wrong password for acme' } as any;
      }
      return { 'session-id': 'sess-1', 'account-id': r.login };
    };
    const port = await gateway.listen();
    session = new ConsoleSession(await GatewayClient.connect('127.0.0.1', port));
  });

  afterEach(() => {
    session.client.close();
    gateway.close();
  });

  it('logs in and keeps the session id', async () => {
    const outcome = await session.login('acme', 'pw', 'customer');
    expect(outcome.kind).toBe('ok');
    expect(session.sessionId).toBe('sess-1');
    expect(session.role).toBe('customer');
  });

  it('surfaces credential errors verbatim', async () => {
    const outcome = await session.login('acme', 'bad', 'customer');
    expect(outcome).toEqual({
      kind: 'error',
      code: 'wrong-credentials-error',
      message: 'wrong password for acme',
    });
  });

  it('offers registration for an unknown login', async () => {
    const outcome = await session.login('ghost', 'pw', 'customer');
    expect(outcome).toEqual({
      kind: 'registration-needed',
      login: 'ghost',
      role: 'customer',
    });
    const done = await session.registerAndLogin('ghost', 'pw', 'customer');
    expect(done.kind).toBe('ok');
    expect(gateway.requests.some((r) => r.op === 'register')).toBe(true);
  });

  it('publishes through the wire protocol and returns the new id', async () => {
    await session.login('portco', 'pw', 'provider');
    const sid = await session.publishService(
      makeService('', 'portco', 'New line', { price: 90 }));
    expect(sid).toBe('svc-000007');
    const publish = gateway.requests.find((r) => r.op === 'publish');
    expect(publish['session-id']).toBe('sess-1');
    expect(publish.service.name).toBe('New line');
  });

  it('returns ranked rows exactly as the gateway ordered them', async () => {
    await session.login('acme', 'pw', 'customer');
    const ranked = await session.submitQuery(QUERY);
    expect(ranked.rows.map((r) => r.service['service-id'])).toEqual(
      ['svc-000004', 'svc-000003']);
    expect(ranked.source).toBe('central');
  });

  it('posts the chosen row\'s own service id', async () => {
    await session.login('acme', 'pw', 'customer');
    const ranked = await session.submitQuery(QUERY);
    const second = ranked.rows[1].service['service-id'];
    await session.choose(ranked.requestId, second);
    const choose = gateway.requests.find((r) => r.op === 'choose-service');
    expect(choose['service-id']).toBe('svc-000003');
    expect(choose['request-id']).toBe('req-1');
  });

  it('remembers the query bounds for the negotiation panel', async () => {
    await session.login('acme', 'pw', 'customer');
    const ranked = await session.submitQuery(QUERY);
    const chosen = await session.choose(
      ranked.requestId, ranked.rows[0].service['service-id']);
    expect(session.boundsFor(chosen.negotiationId)).toEqual(
      { price: [50, 150] });
  });

  it('accept returns the contract from the gateway', async () => {
    await session.login('acme', 'pw', 'customer');
    const contract = await session.accept('neg-000001');
    expect(contract['contract-id']).toBe('ctr-000001');
  });

  it('wraps wire errors as GatewayError with the code', async () => {
    await expect(session.client.contractStatus('nope'))
      .rejects.toBeInstanceOf(GatewayError);
  });
});
