import { NdjsonConnection } from './wire.js';
import type {
  Contract,
  Negotiation,
  Proposal,
  Query,
  ResultRow,
  Role,
  Service,
} from './protocol.js';

/** A domain error relayed verbatim from the gateway. */
export class GatewayError extends Error {
  constructor(public code: string, message: string) {
    super(message);
    this.name = 'GatewayError';
  }
}

export interface AuthResult {
  sessionId: string;
  accountId: string;
}

export interface SubmitResult {
  requestId: string;
  source: 'local' | 'central';
  hops: number;
}

export interface DiscoveryResult {
  source: 'local' | 'central';
  hops: number;
  results: ResultRow[];
}

export interface ChooseResult {
  negotiationId: string;
  negotiation: Negotiation;
  contract?: Contract;
}

export interface StepResult {
  negotiation: Negotiation;
  contract?: Contract;
}

/**
 * Typed facade over the NDJSON wire protocol.  Every method is one
 * request/response exchange; responses with `"ok": false` become
 * GatewayError throws carrying the gateway's own error code and text.
 */
export class GatewayClient {
  constructor(private conn: NdjsonConnection) {}

  static async connect(host: string, port: number): Promise<GatewayClient> {
    return new GatewayClient(await NdjsonConnection.connect(host, port));
  }

  close(): void {
    this.conn.close();
  }

  private async call(op: string, fields: object = {}): Promise<any> {
    const response = await this.conn.request({ op, ...fields });
    if (!response.ok) {
      throw new GatewayError(response.error, response.message);
    }
    return response;
  }

  async protocolVersion(): Promise<number> {
    return (await this.call('protocol')).version;
  }

  async authenticate(login: string, password: string,
                     role: Role): Promise<AuthResult> {
    const r = await this.call('authenticate', { login, password, role });
    return { sessionId: r['session-id'], accountId: r['account-id'] };
  }

  async register(login: string, password: string, role: Role,
                 profile?: Record<string, string>): Promise<string> {
    const r = await this.call('register', { login, password, role, profile });
    return r['account-id'];
  }

  async publish(sessionId: string, service: Service): Promise<string> {
    const r = await this.call('publish',
      { 'session-id': sessionId, service });
    return r['service-id'];
  }

  async submitRequest(sessionId: string, query: Query): Promise<SubmitResult> {
    const r = await this.call('submit-request',
      { 'session-id': sessionId, query });
    return { requestId: r['request-id'], source: r.source, hops: r.hops };
  }

  async listResults(requestId: string): Promise<DiscoveryResult> {
    const r = await this.call('list-results', { 'request-id': requestId });
    return { source: r.source, hops: r.hops, results: r.results };
  }

  async listProposals(sessionId: string,
                      requestId: string): Promise<Proposal[]> {
    const r = await this.call('list-proposals',
      { 'session-id': sessionId, 'request-id': requestId });
    return r.ranked;
  }

  async chooseService(sessionId: string, requestId: string, serviceId: string,
                      mode: 'manual' | 'auto' = 'manual'): Promise<ChooseResult> {
    const r = await this.call('choose-service', {
      'session-id': sessionId,
      'request-id': requestId,
      'service-id': serviceId,
      mode,
    });
    return {
      negotiationId: r['negotiation-id'],
      negotiation: r.negotiation,
      contract: r.contract,
    };
  }

  async negotiationStatus(negotiationId: string): Promise<Negotiation> {
    const r = await this.call('negotiation-status',
      { 'negotiation-id': negotiationId });
    return r.negotiation;
  }

  async negotiateStep(negotiationId: string,
                      values?: Record<string, number>): Promise<StepResult> {
    const r = await this.call('negotiate-step',
      { 'negotiation-id': negotiationId, values });
    return { negotiation: r.negotiation, contract: r.contract };
  }

  async accept(negotiationId: string): Promise<Contract> {
    const r = await this.call('accept', { 'negotiation-id': negotiationId });
    return r.contract;
  }

  async reject(negotiationId: string): Promise<Negotiation> {
    const r = await this.call('reject', { 'negotiation-id': negotiationId });
    return r.negotiation;
  }

  async contractStatus(contractId: string): Promise<Contract | null> {
    const r = await this.call('contract-status',
      { 'contract-id': contractId });
    return r.found ? r.contract : null;
  }
}
