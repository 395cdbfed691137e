import { GatewayClient, GatewayError } from './client.js';
import type {
  Contract,
  Negotiation,
  Preferences,
  Query,
  ResultRow,
  Role,
} from './protocol.js';

export type LoginOutcome =
  | { kind: 'ok'; sessionId: string; accountId: string }
  | { kind: 'registration-needed'; login: string; role: Role }
  | { kind: 'error'; code: string; message: string };

export interface RankedList {
  requestId: string;
  source: 'local' | 'central';
  hops: number;
  rows: ResultRow[];
}

/**
 * One human's console session against a gateway.  All domain truth
 * lives behind the gateway; the session only remembers its session-id,
 * its role, and the preference bounds the user typed per request (the
 * gateway does not echo those back, and the negotiation panel needs
 * them to grey out exhausted counter inputs).
 */
export class ConsoleSession {
  sessionId: string | null = null;
  accountId: string | null = null;
  role: Role | null = null;
  private boundsByRequest = new Map<string, Preferences['bounds']>();
  private boundsByNegotiation = new Map<string, Preferences['bounds']>();
  private requestOfNegotiation = new Map<string, string>();

  constructor(public client: GatewayClient) {}

  async login(login: string, password: string,
              role: Role): Promise<LoginOutcome> {
    try {
      const auth = await this.client.authenticate(login, password, role);
      this.sessionId = auth.sessionId;
      this.accountId = auth.accountId;
      this.role = role;
      return { kind: 'ok', ...auth };
    } catch (err) {
      if (err instanceof GatewayError) {
        if (err.code === 'unknown-user-error') {
          return { kind: 'registration-needed', login, role };
        }
        return { kind: 'error', code: err.code, message: err.message };
      }
      throw err;
    }
  }

  async registerAndLogin(login: string, password: string,
                         role: Role): Promise<LoginOutcome> {
    await this.client.register(login, password, role);
    return this.login(login, password, role);
  }

  private session(): string {
    if (!this.sessionId) throw new Error('not signed in');
    return this.sessionId;
  }

  async publishService(service: Parameters<GatewayClient['publish']>[1]) {
    return this.client.publish(this.session(), service);
  }

  /** Submit a query and fetch its ranked results in gateway order. */
  async submitQuery(query: Query): Promise<RankedList> {
    const submitted = await this.client.submitRequest(this.session(), query);
    if (query.preferences) {
      this.boundsByRequest.set(submitted.requestId,
        query.preferences.bounds);
    }
    const result = await this.client.listResults(submitted.requestId);
    return {
      requestId: submitted.requestId,
      source: result.source,
      hops: result.hops,
      rows: result.results,
    };
  }

  async fetchRanked(requestId: string): Promise<RankedList> {
    const result = await this.client.listResults(requestId);
    return { requestId, ...result, rows: result.results };
  }

  async proposals(requestId: string) {
    return this.client.listProposals(this.session(), requestId);
  }

  async choose(requestId: string, serviceId: string) {
    const chosen = await this.client.chooseService(
      this.session(), requestId, serviceId);
    const bounds = this.boundsByRequest.get(requestId);
    if (bounds) this.boundsByNegotiation.set(chosen.negotiationId, bounds);
    this.requestOfNegotiation.set(chosen.negotiationId, requestId);
    return chosen;
  }

  boundsFor(negotiationId: string): Preferences['bounds'] | undefined {
    return this.boundsByNegotiation.get(negotiationId);
  }

  async negotiationStatus(negotiationId: string): Promise<Negotiation> {
    return this.client.negotiationStatus(negotiationId);
  }

  async counter(negotiationId: string, values?: Record<string, number>) {
    return this.client.negotiateStep(negotiationId, values);
  }

  async accept(negotiationId: string): Promise<Contract> {
    return this.client.accept(negotiationId);
  }

  async walkAway(negotiationId: string): Promise<Negotiation> {
    return this.client.reject(negotiationId);
  }

  async contract(negotiationId: string): Promise<Contract | null> {
    const view = await this.client.negotiationStatus(negotiationId);
    const cid = view['contract-id'];
    return cid ? this.client.contractStatus(cid) : null;
  }

  /**
   * Poll the negotiation until it leaves the open state or the attempt
   * budget runs out.  The wire protocol is request/response, so the
   * console refreshes by asking again rather than listening for pushes.
   */
  async pollUntilSettled(negotiationId: string, intervalMs = 500,
                         maxPolls = 120): Promise<Negotiation> {
    let view = await this.client.negotiationStatus(negotiationId);
    for (let i = 0; i < maxPolls && view.state === 'open'; i++) {
      await new Promise((r) => setTimeout(r, intervalMs));
      view = await this.client.negotiationStatus(negotiationId);
    }
    return view;
  }
}
