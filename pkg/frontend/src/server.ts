import * as http from 'node:http';
import * as querystring from 'node:querystring';

import { GatewayClient, GatewayError } from './client.js';
import { ConsoleSession } from './console.js';
import type { Preferences, Query, Role, Service } from './protocol.js';
import {
  loginView,
  negotiationPanel,
  page,
  proposalScores,
  publishForm,
  rankedListView,
  registrationForm,
} from './views.js';

const POLL_SECONDS = 2;

function queryForm(): string {
  return `<section class="query-form">
<h2>Find a service</h2>
<form method="post" action="/query">
  <label>Category concept <input name="category" required></label>
  <label>Ontology <input name="ontology-id" required></label>
  <label>Required outputs <input name="required-outputs"></label>
  <label>Provided inputs <input name="provided-inputs"></label>
  <label>Preferences (attr:weight:dir:min:max per line)
    <textarea name="preferences"></textarea></label>
  <button type="submit">Search</button>
</form>
</section>`;
}

function parseList(text: string): string[] {
  return text.split(',').map((s) => s.trim()).filter(Boolean);
}

function parsePreferences(text: string): Preferences | undefined {
  const lines = text.split('\n').map((s) => s.trim()).filter(Boolean);
  if (lines.length === 0) return undefined;
  const prefs: Preferences = { weights: {}, directions: {}, bounds: {} };
  for (const line of lines) {
    const [attr, weight, dir, lo, hi] = line.split(':');
    prefs.weights[attr] = Number(weight);
    prefs.directions[attr] = dir === 'benefit' ? 'benefit' : 'cost';
    prefs.bounds[attr] = [Number(lo), Number(hi)];
  }
  return prefs;
}

function parseService(form: querystring.ParsedUrlQuery): Service {
  const pairs = (text: string): [string, string][] =>
    parseList(text).map((item) => {
      const [param, concept] = item.split(':');
      return [param.trim(), (concept ?? '').trim()];
    });
  const attributes: Record<string, number> = {};
  for (const item of parseList(String(form['attributes'] ?? ''))) {
    const [key, value] = item.split('=');
    attributes[key.trim()] = Number(value);
  }
  return {
    'service-id': '',
    'provider-id': '',
    name: String(form['name'] ?? ''),
    category: String(form['category'] ?? ''),
    inputs: pairs(String(form['inputs'] ?? '')),
    outputs: pairs(String(form['outputs'] ?? '')),
    attributes,
    'ontology-id': String(form['ontology-id'] ?? ''),
  };
}

function readBody(req: http.IncomingMessage): Promise<querystring.ParsedUrlQuery> {
  return new Promise((resolve) => {
    let data = '';
    req.on('data', (chunk) => (data += chunk));
    req.on('end', () => resolve(querystring.parse(data)));
  });
}

/**
 * Single-user web console.  Each page load re-derives its content from
 * fresh gateway responses, so a browser reload never shows stale domain
 * state.
 */
export class ConsoleServer {
  readonly server: http.Server;

  constructor(private session: ConsoleSession) {
    this.server = http.createServer((req, res) => {
      this.route(req, res).catch((err) => {
        const body = err instanceof GatewayError
      ? loginView({ code: err.code, message: err.message })
      : `<div class="error-banner">${String(err)}</div>`;
        this.html(res, page('error', body));
      });
    });
  }

  listen(port: number, host = '127.0.0.1'): Promise<number> {
    return new Promise((resolve) => {
      this.server.listen(port, host, () => {
        const addr = this.server.address();
        resolve(typeof addr === 'object' && addr ? addr.port : port);
      });
    });
  }

  close(): void {
    this.server.close();
  }

  private html(res: http.ServerResponse, body: string, status = 200): void {
    res.writeHead(status, { 'content-type': 'text/html; charset=utf-8' });
    res.end(body);
  }

  private redirect(res: http.ServerResponse, location: string): void {
    res.writeHead(303, { location });
    res.end();
  }

  private workspace(): string {
    return this.session.role === 'provider' ? publishForm() : queryForm();
  }

  private async route(req: http.IncomingMessage,
                      res: http.ServerResponse): Promise<void> {
    const url = new URL(req.url ?? '/', 'http://console');
    const path = url.pathname;

    if (req.method === 'GET' && path === '/') {
      this.html(res, page('sign in', this.session.sessionId
        ? this.workspace() : loginView()));
      return;
    }

    if (req.method === 'POST' && path === '/login') {
      const form = await readBody(req);
      const outcome = await this.session.login(
        String(form['login']), String(form['password']),
        String(form['role']) as Role);
      if (outcome.kind === 'ok') {
        this.redirect(res, '/');
      } else if (outcome.kind === 'registration-needed') {
        this.html(res, page('register',
          registrationForm(outcome.login, outcome.role)));
      } else {
        this.html(res, page('sign in', loginView(outcome)));
      }
      return;
    }

    if (req.method === 'POST' && path === '/register') {
      const form = await readBody(req);
      await this.session.registerAndLogin(
        String(form['login']), String(form['password']),
        String(form['role']) as Role);
      this.redirect(res, '/');
      return;
    }

    if (req.method === 'POST' && path === '/publish') {
      const form = await readBody(req);
      try {
        const serviceId = await this.session.publishService(
          parseService(form));
        this.html(res, page('publish', publishForm({ serviceId })));
      } catch (err) {
        if (err instanceof GatewayError) {
          this.html(res, page('publish',
            publishForm(undefined, { name: err.message })));
          return;
        }
        throw err;
      }
      return;
    }

    if (req.method === 'POST' && path === '/query') {
      const form = await readBody(req);
      const query: Query = {
        'query-id': `console-${Date.now()}`,
        category: String(form['category']),
        'required-outputs': parseList(String(form['required-outputs'] ?? '')),
        'provided-inputs': parseList(String(form['provided-inputs'] ?? '')),
        'ontology-id': String(form['ontology-id']),
        preferences: parsePreferences(String(form['preferences'] ?? '')),
      };
      const ranked = await this.session.submitQuery(query);
      this.redirect(res, `/results/${ranked.requestId}`);
      return;
    }

    let m = path.match(/^\/results\/([^/]+)$/);
    if (req.method === 'GET' && m) {
      const ranked = await this.session.fetchRanked(m[1]);
      let scores = new Map<string, number>();
      try {
        scores = proposalScores(await this.session.proposals(m[1]));
      } catch {
        // scores are decoration; render the ranked rows without them
      }
      this.html(res, page('results',
        rankedListView(ranked.requestId, ranked.rows, scores)));
      return;
    }

    if (req.method === 'POST' && path === '/choose') {
      const form = await readBody(req);
      const chosen = await this.session.choose(
        String(form['request-id']), String(form['service-id']));
      this.redirect(res, `/negotiation/${chosen.negotiationId}`);
      return;
    }

    m = path.match(/^\/negotiation\/([^/]+)$/);
    if (req.method === 'GET' && m) {
      const nid = m[1];
      const view = await this.session.negotiationStatus(nid);
      const contract = view['contract-id']
        ? await this.session.client.contractStatus(view['contract-id'])
        : null;
      const body = negotiationPanel(view, {
        bounds: this.session.boundsFor(nid),
        contract: contract ?? undefined,
      });
      this.html(res, page(`negotiation ${nid}`, body,
        view.state === 'open' ? POLL_SECONDS : undefined));
      return;
    }

    m = path.match(/^\/negotiation\/([^/]+)\/(accept|counter|reject)$/);
    if (req.method === 'POST' && m) {
      const [, nid, action] = m;
      if (action === 'accept') {
        await this.session.accept(nid);
      } else if (action === 'reject') {
        await this.session.walkAway(nid);
      } else {
        const form = await readBody(req);
        const values: Record<string, number> = {};
        for (const [key, value] of Object.entries(form)) {
          if (key.startsWith('value.')) {
            values[key.slice('value.'.length)] = Number(value);
          }
        }
        await this.session.counter(nid,
          Object.keys(values).length ? values : undefined);
      }
      this.redirect(res, `/negotiation/${nid}`);
      return;
    }

    this.html(res, page('not found', '<p>No such page.</p>'), 404);
  }
}

export async function startConsole(gatewayHost: string, gatewayPort: number,
                                   listenPort: number): Promise<ConsoleServer> {
  const client = await GatewayClient.connect(gatewayHost, gatewayPort);
  const server = new ConsoleServer(new ConsoleSession(client));
  await server.listen(listenPort);
  return server;
}
