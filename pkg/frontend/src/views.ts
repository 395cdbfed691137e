import type {
  Contract,
  Negotiation,
  Preferences,
  Proposal,
  ResultRow,
} from './protocol.js';

// Pure HTML renderers.  Every view is a function of gateway responses
// (plus form input the user typed into this console); nothing here is
// authoritative state, so a page reload that re-fetches reproduces the
// exact same markup.

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function attrs(values: Record<string, number>): string {
  return Object.keys(values)
    .sort()
    .map((k) => `${escapeHtml(k)}=${values[k]}`)
    .join(' ');
}

export function errorBanner(code: string, message: string): string {
  return `<div class="error-banner" data-code="${escapeHtml(code)}">` +
    `${escapeHtml(message)}</div>`;
}

export function loginView(error?: { code: string; message: string }): string {
  const banner = error ? errorBanner(error.code, error.message) : '';
  return `<section class="login-view">
<h2>Sign in</h2>
${banner}
<form method="post" action="/login">
  <label>Login <input name="login" required></label>
  <label>Password <input name="password" type="password" required></label>
  <label>Role <select name="role">
    <option value="customer">customer</option>
    <option value="provider">provider</option>
  </select></label>
  <button type="submit">Sign in</button>
</form>
</section>`;
}

/** Offered when authenticate answers unknown-user-error. */
export function registrationForm(login: string, role: string): string {
  return `<section class="registration-form">
<p>No account for <strong>${escapeHtml(login)}</strong>. Create one?</p>
<form method="post" action="/register">
  <input type="hidden" name="login" value="${escapeHtml(login)}">
  <input type="hidden" name="role" value="${escapeHtml(role)}">
  <label>Password <input name="password" type="password" required></label>
  <button type="submit">Register</button>
</form>
</section>`;
}

export function publishForm(
  confirmation?: { serviceId: string },
  fieldErrors: Record<string, string> = {},
): string {
  const toast = confirmation
    ? `<div class="toast" data-service-id="${escapeHtml(confirmation.serviceId)}">` +
      `published as ${escapeHtml(confirmation.serviceId)}</div>`
    : '';
  const field = (name: string, label: string) => {
    const err = fieldErrors[name]
      ? `<span class="field-error">${escapeHtml(fieldErrors[name])}</span>`
      : '';
    return `<label>${label} <input name="${name}">${err}</label>`;
  };
  return `<section class="publish-form">
<h2>Publish a service</h2>
${toast}
<form method="post" action="/publish">
  ${field('name', 'Name')}
  ${field('category', 'Category concept')}
  ${field('ontology-id', 'Ontology')}
  ${field('inputs', 'Inputs (param:Concept, comma separated)')}
  ${field('outputs', 'Outputs (param:Concept, comma separated)')}
  ${field('attributes', 'Attributes (key=number, comma separated)')}
  <button type="submit">Publish</button>
</form>
</section>`;
}

/**
 * Ranked discovery results.  Rows are rendered in exactly the order the
 * gateway returned them; this function must never sort.
 */
export function rankedListView(
  requestId: string,
  rows: ResultRow[],
  scores: Map<string, number> = new Map(),
): string {
  if (rows.length === 0) {
    return `<section class="ranked-list" data-request-id="${escapeHtml(requestId)}">
<div class="empty-state">No services matched this request.</div>
</section>`;
  }
  const body = rows
    .map((row, i) => {
      const svc = row.service;
      const sid = svc['service-id'];
      const score = scores.has(sid) ? scores.get(sid)!.toFixed(3) : '';
      return `<tr data-service-id="${escapeHtml(sid)}">
  <td>${i + 1}</td>
  <td>${escapeHtml(svc.name)}</td>
  <td>${escapeHtml(svc['provider-id'])}</td>
  <td>${escapeHtml(row.degree)}</td>
  <td>${score}</td>
  <td>${attrs(svc.attributes)}</td>
  <td><form method="post" action="/choose">
    <input type="hidden" name="request-id" value="${escapeHtml(requestId)}">
    <input type="hidden" name="service-id" value="${escapeHtml(sid)}">
    <button type="submit">Choose</button>
  </form></td>
</tr>`;
    })
    .join('\n');
  return `<section class="ranked-list" data-request-id="${escapeHtml(requestId)}">
<table>
<thead><tr><th>#</th><th>Service</th><th>Provider</th><th>Degree</th>
<th>Score</th><th>Attributes</th><th></th></tr></thead>
<tbody>
${body}
</tbody>
</table>
</section>`;
}

export function proposalScores(ranked: Proposal[]): Map<string, number> {
  const scores = new Map<string, number>();
  for (const p of ranked) {
    if (p.score !== undefined && !scores.has(p['service-id'])) {
      scores.set(p['service-id'], p.score);
    }
  }
  return scores;
}

export function contractCard(contract: Contract): string {
  return `<div class="contract-card" data-contract-id="${escapeHtml(contract['contract-id'])}">
<h3>Contract ${escapeHtml(contract['contract-id'])}</h3>
<dl>
  <dt>Customer</dt><dd>${escapeHtml(contract['customer-account'])}</dd>
  <dt>Provider</dt><dd>${escapeHtml(contract['provider-account'])}</dd>
  <dt>Service</dt><dd>${escapeHtml(contract['service-id'])}</dd>
  <dt>Terms</dt><dd>${attrs(contract['agreed-attributes'])}</dd>
  <dt>Rounds</dt><dd>${contract['negotiation-rounds']}</dd>
</dl>
</div>`;
}

function transcriptRows(negotiation: Negotiation): string {
  return negotiation.transcript
    .map((e) =>
      `<tr class="offer-${e.side}"><td>${e.round}</td>` +
      `<td>${escapeHtml(e.side)}</td><td>${attrs(e.offer)}</td></tr>`)
    .join('\n');
}

/**
 * Round history plus accept / counter / walk-away controls.  `bounds`
 * are the reservation intervals the user entered with the query; a
 * counter input is disabled once the standing customer offer sits on
 * its bound, because any further concession would leave the interval.
 */
export function negotiationPanel(
  negotiation: Negotiation,
  options: { bounds?: Preferences['bounds']; contract?: Contract } = {},
): string {
  const nid = negotiation['negotiation-id'];
  const history = `<table class="rounds">
<thead><tr><th>Round</th><th>Side</th><th>Offer</th></tr></thead>
<tbody>
${transcriptRows(negotiation)}
</tbody>
</table>`;

  let outcome = '';
  let controls = '';
  if (negotiation.state === 'agreed' && options.contract) {
    outcome = contractCard(options.contract);
  } else if (negotiation.state === 'failed') {
    outcome = `<div class="no-agreement-banner">
No agreement after ${negotiation.round} of ${negotiation['max-rounds']} rounds.
Final provider offer: ${attrs(negotiation['provider-offer'])}.
Final customer offer: ${attrs(negotiation['customer-offer'])}.
</div>`;
  } else if (negotiation.state === 'open') {
    const bounds = options.bounds ?? {};
    const counterInputs = Object.keys(negotiation['provider-offer'])
      .sort()
      .map((attr) => {
        const current = negotiation['customer-offer'][attr];
        const bound = bounds[attr];
        const atBound =
          bound !== undefined && current !== undefined &&
          (current <= bound[0] || current >= bound[1]);
        const disabled = atBound ? ' disabled' : '';
        return `<label>${escapeHtml(attr)} ` +
          `<input name="value.${escapeHtml(attr)}" type="number" ` +
          `value="${current ?? ''}"${disabled}></label>`;
      })
      .join('\n  ');
    controls = `<div class="controls">
<form method="post" action="/negotiation/${escapeHtml(nid)}/accept">
  <button class="accept" type="submit">Accept offer</button>
</form>
<form method="post" action="/negotiation/${escapeHtml(nid)}/counter">
  ${counterInputs}
  <button class="counter" type="submit">Counter</button>
</form>
<form method="post" action="/negotiation/${escapeHtml(nid)}/reject">
  <button class="walk-away" type="submit">Walk away</button>
</form>
</div>`;
  }

  return `<section class="negotiation-panel" data-negotiation-id="${escapeHtml(nid)}"
 data-state="${negotiation.state}">
<h2>Negotiation ${escapeHtml(nid)} (round ${negotiation.round}/${negotiation['max-rounds']})</h2>
<p>Standing provider offer: ${attrs(negotiation['provider-offer'])}</p>
${history}
${controls}
${outcome}
</section>`;
}

export function page(title: string, body: string,
                     refreshSeconds?: number): string {
  const refresh = refreshSeconds
    ? `<meta http-equiv="refresh" content="${refreshSeconds}">`
    : '';
  return `<!doctype html>
<html>
<head><meta charset="utf-8">${refresh}<title>${escapeHtml(title)}</title></head>
<body>
<header><h1>i-SEEC console</h1></header>
${body}
</body>
</html>`;
}
