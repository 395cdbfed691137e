"""Independent oracles used to freeze expected values.

Deliberately written against different algorithms than the package:
reachability via boolean matrix powers, matching via a plain scan over
oracle degrees, cache policy and negotiation via direct simulation of the
stated rules.
"""

from __future__ import annotations

import numpy as np


def closure_matrix(n: int, edges: list[tuple[int, int]]) -> np.ndarray:
    """Reflexive-transitive closure of child->parent edges by repeated
    boolean squaring of the adjacency matrix."""
    reach = np.eye(n, dtype=bool)
    for a, b in edges:
        reach[a, b] = True
    for _ in range(max(1, int(np.ceil(np.log2(max(n, 2))))) + 1):
        reach = reach | (reach @ reach)
    return reach


def degree_oracle(reach: np.ndarray, requested: int, advertised: int) -> int:
    """0 Fail, 1 Subsumes, 2 Plugin, 3 Exact."""
    if requested == advertised:
        return 3
    if reach[advertised, requested]:
        return 2
    if reach[requested, advertised]:
        return 1
    return 0


def brute_force_discover(services, query, reach, index):
    """Scan every service, applying the oracle degree per component.

    `index` maps concept id -> matrix row.  Returns [(service_id, degree)]
    sorted by degree desc then id asc.
    """
    out = []
    for svc in services:
        if svc.ontology_id != query.ontology_id:
            continue
        degrees = [degree_oracle(reach, index[query.category],
                                 index[svc.category])]
        if degrees[0] == 0:
            continue
        ok = True
        for required in query.required_outputs:
            best = max((degree_oracle(reach, index[required], index[c])
                        for _, c in svc.outputs), default=0)
            if best == 0:
                ok = False
                break
            degrees.append(best)
        if not ok:
            continue
        out.append((svc.service_id, min(degrees)))
    out.sort(key=lambda t: (-t[1], t[0]))
    return out


def lfu_simulate(capacity: int, ops: list[tuple]) -> tuple[list[str], list[str]]:
    """Replay feed/hit operations against the stated LFU policy.

    ops: ("feed", [ids...]) or ("hit", [ids...]).  Returns (cached ids
    sorted, all evicted ids in order).
    """
    tick = 0
    entries: dict[str, list[int]] = {}  # id -> [count, last_used]
    evicted: list[str] = []
    for op, ids in ops:
        tick += 1
        if op == "hit":
            for sid in ids:
                entries[sid][0] += 1
                entries[sid][1] = tick
        else:
            for sid in ids:
                if sid not in entries:
                    entries[sid] = [1, tick]
            while len(entries) > capacity:
                victim = min(entries,
                             key=lambda s: (entries[s][0], entries[s][1], s))
                del entries[victim]
                evicted.append(victim)
    return sorted(entries), evicted


def utility(offer: dict, weights: dict, directions: dict, bounds: dict) -> float:
    total = 0.0
    for attr, w in weights.items():
        lo, hi = bounds[attr]
        v = min(max(offer[attr], lo), hi)
        n = (v - lo) / (hi - lo)
        total += w * (1.0 - n if directions[attr] == "cost" else n)
    return total


def simulate_negotiation(cust, prov, weights, directions, bounds,
                         max_rounds):
    """Direct simulation of the stated alternating-offers recurrence.

    cust/prov: {attr: (lo, hi, step)}.  The provider scores with flipped
    directions.  Returns ("agree", offer, round, who) or
    ("fail", max_rounds).
    """
    flipped = {a: ("benefit" if d == "cost" else "cost")
               for a, d in directions.items()}
    c_thr, p_thr = cust["__thr__"], prov["__thr__"]
    cust = {a: v for a, v in cust.items() if a != "__thr__"}
    prov = {a: v for a, v in prov.items() if a != "__thr__"}

    def best(side, attr):
        lo, hi, _ = (cust if side == "c" else prov)[attr]
        if directions[attr] == "benefit":
            return hi if side == "c" else lo
        return lo if side == "c" else hi

    def inside(offer, table):
        return all(table[a][0] - 1e-9 <= offer[a] <= table[a][1] + 1e-9
                   for a in table if a in offer)

    attrs = sorted(set(cust) & set(prov))
    c_stance = {a: best("c", a) for a in attrs}
    p_stance = {a: best("p", a) for a in attrs}
    p_offer = dict(p_stance)
    rnd = 0
    while True:
        # customer turn: accept or counter
        if (inside(p_offer, cust)
                and utility(p_offer, weights, directions, bounds) >= c_thr):
            return ("agree", p_offer, rnd, "customer")
        if rnd + 1 > max_rounds:
            return ("fail", max_rounds)
        rnd += 1
        for a in attrs:
            lo, hi, step = cust[a]
            cur, tgt = c_stance[a], p_stance[a]
            cur = tgt if abs(tgt - cur) <= step else cur + (step if tgt > cur else -step)
            c_stance[a] = min(max(cur, lo), hi)
        c_offer = dict(c_stance)
        # provider turn
        if (inside(c_offer, prov)
                and utility(c_offer, weights, flipped, bounds) >= p_thr):
            return ("agree", c_offer, rnd, "provider")
        if rnd + 1 > max_rounds:
            return ("fail", max_rounds)
        rnd += 1
        for a in attrs:
            lo, hi, step = prov[a]
            cur, tgt = p_stance[a], c_stance[a]
            cur = tgt if abs(tgt - cur) <= step else cur + (step if tgt > cur else -step)
            p_stance[a] = min(max(cur, lo), hi)
        p_offer = dict(p_stance)
