// Wire-protocol shapes, transcribed from PROTOCOL.md (v1).  Keys keep
// their hyphenated wire spelling so objects round-trip through JSON
// without any mapping layer.

export type Role = 'customer' | 'provider';

export type MatchDegree = 'exact' | 'plugin' | 'subsumes';

export interface Service {
  'service-id': string;
  'provider-id': string;
  name: string;
  category: string;
  inputs: [string, string][];
  outputs: [string, string][];
  attributes: Record<string, number>;
  'ontology-id': string;
}

export interface Preferences {
  weights: Record<string, number>;
  directions: Record<string, 'cost' | 'benefit'>;
  bounds: Record<string, [number, number]>;
}

export interface Query {
  'query-id': string;
  category: string;
  'required-outputs': string[];
  'provided-inputs': string[];
  'ontology-id': string;
  preferences?: Preferences;
}

export interface ResultRow {
  service: Service;
  degree: MatchDegree;
  'component-degrees': MatchDegree[];
}

export interface Proposal {
  'proposal-id': string;
  'service-id': string;
  'provider-id': string;
  'offered-attributes': Record<string, number>;
  'valid-until': number;
  round: number;
  degree: MatchDegree | null;
  score?: number;
}

export type NegotiationState = 'open' | 'agreed' | 'failed';

export interface TranscriptEntry {
  side: 'customer' | 'provider';
  round: number;
  offer: Record<string, number>;
}

export interface Negotiation {
  'negotiation-id': string;
  state: NegotiationState;
  round: number;
  'max-rounds': number;
  'provider-offer': Record<string, number>;
  'customer-offer': Record<string, number>;
  transcript: TranscriptEntry[];
  'contract-id': string | null;
  'service-id': string;
}

export interface Contract {
  'contract-id': string;
  'customer-account': string;
  'provider-account': string;
  'service-id': string;
  'agreed-attributes': Record<string, number>;
  'concluded-at': number;
  'negotiation-rounds': number;
}

export interface WireError {
  ok: false;
  error: string;
  message: string;
}
