/**
 * Wire types mirroring the /v1 JSON documents. These are descriptions of
 * what the server sends, never recomputed client-side.
 */

export type RunState =
  | 'specified'
  | 'candidates_selected'
  | 'variants_generated'
  | 'performance_ranked'
  | 'incepted'
  | 'halted';

export const PHASE_ORDER: RunState[] = [
  'specified',
  'candidates_selected',
  'variants_generated',
  'performance_ranked',
  'incepted',
];

export interface AttributeValueDoc {
  type: 'number' | 'text' | 'bool' | 'enum' | 'list';
  value: unknown;
  unit?: string;
}

export interface RoleRequirementDoc {
  type: 'role';
  path: string;
  optimal: AttributeValueDoc;
  reject?: AttributeValueDoc | null;
  weight: number;
  mandatory: boolean;
}

export interface RoleDoc {
  name: string;
  target_kind: 'partner' | 'service';
  requirements: RoleRequirementDoc[];
}

export interface SocialRequirementDoc {
  id: string;
  type: 'social';
  between: [string, string];
  relation_type: string;
  direction: 'directed' | 'either';
  weight: number;
  attribute_condition?: { attribute: string; optimal: number; reject: number };
}

export interface SpecDoc {
  id: string;
  version?: number;
  roles: RoleDoc[];
  process: {
    activities: { id: string; roles: string[]; sub_process?: string | null }[];
    precedence: [string, string][];
    sub_processes: Record<string, string[]>;
  };
  schema: { roles: string[]; requirements: SocialRequirementDoc[] };
  performance_requirements: {
    type: 'performance';
    metric: string;
    scope: string;
    optimal: number;
    reject: number;
    weight: number;
  }[];
  ranking: { method: string; weights?: number[] | null; priority?: number[] | null };
  thresholds: {
    phase2_cutoff: number;
    phase3_fitness: number;
    phase2_max_candidates: number;
  };
  exclusivity: boolean;
}

export interface Violation {
  category: string;
  message: string;
}

export interface VariantDoc {
  assignment: Record<string, string>;
  genome: string[];
  fitness: number;
  performance: (number | null)[] | null;
  rank: number | null;
  stale: boolean;
  social_breakdown: Record<string, number>;
}

export interface RunDoc {
  run_id: string;
  spec_id: string;
  spec_version: number;
  state: RunState;
  seed: number;
  oracle: boolean;
  diagnostic: string | null;
  incepted_id: string | null;
  candidate_sets: {
    role: string;
    candidates: { element: string; conformance: number }[];
  }[];
  variants: VariantDoc[];
  events: { seq: number; action: string; detail: string; state: string }[];
}

export interface NotificationDoc {
  seq: number;
  indicator: string;
  subscriber: string;
  value: number | null;
  op: string;
  threshold: number;
  event_type: string;
  subject: string;
}
