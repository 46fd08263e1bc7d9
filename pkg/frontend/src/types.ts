// Wire types for the play-service JSON API.

export type NodeId = string | number;

export interface GraphEdge {
  from: NodeId;
  to: NodeId;
  amp: number;
  amp_back: number;
  m?: number;
}

export interface GraphSpec {
  nodes: NodeId[];
  edges: GraphEdge[];
}

export interface ConditionStar {
  sign_ok: boolean;
  linear_form: number;
  holds: boolean;
}

export interface Snapshot {
  session: string;
  nodes: NodeId[];
  values: number[];
  legal: NodeId[];
  move_count: number;
  eligible: boolean;
  condition_star: ConditionStar | null;
  linear_form: number | null;
}

export interface Analysis {
  legal: NodeId[];
  condition_star: ConditionStar | null;
  kappas: [number, number] | null;
  inequalities: { i: number; ii: number; iii: number } | null;
  suggested_sequence: NodeId[] | null;
  hint: string | null;
}

export type StartSpec = number[] | string;
