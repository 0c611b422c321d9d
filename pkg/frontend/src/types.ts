/** Audit-bundle schema produced by the scoring pipeline (bundle.json). */

export interface BundleRun {
  config_hash: string;
  n_obs: number;
  trimmed: Record<string, unknown>;
}

export interface AerCell {
  group: string;
  phase: number;
  lookahead: number;
  /** null marks an absent cell (empty group side or zero baseline) */
  aer: number | null;
  n_protected: number;
  n_unprotected: number;
  mean_protected: number;
  mean_unprotected: number;
  var_protected: number;
  var_unprotected: number;
  n_counties: number;
}

export interface CardView {
  group: string;
  phase: number | "all";
  lookahead: number | "all";
}

export interface NutritionalCard {
  view: CardView;
  model_info: { team: string; variables_analyzed: string };
  mean_difference: { value: number; lower: number; upper: number };
  aer_values: { min: number; max: number; median: number; this_view: number };
  coverage: { county_count: number; prediction_count: number };
}

export interface TeamEntry {
  team_id: string;
  model_type: string;
  mobility: string;
  cells: AerCell[];
  median_aer: number | null;
  cards: NutritionalCard[];
}

export interface AuditBundle {
  run: BundleRun;
  group_by: "race" | "urbanicity";
  unprotected: string;
  groups: string[];
  phases: number[];
  lookaheads: number[];
  teams: TeamEntry[];
  relative_effects: unknown[];
}

export function validateBundle(raw: unknown): AuditBundle {
  const bundle = raw as AuditBundle;
  if (!bundle || typeof bundle !== "object") {
    throw new Error("bundle is not an object");
  }
  for (const key of ["run", "group_by", "teams", "groups"] as const) {
    if (!(key in bundle)) throw new Error(`bundle missing field "${key}"`);
  }
  if (!Array.isArray(bundle.teams)) throw new Error("bundle.teams must be a list");
  for (const team of bundle.teams) {
    if (!team.team_id || !Array.isArray(team.cells)) {
      throw new Error("malformed team entry in bundle");
    }
  }
  return bundle;
}
