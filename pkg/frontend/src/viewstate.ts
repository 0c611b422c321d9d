/** View state: one of six analytical perspectives plus the protected group
 * and temporal selectors. The state round-trips through the URL query string
 * so views are shareable. */

export const PERSPECTIVES = [
  "race",
  "urbanicity",
  "race-lookahead",
  "race-phase",
  "urbanicity-lookahead",
  "urbanicity-phase",
] as const;

export type Perspective = (typeof PERSPECTIVES)[number];

export const RACE_GROUPS = ["Black", "Hispanic", "Asian"] as const;
export const URBANICITY_GROUPS = ["SMM", "MC"] as const;
export const LOOKAHEADS = [7, 14, 21, 28] as const;
export const PHASES = [0, 1, 2, 3, 4, 5, 6] as const;

export interface ViewState {
  perspective: Perspective;
  group: string;
  phase: number | "all";
  lookahead: number | "all";
}

export function groupFamily(perspective: Perspective): "race" | "urbanicity" {
  return perspective.startsWith("race") ? "race" : "urbanicity";
}

export function allowedGroups(perspective: Perspective): readonly string[] {
  return groupFamily(perspective) === "race" ? RACE_GROUPS : URBANICITY_GROUPS;
}

/** Validate invariants; returns a corrected copy rather than throwing. */
export function normalize(state: ViewState): ViewState {
  const groups = allowedGroups(state.perspective);
  const group = groups.includes(state.group) ? state.group : groups[0];
  let phase = state.phase;
  let lookahead = state.lookahead;
  if (phase !== "all" && !PHASES.includes(phase as (typeof PHASES)[number])) {
    phase = "all";
  }
  if (lookahead !== "all"
      && !LOOKAHEADS.includes(lookahead as (typeof LOOKAHEADS)[number])) {
    lookahead = "all";
  }
  // the intersection perspectives focus one temporal dimension on a value
  if (state.perspective.endsWith("-lookahead") && lookahead === "all") {
    lookahead = LOOKAHEADS[0];
  }
  if (state.perspective.endsWith("-phase") && phase === "all") {
    phase = PHASES[0];
  }
  return { perspective: state.perspective, group, phase, lookahead };
}

export const DEFAULT_VIEW: ViewState = {
  perspective: "race",
  group: "Hispanic",
  phase: "all",
  lookahead: "all",
};

export function encodeView(state: ViewState): string {
  const params = new URLSearchParams();
  params.set("view", state.perspective);
  params.set("group", state.group);
  params.set("phase", String(state.phase));
  params.set("lookahead", String(state.lookahead));
  return params.toString();
}

export function decodeView(query: string): ViewState {
  const params = new URLSearchParams(query);
  const rawView = params.get("view") ?? DEFAULT_VIEW.perspective;
  const perspective = (PERSPECTIVES as readonly string[]).includes(rawView)
    ? (rawView as Perspective)
    : DEFAULT_VIEW.perspective;
  const parseSel = (raw: string | null): number | "all" => {
    if (raw === null || raw === "all") return "all";
    const value = Number(raw);
    return Number.isFinite(value) ? value : "all";
  };
  return normalize({
    perspective,
    group: params.get("group") ?? allowedGroups(perspective)[0],
    phase: parseSel(params.get("phase")),
    lookahead: parseSel(params.get("lookahead")),
  });
}
