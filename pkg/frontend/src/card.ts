/** Fairness nutritional card view: the four sections for one team under the
 * current selection. Values come verbatim from the bundle's card entries;
 * a missing card renders as "no coverage". */

import { AuditBundle, NutritionalCard } from "./types.js";
import { ViewState } from "./viewstate.js";

export interface CardSectionRow {
  label: string;
  value: string;
}

export interface CardViewModel {
  team: string;
  available: boolean;
  sections: { title: string; rows: CardSectionRow[] }[];
}

const fmt = (x: number, digits = 3): string => x.toFixed(digits);

export function findCard(bundle: AuditBundle, team: string,
                         view: ViewState): NutritionalCard | null {
  const entry = bundle.teams.find((t) => t.team_id === team);
  if (!entry) throw new Error(`no team ${team} in bundle`);
  return entry.cards.find((card) =>
    card.view.group === view.group
    && card.view.phase === view.phase
    && card.view.lookahead === view.lookahead) ?? null;
}

export function renderCard(bundle: AuditBundle, team: string,
                           view: ViewState): CardViewModel {
  const entry = bundle.teams.find((t) => t.team_id === team);
  if (!entry) throw new Error(`no team ${team} in bundle`);
  const card = findCard(bundle, team, view);
  if (!card) {
    return {
      team,
      available: false,
      sections: [{
        title: "Coverage",
        rows: [{ label: "status", value: "no coverage for this selection" }],
      }],
    };
  }
  const md = card.mean_difference;
  const av = card.aer_values;
  return {
    team,
    available: true,
    sections: [
      {
        title: "Model Information",
        rows: [
          { label: "team", value: card.model_info.team },
          { label: "model type", value: entry.model_type },
          { label: "mobility data", value: entry.mobility },
          { label: "variables analyzed", value: card.model_info.variables_analyzed },
          { label: "phase", value: String(view.phase) },
          { label: "lookahead", value: String(view.lookahead) },
        ],
      },
      {
        title: "Mean Difference vs Unprotected Reference",
        rows: [
          { label: "difference (PBL)", value: fmt(md.value, 6) },
          { label: "lower bound", value: fmt(md.lower, 6) },
          { label: "upper bound", value: fmt(md.upper, 6) },
        ],
      },
      {
        title: "Team AER Values",
        rows: [
          { label: "median", value: fmt(av.median) },
          { label: "min", value: fmt(av.min) },
          { label: "max", value: fmt(av.max) },
          { label: "this view", value: fmt(av.this_view) },
        ],
      },
      {
        title: "Coverage",
        rows: [
          { label: "counties", value: String(card.coverage.county_count) },
          { label: "predictions", value: String(card.coverage.prediction_count) },
        ],
      },
    ],
  };
}
