/** Chart model for the AER box plots: one box per team, grouped by model
 * type, sorted ascending by median AER within each group. Box numbers are
 * quantiles of the selected bundle cells; nothing else is computed
 * client-side. */

import { boxStats, BoxStats } from "./stats.js";
import { AerCell, AuditBundle, TeamEntry } from "./types.js";
import { ViewState } from "./viewstate.js";

export interface TeamBox extends BoxStats {
  team: string;
  modelType: string;
  mobility: string;
  values: number[];
}

export interface ModelTypeGroup {
  modelType: string;
  boxes: TeamBox[];
}

export interface ChartModel {
  groups: ModelTypeGroup[];
  referenceLine: number;
  emptyMessage: string | null;
  view: ViewState;
}

export function selectCells(team: TeamEntry, view: ViewState): AerCell[] {
  return team.cells.filter((cell) =>
    cell.group === view.group
    && (view.phase === "all" || cell.phase === view.phase)
    && (view.lookahead === "all" || cell.lookahead === view.lookahead)
    && cell.aer !== null);
}

export function renderBoxplots(bundle: AuditBundle, view: ViewState): ChartModel {
  const byType = new Map<string, TeamBox[]>();
  for (const team of bundle.teams) {
    const values = selectCells(team, view).map((cell) => cell.aer as number);
    if (values.length === 0) continue;
    const box: TeamBox = {
      team: team.team_id,
      modelType: team.model_type,
      mobility: team.mobility,
      values,
      ...boxStats(values),
    };
    const list = byType.get(team.model_type) ?? [];
    list.push(box);
    byType.set(team.model_type, list);
  }
  const groups = [...byType.keys()].sort().map((modelType) => {
    const boxes = byType.get(modelType)!;
    boxes.sort((a, b) => a.median - b.median || a.team.localeCompare(b.team));
    return { modelType, boxes };
  });
  return {
    groups,
    referenceLine: 1.0,
    emptyMessage: groups.length
      ? null
      : `No AER cells for ${view.group} under the current phase/lookahead selection.`,
    view,
  };
}
