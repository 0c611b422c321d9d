/** Application wiring: bundle loading, selectors, URL state, rendering. */

import { renderBoxplots, TeamBox } from "./boxplot.js";
import { renderCard } from "./card.js";
import { drawCard, drawChart } from "./render.js";
import { AuditBundle, validateBundle } from "./types.js";
import {
  allowedGroups, decodeView, DEFAULT_VIEW, encodeView, groupFamily, LOOKAHEADS,
  normalize, PERSPECTIVES, PHASES, ViewState,
} from "./viewstate.js";

let bundle: AuditBundle | null = null;
let view: ViewState = DEFAULT_VIEW;
let pinnedTeam: string | null = null;

const $ = (id: string): HTMLElement => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
};

function syncUrl(): void {
  history.replaceState(null, "", `?${encodeView(view)}`);
}

function option(value: string, label?: string): HTMLOptionElement {
  const el = document.createElement("option");
  el.value = value;
  el.textContent = label ?? value;
  return el;
}

function rebuildSelectors(): void {
  const perspective = $("perspective") as HTMLSelectElement;
  perspective.replaceChildren(...PERSPECTIVES.map((p) => option(p)));
  perspective.value = view.perspective;

  const group = $("group") as HTMLSelectElement;
  group.replaceChildren(...allowedGroups(view.perspective).map((g) => option(g)));
  group.value = view.group;

  const phase = $("phase") as HTMLSelectElement;
  phase.replaceChildren(option("all"),
                        ...PHASES.map((p) => option(String(p), `phase ${p}`)));
  phase.value = String(view.phase);

  const lookahead = $("lookahead") as HTMLSelectElement;
  lookahead.replaceChildren(option("all"),
                            ...LOOKAHEADS.map((l) => option(String(l), `${l} days`)));
  lookahead.value = String(view.lookahead);

  const baseline = bundle
    ? `${view.group} vs ${bundle.unprotected}`
    : "";
  $("baseline-note").textContent = baseline;
}

function onHover(box: TeamBox | null): void {
  if (!bundle) return;
  const team = box ? box.team : pinnedTeam;
  drawCard($("card"), team ? renderCard(bundle, team, view) : null);
  if (box) pinnedTeam = box.team;
}

function redraw(): void {
  if (!bundle) return;
  const family = groupFamily(view.perspective);
  if (family !== bundle.group_by) {
    drawChart($("chart"), {
      groups: [], referenceLine: 1,
      emptyMessage: `This bundle is keyed by ${bundle.group_by}; load a `
        + `${family}-keyed bundle for the ${view.perspective} perspective.`,
      view,
    }, onHover);
    drawCard($("card"), null);
    return;
  }
  drawChart($("chart"), renderBoxplots(bundle, view), onHover);
  drawCard($("card"), pinnedTeam ? renderCard(bundle, pinnedTeam, view) : null);
}

function setView(next: ViewState): void {
  view = normalize(next);
  syncUrl();
  rebuildSelectors();
  redraw();
}

async function loadBundleFromUrl(url: string): Promise<void> {
  const response = await fetch(url);
  if (!response.ok) throw new Error(`fetch ${url}: ${response.status}`);
  bundle = validateBundle(await response.json());
  pinnedTeam = null;
  $("bundle-note").textContent =
    `${bundle.teams.length} teams, grouped by ${bundle.group_by} `
    + `(run ${bundle.run.config_hash || "unknown"})`;
  setView(view);
}

function wireControls(): void {
  ($("perspective") as HTMLSelectElement).addEventListener("change", (e) => {
    const perspective = (e.target as HTMLSelectElement).value as ViewState["perspective"];
    setView({ ...view, perspective });
  });
  ($("group") as HTMLSelectElement).addEventListener("change", (e) => {
    setView({ ...view, group: (e.target as HTMLSelectElement).value });
  });
  ($("phase") as HTMLSelectElement).addEventListener("change", (e) => {
    const raw = (e.target as HTMLSelectElement).value;
    setView({ ...view, phase: raw === "all" ? "all" : Number(raw) });
  });
  ($("lookahead") as HTMLSelectElement).addEventListener("change", (e) => {
    const raw = (e.target as HTMLSelectElement).value;
    setView({ ...view, lookahead: raw === "all" ? "all" : Number(raw) });
  });
  ($("bundle-file") as HTMLInputElement).addEventListener("change", async (e) => {
    const file = (e.target as HTMLInputElement).files?.[0];
    if (!file) return;
    bundle = validateBundle(JSON.parse(await file.text()));
    pinnedTeam = null;
    $("bundle-note").textContent =
      `${file.name}: ${bundle.teams.length} teams, grouped by ${bundle.group_by}`;
    setView(view);
  });
}

async function start(): Promise<void> {
  view = decodeView(location.search);
  wireControls();
  rebuildSelectors();
  try {
    await loadBundleFromUrl("./bundle.json");
  } catch {
    $("bundle-note").textContent =
      "No bundle.json next to the app; use the file picker to load one.";
  }
}

start();
