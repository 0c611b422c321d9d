import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { findCard, renderCard } from "../src/card.js";
import { AuditBundle, validateBundle } from "../src/types.js";
import { ViewState } from "../src/viewstate.js";

function loadFixture(): AuditBundle {
  const raw = readFileSync(
    join(__dirname, "fixtures", "golden-bundle.json"), "utf-8");
  return validateBundle(JSON.parse(raw));
}

const VIEW: ViewState = {
  perspective: "race", group: "Hispanic", phase: "all", lookahead: "all",
};

function rows(model: ReturnType<typeof renderCard>, title: string) {
  const section = model.sections.find((s) => s.title === title);
  expect(section, `section ${title}`).toBeDefined();
  return Object.fromEntries(section!.rows.map((r) => [r.label, r.value]));
}

describe("nutritional card view (golden values)", () => {
  it("displays the published AER summary verbatim", () => {
    const card = renderCard(loadFixture(), "IowaStateLW STEM", VIEW);
    expect(card.available).toBe(true);
    const aer = rows(card, "Team AER Values");
    expect(aer["median"]).toBe("1.588");
    expect(aer["min"]).toBe("1.172");
    expect(aer["max"]).toBe("4.772");
  });

  it("has exactly the four sections", () => {
    const card = renderCard(loadFixture(), "IowaStateLW STEM", VIEW);
    expect(card.sections.map((s) => s.title)).toEqual([
      "Model Information",
      "Mean Difference vs Unprotected Reference",
      "Team AER Values",
      "Coverage",
    ]);
  });

  it("model info names the team and the variables analyzed", () => {
    const card = renderCard(loadFixture(), "IowaStateLW STEM", VIEW);
    const info = rows(card, "Model Information");
    expect(info["team"]).toBe("IowaStateLW STEM");
    expect(info["variables analyzed"]).toBe("race: Hispanic vs White");
    expect(info["model type"]).toBe("Statistical");
  });

  it("mean difference keeps lower <= value <= upper", () => {
    const card = renderCard(loadFixture(), "IowaStateLW STEM", VIEW);
    const md = rows(card, "Mean Difference vs Unprotected Reference");
    const lower = Number(md["lower bound"]);
    const value = Number(md["difference (PBL)"]);
    const upper = Number(md["upper bound"]);
    expect(lower).toBeLessThanOrEqual(value);
    expect(value).toBeLessThanOrEqual(upper);
  });

  it("coverage counts are positive integers from the bundle", () => {
    const card = renderCard(loadFixture(), "IowaStateLW STEM", VIEW);
    const coverage = rows(card, "Coverage");
    expect(coverage["counties"]).toBe("52");
    expect(coverage["predictions"]).toBe("1040");
  });

  it("switching the lookahead selector re-renders from the matching card", () => {
    const bundle = loadFixture();
    const all = findCard(bundle, "IowaStateLW STEM", VIEW)!;
    const phase0 = findCard(bundle, "IowaStateLW STEM", { ...VIEW, phase: 0 })!;
    expect(all.view.phase).toBe("all");
    expect(phase0.view.phase).toBe(0);
    expect(phase0.aer_values.median).not.toBe(all.aer_values.median);
  });

  it("absent selection shows no-coverage instead of crashing", () => {
    const card = renderCard(loadFixture(), "IowaStateLW STEM",
                            { ...VIEW, lookahead: 28 });
    expect(card.available).toBe(false);
    expect(JSON.stringify(card.sections)).toMatch(/no coverage/);
  });

  it("unknown team raises", () => {
    expect(() => renderCard(loadFixture(), "NoSuchTeam", VIEW)).toThrow();
  });

  it("rendering leaves the bundle unchanged (read-only contract)", () => {
    const bundle = loadFixture();
    const before = JSON.stringify(bundle);
    renderCard(bundle, "IowaStateLW STEM", VIEW);
    renderCard(bundle, "EnsembleHub", VIEW);
    expect(JSON.stringify(bundle)).toBe(before);
  });
});
