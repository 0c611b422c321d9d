/** SVG/DOM rendering of the chart model and card view model. */

import { ChartModel, TeamBox } from "./boxplot.js";
import { CardViewModel } from "./card.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const LAYOUT = {
  width: 960,
  height: 420,
  top: 24,
  bottom: 96,
  left: 56,
  right: 16,
  boxWidth: 26,
  boxGap: 18,
  groupGap: 42,
};

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K, attrs: Record<string, string | number>): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, String(value));
  }
  return el;
}

export function drawChart(container: HTMLElement, model: ChartModel,
                          onHover: (box: TeamBox | null) => void): void {
  container.replaceChildren();
  if (model.emptyMessage) {
    const note = document.createElement("p");
    note.className = "empty-state";
    note.textContent = model.emptyMessage;
    container.appendChild(note);
    return;
  }

  const boxes = model.groups.flatMap((g) => g.boxes);
  const allValues = boxes.flatMap((b) => [b.min, b.max]);
  const vMin = Math.min(...allValues, model.referenceLine);
  const vMax = Math.max(...allValues, model.referenceLine);
  const pad = (vMax - vMin || 1) * 0.08;
  const lo = vMin - pad;
  const hi = vMax + pad;
  const plotH = LAYOUT.height - LAYOUT.top - LAYOUT.bottom;
  const yOf = (v: number): number =>
    LAYOUT.top + plotH * (1 - (v - lo) / (hi - lo));

  const svg = svgEl("svg", {
    viewBox: `0 0 ${LAYOUT.width} ${LAYOUT.height}`,
    role: "img",
  });

  // y axis with a handful of ticks
  for (let i = 0; i <= 4; i++) {
    const v = lo + ((hi - lo) * i) / 4;
    const y = yOf(v);
    svg.appendChild(svgEl("line", {
      x1: LAYOUT.left, x2: LAYOUT.width - LAYOUT.right, y1: y, y2: y,
      class: "gridline",
    }));
    const label = svgEl("text", {
      x: LAYOUT.left - 8, y: y + 4, class: "tick-label", "text-anchor": "end",
    });
    label.textContent = v.toFixed(2);
    svg.appendChild(label);
  }

  // parity reference
  const refY = yOf(model.referenceLine);
  svg.appendChild(svgEl("line", {
    x1: LAYOUT.left, x2: LAYOUT.width - LAYOUT.right, y1: refY, y2: refY,
    class: "reference-line",
  }));

  let x = LAYOUT.left + LAYOUT.groupGap / 2;
  for (const group of model.groups) {
    const groupStart = x;
    for (const box of group.boxes) {
      const cx = x + LAYOUT.boxWidth / 2;
      svg.appendChild(svgEl("line", {
        x1: cx, x2: cx, y1: yOf(box.max), y2: yOf(box.min), class: "whisker",
      }));
      for (const v of [box.min, box.max]) {
        svg.appendChild(svgEl("line", {
          x1: cx - 6, x2: cx + 6, y1: yOf(v), y2: yOf(v), class: "whisker",
        }));
      }
      const rect = svgEl("rect", {
        x, y: yOf(box.q3), width: LAYOUT.boxWidth,
        height: Math.max(1, yOf(box.q1) - yOf(box.q3)), class: "box",
        "data-team": box.team,
      });
      rect.addEventListener("mouseenter", () => onHover(box));
      rect.addEventListener("mouseleave", () => onHover(null));
      svg.appendChild(rect);
      svg.appendChild(svgEl("line", {
        x1: x, x2: x + LAYOUT.boxWidth, y1: yOf(box.median), y2: yOf(box.median),
        class: "median-line",
      }));
      const name = svgEl("text", {
        x: cx, y: LAYOUT.height - LAYOUT.bottom + 12, class: "team-label",
        transform: `rotate(40 ${cx} ${LAYOUT.height - LAYOUT.bottom + 12})`,
      });
      name.textContent = box.team;
      svg.appendChild(name);
      x += LAYOUT.boxWidth + LAYOUT.boxGap;
    }
    const label = svgEl("text", {
      x: (groupStart + x - LAYOUT.boxGap) / 2,
      y: LAYOUT.height - 8, class: "group-label", "text-anchor": "middle",
    });
    label.textContent = group.modelType;
    svg.appendChild(label);
    x += LAYOUT.groupGap;
  }

  container.appendChild(svg);
}

export function drawCard(container: HTMLElement, model: CardViewModel | null): void {
  container.replaceChildren();
  if (!model) {
    const hint = document.createElement("p");
    hint.className = "empty-state";
    hint.textContent = "Hover a box to see the team's fairness nutritional card.";
    container.appendChild(hint);
    return;
  }
  const title = document.createElement("h2");
  title.textContent = model.team;
  container.appendChild(title);
  for (const section of model.sections) {
    const heading = document.createElement("h3");
    heading.textContent = section.title;
    container.appendChild(heading);
    const list = document.createElement("dl");
    for (const row of section.rows) {
      const dt = document.createElement("dt");
      dt.textContent = row.label;
      const dd = document.createElement("dd");
      dd.textContent = row.value;
      list.append(dt, dd);
    }
    container.appendChild(list);
  }
}
