// Equator view: the virtual-scale plane as an SVG string.
// Pure function of the geometry document, so it is testable without a DOM.

import type { PlotGeometry, PlotVector } from "./types.js";

const W = 560;
const H = 560;
const PAD = 48;

export interface ChartScale {
  lo: number;
  hi: number;
  x(v: number): number;
  y(v: number): number;
}

export function chartScale(geometry: PlotGeometry): ChartScale {
  const xs = [0, geometry.anchor.x, geometry.projection.alpha];
  const ys = [0, geometry.anchor.y, geometry.projection.beta];
  for (const p of geometry.points) {
    xs.push(p.alpha);
    ys.push(p.beta);
  }
  const lo0 = Math.min(...xs, ...ys);
  const hi0 = Math.max(...xs, ...ys);
  const span = hi0 - lo0 || 1;
  const lo = lo0 - 0.08 * span;
  const hi = hi0 + 0.08 * span;
  return {
    lo,
    hi,
    x: (v: number) => PAD + ((v - lo) / (hi - lo)) * (W - 2 * PAD),
    y: (v: number) => H - PAD - ((v - lo) / (hi - lo)) * (H - 2 * PAD),
  };
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function line(s: ChartScale, vec: PlotVector, cls: string): string {
  const [x1, y1] = vec.tail;
  const [x2, y2] = vec.head;
  return `<line class="${cls}" x1="${s.x(x1).toFixed(1)}" y1="${s.y(y1).toFixed(1)}" ` +
    `x2="${s.x(x2).toFixed(1)}" y2="${s.y(y2).toFixed(1)}"/>`;
}

/** Render the full equator view.  Hovering a point reveals its scales via
 * a <title> tooltip. */
export function renderEquatorView(geometry: PlotGeometry): string {
  const s = chartScale(geometry);
  const parts: string[] = [];
  parts.push(
    `<svg viewBox="0 0 ${W} ${H}" xmlns="http://www.w3.org/2000/svg" role="img" ` +
      `aria-label="virtual-scale plane for ${esc(geometry.dmu)}">`,
  );
  parts.push(`<line class="axis" x1="${PAD}" y1="${s.y(0).toFixed(1)}" x2="${W - PAD}" y2="${s.y(0).toFixed(1)}"/>`);
  parts.push(`<line class="axis" x1="${s.x(0).toFixed(1)}" y1="${PAD}" x2="${s.x(0).toFixed(1)}" y2="${H - PAD}"/>`);
  parts.push(
    `<line class="equator" x1="${s.x(s.lo).toFixed(1)}" y1="${s.y(s.lo).toFixed(1)}" ` +
      `x2="${s.x(s.hi).toFixed(1)}" y2="${s.y(s.hi).toFixed(1)}"/>`,
  );
  parts.push(line(s, geometry.vectors.origin_to_focus, "vec vec-focus"));
  parts.push(line(s, geometry.vectors.origin_to_anchor, "vec vec-anchor"));
  parts.push(line(s, geometry.vectors.anchor_to_focus, "vec vec-anchor"));

  for (const p of geometry.points) {
    const cls = p.is_focus ? "pt pt-focus" : p.is_reference ? "pt pt-reference" : "pt";
    const title = `${p.label}: virtual input ${p.alpha.toFixed(4)}, virtual output ${p.beta.toFixed(4)}`;
    parts.push(
      `<g class="${cls}"><circle cx="${s.x(p.alpha).toFixed(1)}" cy="${s.y(p.beta).toFixed(1)}" ` +
        `r="${p.is_focus ? 6 : 4.5}"><title>${esc(title)}</title></circle>` +
        `<text x="${(s.x(p.alpha) + 8).toFixed(1)}" y="${(s.y(p.beta) - 8).toFixed(1)}">${esc(p.label)}</text></g>`,
    );
  }

  const a = geometry.anchor;
  parts.push(
    `<g class="anchor"><rect x="${(s.x(a.x) - 4).toFixed(1)}" y="${(s.y(a.y) - 4).toFixed(1)}" width="8" height="8">` +
      `<title>anchor (${a.x.toFixed(4)}, ${a.y.toFixed(4)}) - quadrant ${esc(a.quadrant)}</title></rect>` +
      `<text x="${(s.x(a.x) + 8).toFixed(1)}" y="${(s.y(a.y) + 4).toFixed(1)}">anchor</text></g>`,
  );
  const t = geometry.projection;
  parts.push(
    `<g class="projection"><circle cx="${s.x(t.alpha).toFixed(1)}" cy="${s.y(t.beta).toFixed(1)}" r="5">` +
      `<title>benchmark projection (${t.alpha.toFixed(4)}, ${t.beta.toFixed(4)})</title></circle></g>`,
  );
  parts.push("</svg>");
  return parts.join("\n");
}

/** Placeholder panel shown while a scalar is infeasible (HTTP 422). */
export function renderEmptyState(message: string): string {
  return `<div class="empty-state"><p>${esc(message)}</p></div>`;
}
