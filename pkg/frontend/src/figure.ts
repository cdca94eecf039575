/**
 * Multi-panel comparison figure as an SVG string.
 *
 * One panel per method: the true density (green line with squares), the
 * posterior mean (red line with circles) and the pointwise 95% band (red
 * dashed edges over a light fill). Count-space reports switch to step
 * lines with stems for the truth. Output depends only on the report data
 * and the options, so re-rendering identical inputs is byte-identical.
 */

import { Report, MethodSummary } from "./report.js";

export interface FigureOptions {
    width: number;
    height: number;
    columns: number;
    yMax: number | null;
    markerEvery: number | null;
    title: string | null;
}

const DEFAULTS: FigureOptions = {
    width: 1200,
    height: 0, // 0 = derived from the panel count
    columns: 2,
    yMax: null,
    markerEvery: null,
    title: null,
};

const COLORS = {
    truth: "#2e8b22",
    mean: "#cc2222",
    band: "#cc2222",
    bandFill: "rgba(204,34,34,0.12)",
    axis: "#333333",
    gridline: "#dddddd",
};

const PANEL = { top: 34, right: 12, bottom: 38, left: 56 };
const PANEL_HEIGHT = 260;

function fmt(x: number): string {
    if (!Number.isFinite(x)) return "0";
    const rounded = Math.round(x * 1000) / 1000;
    return String(rounded);
}

function fmtTick(x: number): string {
    if (x === 0) return "0";
    const abs = Math.abs(x);
    if (abs >= 1000 || abs < 0.001) return x.toExponential(0);
    return String(Math.round(x * 1000) / 1000);
}

function ticks(lo: number, hi: number, count: number): number[] {
    const span = hi - lo;
    if (span <= 0) return [lo];
    const step = Math.pow(10, Math.floor(Math.log10(span / count)));
    const err = (span / count) / step;
    const factor = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
    const inc = step * factor;
    const start = Math.ceil(lo / inc) * inc;
    const out: number[] = [];
    for (let v = start; v <= hi + 1e-12; v += inc) {
        out.push(Math.abs(v) < inc * 1e-9 ? 0 : v);
    }
    return out;
}

class Scale {
    constructor(
        private d0: number,
        private d1: number,
        private r0: number,
        private r1: number
    ) {}

    at(x: number): number {
        const t = (x - this.d0) / (this.d1 - this.d0);
        return this.r0 + t * (this.r1 - this.r0);
    }
}

function linePath(xs: number[], ys: number[], sx: Scale, sy: Scale): string {
    const parts: string[] = [];
    for (let i = 0; i < xs.length; i++) {
        const cmd = i === 0 ? "M" : "L";
        parts.push(`${cmd}${fmt(sx.at(xs[i]))},${fmt(sy.at(ys[i]))}`);
    }
    return parts.join(" ");
}

function stepPath(xs: number[], ys: number[], sx: Scale, sy: Scale): string {
    // horizontal segment over [k - 0.5, k + 0.5] per support point
    const parts: string[] = [];
    for (let i = 0; i < xs.length; i++) {
        const x0 = sx.at(xs[i] - 0.5);
        const x1 = sx.at(xs[i] + 0.5);
        const y = sy.at(ys[i]);
        parts.push(`${i === 0 ? "M" : "L"}${fmt(x0)},${fmt(y)} L${fmt(x1)},${fmt(y)}`);
    }
    return parts.join(" ");
}

function bandPath(
    xs: number[], lower: number[], upper: number[], sx: Scale, sy: Scale
): string {
    const up: string[] = [];
    for (let i = 0; i < xs.length; i++) {
        up.push(`${i === 0 ? "M" : "L"}${fmt(sx.at(xs[i]))},${fmt(sy.at(upper[i]))}`);
    }
    const down: string[] = [];
    for (let i = xs.length - 1; i >= 0; i--) {
        down.push(`L${fmt(sx.at(xs[i]))},${fmt(sy.at(lower[i]))}`);
    }
    return up.join(" ") + " " + down.join(" ") + " Z";
}

function markers(
    xs: number[], ys: number[], sx: Scale, sy: Scale,
    shape: "circle" | "square", color: string, every: number
): string {
    const out: string[] = [];
    for (let i = 0; i < xs.length; i += every) {
        const cx = sx.at(xs[i]);
        const cy = sy.at(ys[i]);
        if (shape === "circle") {
            out.push(`<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="2.4" fill="none" stroke="${color}" stroke-width="1"/>`);
        } else {
            out.push(`<rect x="${fmt(cx - 2.2)}" y="${fmt(cy - 2.2)}" width="4.4" height="4.4" fill="none" stroke="${color}" stroke-width="1"/>`);
        }
    }
    return out.join("");
}

function panelSvg(
    method: MethodSummary,
    space: "continuous" | "count",
    x0: number, y0: number, width: number, height: number,
    yMax: number, markerEvery: number
): string {
    const inner = {
        x: x0 + PANEL.left,
        y: y0 + PANEL.top,
        w: width - PANEL.left - PANEL.right,
        h: height - PANEL.top - PANEL.bottom,
    };
    const grid = method.grid;
    const pad = space === "count" ? 0.5 : 0;
    const sx = new Scale(grid[0] - pad, grid[grid.length - 1] + pad, inner.x, inner.x + inner.w);
    const sy = new Scale(0, yMax, inner.y + inner.h, inner.y);

    const parts: string[] = [`<g class="panel" data-method="${method.name}">`];

    // frame and gridlines
    for (const t of ticks(0, yMax, 5)) {
        const y = sy.at(t);
        parts.push(`<line x1="${fmt(inner.x)}" y1="${fmt(y)}" x2="${fmt(inner.x + inner.w)}" y2="${fmt(y)}" stroke="${COLORS.gridline}" stroke-width="0.6"/>`);
        parts.push(`<text x="${fmt(inner.x - 6)}" y="${fmt(y + 3)}" text-anchor="end" font-size="10" fill="${COLORS.axis}">${fmtTick(t)}</text>`);
    }
    for (const t of ticks(grid[0], grid[grid.length - 1], 6)) {
        const x = sx.at(t);
        parts.push(`<line x1="${fmt(x)}" y1="${fmt(inner.y + inner.h)}" x2="${fmt(x)}" y2="${fmt(inner.y + inner.h + 4)}" stroke="${COLORS.axis}" stroke-width="0.8"/>`);
        parts.push(`<text x="${fmt(x)}" y="${fmt(inner.y + inner.h + 16)}" text-anchor="middle" font-size="10" fill="${COLORS.axis}">${fmtTick(t)}</text>`);
    }
    parts.push(`<rect x="${fmt(inner.x)}" y="${fmt(inner.y)}" width="${fmt(inner.w)}" height="${fmt(inner.h)}" fill="none" stroke="${COLORS.axis}" stroke-width="1"/>`);

    const clipId = `clip-${method.name}`;
    parts.push(`<clipPath id="${clipId}"><rect x="${fmt(inner.x)}" y="${fmt(inner.y)}" width="${fmt(inner.w)}" height="${fmt(inner.h)}"/></clipPath>`);
    parts.push(`<g clip-path="url(#${clipId})">`);

    const isStep = space === "count";
    const curve = isStep ? stepPath : linePath;

    // 95% band: light fill plus dashed edges
    parts.push(`<path class="band" d="${bandPath(grid, method.lower, method.upper, sx, sy)}" fill="${COLORS.bandFill}" stroke="none"/>`);
    parts.push(`<path class="band-edge" d="${curve(grid, method.lower, sx, sy)}" fill="none" stroke="${COLORS.band}" stroke-width="1" stroke-dasharray="5,3"/>`);
    parts.push(`<path class="band-edge" d="${curve(grid, method.upper, sx, sy)}" fill="none" stroke="${COLORS.band}" stroke-width="1" stroke-dasharray="5,3"/>`);

    // truth: green with squares (stems for count supports)
    if (method.truth) {
        if (isStep) {
            const stems: string[] = [];
            for (let i = 0; i < grid.length; i++) {
                stems.push(`<line class="stem" x1="${fmt(sx.at(grid[i]))}" y1="${fmt(sy.at(0))}" x2="${fmt(sx.at(grid[i]))}" y2="${fmt(sy.at(method.truth[i]))}" stroke="${COLORS.truth}" stroke-width="1"/>`);
            }
            parts.push(`<g class="truth">${stems.join("")}${markers(grid, method.truth, sx, sy, "square", COLORS.truth, markerEvery)}</g>`);
        } else {
            parts.push(`<g class="truth"><path d="${linePath(grid, method.truth, sx, sy)}" fill="none" stroke="${COLORS.truth}" stroke-width="1.4"/>${markers(grid, method.truth, sx, sy, "square", COLORS.truth, markerEvery)}</g>`);
        }
    }

    // posterior mean: red with circles
    parts.push(`<g class="mean"><path d="${curve(grid, method.mean, sx, sy)}" fill="none" stroke="${COLORS.mean}" stroke-width="1.4"/>${markers(grid, method.mean, sx, sy, "circle", COLORS.mean, markerEvery)}</g>`);

    parts.push("</g>");

    const sub: string[] = [];
    if (method.coverage !== null) sub.push(`coverage ${method.coverage.toFixed(2)}`);
    if (method.ise !== null) sub.push(`ISE ${method.ise.toExponential(1)}`);
    parts.push(`<text class="panel-title" x="${fmt(inner.x + inner.w / 2)}" y="${fmt(y0 + 16)}" text-anchor="middle" font-size="13" font-weight="bold" fill="${COLORS.axis}">${method.label}</text>`);
    if (sub.length > 0) {
        parts.push(`<text x="${fmt(inner.x + inner.w / 2)}" y="${fmt(y0 + 29)}" text-anchor="middle" font-size="10" fill="#666666">${sub.join(", ")}</text>`);
    }
    parts.push("</g>");
    return parts.join("\n");
}

export function renderFigure(report: Report, options: Partial<FigureOptions> = {}): string {
    const opts = { ...DEFAULTS, ...options };
    const n = report.methods.length;
    const columns = Math.max(1, Math.min(opts.columns, n));
    const rows = Math.ceil(n / columns);
    const panelWidth = opts.width / columns;
    const height = opts.height > 0 ? opts.height : rows * PANEL_HEIGHT + 46;
    const panelHeight = (height - 46) / rows;

    let yMax = opts.yMax ?? 0;
    if (!opts.yMax) {
        for (const m of report.methods) {
            for (const v of m.upper) yMax = Math.max(yMax, v);
            if (m.truth) for (const v of m.truth) yMax = Math.max(yMax, v);
        }
        yMax *= 1.05;
    }
    if (!(yMax > 0)) yMax = 1;

    const markerEvery =
        opts.markerEvery ?? Math.max(1, Math.floor(report.methods[0].grid.length / 50));

    const parts: string[] = [];
    parts.push(
        `<svg xmlns="http://www.w3.org/2000/svg" width="${opts.width}" height="${fmt(height)}" viewBox="0 0 ${opts.width} ${fmt(height)}" font-family="Helvetica, Arial, sans-serif">`
    );
    parts.push(`<rect width="100%" height="100%" fill="white"/>`);
    const title = opts.title ?? `Estimated ${report.space === "count" ? "probabilities" : "densities"}: ${report.scenario}`;
    parts.push(`<text x="${opts.width / 2}" y="20" text-anchor="middle" font-size="15" font-weight="bold" fill="${COLORS.axis}">${title}</text>`);

    report.methods.forEach((method, i) => {
        const col = i % columns;
        const row = Math.floor(i / columns);
        parts.push(
            panelSvg(method, report.space, col * panelWidth, 28 + row * panelHeight,
                     panelWidth, panelHeight, yMax, markerEvery)
        );
    });

    // legend
    const ly = height - 10;
    parts.push(`<g class="legend" font-size="11" fill="${COLORS.axis}">`);
    parts.push(`<rect x="${opts.width / 2 - 210}" y="${ly - 9}" width="9" height="9" fill="none" stroke="${COLORS.truth}"/><text x="${opts.width / 2 - 196}" y="${ly}">truth</text>`);
    parts.push(`<circle cx="${opts.width / 2 - 120}" cy="${ly - 4}" r="4" fill="none" stroke="${COLORS.mean}"/><text x="${opts.width / 2 - 110}" y="${ly}">posterior mean</text>`);
    parts.push(`<line x1="${opts.width / 2 + 10}" y1="${ly - 4}" x2="${opts.width / 2 + 40}" y2="${ly - 4}" stroke="${COLORS.band}" stroke-dasharray="5,3"/><text x="${opts.width / 2 + 46}" y="${ly}">95% band</text>`);
    parts.push("</g>");
    parts.push("</svg>");
    return parts.join("\n");
}
