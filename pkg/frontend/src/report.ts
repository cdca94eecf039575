/**
 * Loading and validation of svymix report directories.
 *
 * A report directory holds `report.json` plus one summary CSV per method
 * (`y,mean,lower,upper[,truth]`, or `k,...` for count supports). The
 * renderer never writes into the directory.
 */

import * as fs from "node:fs";
import * as path from "node:path";

export interface MethodSummary {
    name: string;
    label: string;
    grid: number[];
    mean: number[];
    lower: number[];
    upper: number[];
    truth: number[] | null;
    coverage: number | null;
    ise: number | null;
}

export interface Report {
    scenario: string;
    space: "continuous" | "count";
    seed: number | null;
    methods: MethodSummary[];
}

/** Panel captions for the known method names. */
export const METHOD_LABELS: Record<string, string> = {
    proposed: "Proposed",
    unadjusted: "Non-adjusted",
    weighted_kde: "Weighted KDE",
    ht: "HT",
    re: "RE",
    gp: "GP",
};

/** Preferred panel ordering; unknown methods go last alphabetically. */
const METHOD_ORDER = ["proposed", "unadjusted", "weighted_kde", "ht", "re", "gp"];

interface SummaryColumns {
    grid: number[];
    mean: number[];
    lower: number[];
    upper: number[];
    truth: number[] | null;
}

export function parseSummaryCsv(filePath: string): SummaryColumns {
    const text = fs.readFileSync(filePath, "utf-8");
    const lines = text.split(/\r?\n/).filter((line) => line.trim() !== "");
    if (lines.length < 2) {
        throw new Error(`${filePath}: no data rows`);
    }
    const header = lines[0].split(",");
    const expected = ["mean", "lower", "upper"];
    if (header.length < 4 || header.slice(1, 4).join(",") !== expected.join(",")) {
        throw new Error(`${filePath}: unexpected header '${lines[0]}'`);
    }
    const hasTruth = header.length >= 5 && header[4] === "truth";

    const grid: number[] = [];
    const mean: number[] = [];
    const lower: number[] = [];
    const upper: number[] = [];
    const truth: number[] = [];
    for (let i = 1; i < lines.length; i++) {
        const parts = lines[i].split(",");
        if (parts.length !== header.length) {
            throw new Error(`${filePath}: line ${i + 1}: expected ${header.length} fields`);
        }
        const values = parts.map(Number);
        if (values.some((v) => Number.isNaN(v))) {
            throw new Error(`${filePath}: line ${i + 1}: non-numeric field`);
        }
        grid.push(values[0]);
        mean.push(values[1]);
        lower.push(values[2]);
        upper.push(values[3]);
        if (hasTruth) truth.push(values[4]);
    }
    return { grid, mean, lower, upper, truth: hasTruth ? truth : null };
}

function sameGrid(a: number[], b: number[]): boolean {
    if (a.length !== b.length) return false;
    for (let i = 0; i < a.length; i++) {
        if (a[i] !== b[i]) return false;
    }
    return true;
}

/**
 * Load a report directory, checking that every referenced CSV exists and
 * that all methods share one evaluation grid.
 */
export function loadReport(dir: string): Report {
    const reportPath = path.join(dir, "report.json");
    if (!fs.existsSync(reportPath)) {
        throw new Error(`missing report file ${reportPath}`);
    }
    const meta = JSON.parse(fs.readFileSync(reportPath, "utf-8"));
    const names = Object.keys(meta.methods ?? {});
    if (names.length === 0) {
        throw new Error(`${reportPath}: no methods listed`);
    }
    names.sort((a, b) => {
        const ia = METHOD_ORDER.indexOf(a);
        const ib = METHOD_ORDER.indexOf(b);
        if (ia === -1 && ib === -1) return a.localeCompare(b);
        if (ia === -1) return 1;
        if (ib === -1) return -1;
        return ia - ib;
    });

    const methods: MethodSummary[] = [];
    for (const name of names) {
        const entry = meta.methods[name];
        const csvPath = path.join(dir, entry.csv ?? `${name}.csv`);
        if (!fs.existsSync(csvPath)) {
            throw new Error(`missing method CSV ${csvPath}`);
        }
        const cols = parseSummaryCsv(csvPath);
        methods.push({
            name,
            label: METHOD_LABELS[name] ?? name,
            ...cols,
            coverage: typeof entry.coverage === "number" ? entry.coverage : null,
            ise: typeof entry.ise === "number" ? entry.ise : null,
        });
    }

    const grid = methods[0].grid;
    for (const m of methods.slice(1)) {
        if (!sameGrid(grid, m.grid)) {
            throw new Error(
                `grid mismatch: ${methods[0].name}.csv and ${m.name}.csv disagree`
            );
        }
    }

    return {
        scenario: meta.scenario ?? "scenario",
        space: meta.space === "count" ? "count" : "continuous",
        seed: typeof meta.seed === "number" ? meta.seed : null,
        methods,
    };
}
