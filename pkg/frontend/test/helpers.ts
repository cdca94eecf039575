import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

export function tmpDir(): string {
    return fs.mkdtempSync(path.join(os.tmpdir(), "svymix-fig-"));
}

function csvFor(grid: number[], shift: number, withTruth = true): string {
    const lines = [withTruth ? "y,mean,lower,upper,truth" : "y,mean,lower,upper"];
    for (const y of grid) {
        const truth = Math.exp(-0.5 * y * y) / Math.sqrt(2 * Math.PI);
        const mean = truth * (1 + shift);
        const row = [y, mean, mean * 0.8, mean * 1.2];
        if (withTruth) row.push(truth);
        lines.push(row.join(","));
    }
    return lines.join("\n") + "\n";
}

export interface FixtureOptions {
    methods?: string[];
    space?: "continuous" | "count";
    points?: number;
    withTruth?: boolean;
}

/** Build a minimal report directory and return its path. */
export function makeReportDir(options: FixtureOptions = {}): string {
    const methods = options.methods ?? ["proposed", "unadjusted", "ht", "re", "gp"];
    const space = options.space ?? "continuous";
    const points = options.points ?? 25;
    const dir = tmpDir();

    const grid =
        space === "count"
            ? Array.from({ length: points }, (_, i) => i)
            : Array.from({ length: points }, (_, i) => -4 + (8 * i) / (points - 1));

    const meta: any = { scenario: "fixture", seed: 1, space, methods: {} };
    methods.forEach((name, i) => {
        const csv = `${name}.csv`;
        fs.writeFileSync(
            path.join(dir, csv),
            csvFor(grid, 0.05 * i, options.withTruth ?? true)
        );
        meta.methods[name] = { csv, coverage: 0.9 + 0.01 * i, ise: 0.001 * (i + 1) };
    });
    fs.writeFileSync(path.join(dir, "report.json"), JSON.stringify(meta, null, 2));
    return dir;
}
