/**
 * CLI: render a comparison figure from an svymix report directory.
 *
 *   node dist/render.js --report <dir> --out figure.svg
 *
 * `.svg` output is written directly; `.png` goes through resvg. Exit codes
 * mirror the Python CLI: 0 success, 2 usage/validation, 3 runtime failure.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { loadReport } from "./report.js";
import { renderFigure, FigureOptions } from "./figure.js";

interface CliArgs {
    report: string;
    out: string;
    options: Partial<FigureOptions>;
}

const USAGE =
    "usage: render --report <dir> --out <figure.svg|figure.png> " +
    "[--width N] [--height N] [--columns N] [--ymax X] " +
    "[--marker-every N] [--title TEXT]";

export function parseArgs(argv: string[]): CliArgs {
    const options: Partial<FigureOptions> = {};
    let report: string | null = null;
    let out: string | null = null;

    for (let i = 0; i < argv.length; i++) {
        const arg = argv[i];
        const next = () => {
            i += 1;
            if (i >= argv.length) throw new Error(`${arg} needs a value`);
            return argv[i];
        };
        switch (arg) {
            case "--report": report = next(); break;
            case "--out": out = next(); break;
            case "--width": options.width = Number(next()); break;
            case "--height": options.height = Number(next()); break;
            case "--columns": options.columns = Number(next()); break;
            case "--ymax": options.yMax = Number(next()); break;
            case "--marker-every": options.markerEvery = Number(next()); break;
            case "--title": options.title = next(); break;
            case "--help":
            case "-h":
                throw new Error(USAGE);
            default:
                throw new Error(`unknown argument ${arg}\n${USAGE}`);
        }
    }
    if (!report || !out) {
        throw new Error(`--report and --out are required\n${USAGE}`);
    }
    for (const [key, value] of Object.entries(options)) {
        if (typeof value === "number" && !Number.isFinite(value)) {
            throw new Error(`--${key} must be numeric`);
        }
    }
    return { report, out, options };
}

export async function render(args: CliArgs): Promise<string> {
    const report = loadReport(args.report);
    const svg = renderFigure(report, args.options);
    const ext = path.extname(args.out).toLowerCase();
    if (ext === ".svg" || ext === "") {
        fs.writeFileSync(args.out, svg);
        return args.out;
    }
    if (ext === ".png") {
        const { Resvg } = await import("@resvg/resvg-js");
        const png = new Resvg(svg, { background: "white" }).render().asPng();
        fs.writeFileSync(args.out, png);
        return args.out;
    }
    throw new Error(`unsupported output extension '${ext}'; use .svg or .png`);
}

async function main(): Promise<number> {
    let args: CliArgs;
    try {
        args = parseArgs(process.argv.slice(2));
    } catch (err) {
        console.error((err as Error).message);
        return 2;
    }
    try {
        const out = await render(args);
        console.log(out);
        return 0;
    } catch (err) {
        const message = (err as Error).message;
        console.error(`error: ${message}`);
        // validation problems (missing/inconsistent inputs) exit 2
        return /missing|mismatch|unexpected|unsupported|no data|no methods/.test(message) ? 2 : 3;
    }
}

const entry = process.argv[1] ? path.resolve(process.argv[1]) : "";
if (entry && import.meta.url === `file://${entry}`) {
    main().then((code) => process.exit(code));
}
