"""CSV / JSON / plot-data emission for sweep results."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .sweep import SweepResult

RUNS_HEADER = ["n", "p", "optimizer", "N", "run", "seed", "reached", "N_total", "final_cost", "evals"]
SUMMARY_HEADER = ["optimizer", "n", "N_star", "median_N_total", "log_slope", "intercept", "r_squared",
                  "growth_factor"]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def runs_csv(result: SweepResult) -> str:
    return _csv(RUNS_HEADER, ([getattr(r, k) for k in RUNS_HEADER] for r in result.records()))


def summary_csv(result: SweepResult) -> str:
    rows = []
    for (opt, n), sel in sorted(result.optimal.items(), key=lambda kv: (result.config.optimizers.index(kv[0][0]), kv[0][1])):
        fit = result.fits.get(opt)
        rows.append([opt, n, sel.N, sel.median,
                     fit.log_slope if fit else None, fit.intercept if fit else None,
                     fit.r_squared if fit else None, fit.growth_factor if fit else None])
    return _csv(SUMMARY_HEADER, rows)


def sweep_json(result: SweepResult) -> str:
    return canonical_json(result.to_dict())


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n"


def fig3_dat(result: SweepResult) -> str:
    """Whitespace-separated ``n median`` blocks, one per optimizer, separated by two blank lines."""
    blocks = []
    for opt in result.config.optimizers:
        points = result.scaling(opt)
        if not points:
            continue
        lines = [f"# {opt}", "# n median_N_total"] + [f"{n} {median}" for n, median in points]
        blocks.append("\n".join(lines) + "\n")
    return "\n\n".join(blocks)


def load_result(path) -> SweepResult:
    with open(path) as fh:
        return SweepResult.from_dict(json.load(fh))


def emit_outputs(result: SweepResult, out_dir) -> dict:
    """Write ``runs.csv``, ``summary.csv``, ``sweep.json`` and ``fig3.dat`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "runs.csv": runs_csv(result),
        "summary.csv": summary_csv(result),
        "sweep.json": sweep_json(result),
        "fig3.dat": fig3_dat(result),
    }
    paths = {}
    for name, text in files.items():
        path = out / name
        path.write_text(text)
        paths[name] = path
    return paths
