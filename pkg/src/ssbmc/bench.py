"""Benchmark runner: every system x precision x property in a suite directory."""
from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from .runner import CLI_PROPERTIES, TaskError, run_task, task_from_spec, with_precision
from .specfile import SpecError, SpecFile, parse_spec

DEFAULT_PRECISIONS = (8, 16, 32)
SUITE_DIR = Path(__file__).with_name("suite")


def suite_files(directory) -> list[Path]:
    return sorted(Path(directory).glob("*.ss"))


def _run_one(job):
    path, width, prop, timeout, presolve = job
    t0 = time.perf_counter()
    row = {"system": Path(path).stem, "precision": width, "property": prop}
    try:
        parsed = with_precision(parse_spec(SpecFile.read(path)), width)
        if prop == "quantization-error" and parsed.error_bound is None:
            row.update(outcome="skipped", method=None, detail="no error.bound in file")
        else:
            task = task_from_spec(parsed, prop, timeout=timeout, presolve=presolve)
            report = run_task(parsed, task)
            row.update(outcome=report.verdict.outcome, method=report.method)
    except (SpecError, TaskError, OSError) as exc:
        row.update(outcome="error", method=None, detail=str(exc))
    row["time"] = time.perf_counter() - t0
    return row


def run_bench(directory, precisions: Sequence[int] = DEFAULT_PRECISIONS,
              properties: Sequence[str] = CLI_PROPERTIES, timeout: Optional[float] = 60.0,
              jobs: Optional[int] = None, presolve: bool = True) -> dict:
    files = suite_files(directory)
    if not files:
        raise FileNotFoundError(f"no .ss files in {directory}")
    jobs_list = [(str(f), w, p, timeout, presolve)
                 for f in files for w in precisions for p in properties]
    t0 = time.perf_counter()
    jobs = jobs or os.cpu_count() or 1
    if jobs == 1:
        rows = [_run_one(j) for j in jobs_list]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_one, jobs_list))
    return summarize(rows, precisions, properties, time.perf_counter() - t0)


def summarize(rows, precisions, properties, wall_time) -> dict:
    counts = {}
    for w in precisions:
        per = {}
        for p in properties:
            sel = [r for r in rows if r["precision"] == w and r["property"] == p]
            per[p] = {o: sum(1 for r in sel if r["outcome"] == o)
                      for o in ("holds", "violated", "unknown", "error", "skipped")}
        per["total_violated"] = sum(per[p]["violated"] for p in properties)
        counts[str(w)] = per
    flags = []
    lo, hi = min(precisions), max(precisions)
    if lo != hi:
        for p in properties:
            if counts[str(lo)][p]["violated"] < counts[str(hi)][p]["violated"]:
                flags.append(f"{p}: fewer violations at {lo} bits than at {hi} bits")
    times = [r["time"] for r in rows]
    return {
        "rows": rows,
        "summary": counts,
        "trend_violations": flags,
        "timing": {"wall": wall_time, "total": sum(times),
                   "max": max(times, default=0.0), "mean": sum(times) / len(times) if times else 0.0},
    }


def format_matrix(result: dict, precisions, properties) -> str:
    """Per-precision table of violated/total counts."""
    head = f"{'property':<20}" + "".join(f"{str(w) + '-bit':>12}" for w in precisions)
    lines = [head, "-" * len(head)]
    for p in properties:
        cells = []
        for w in precisions:
            c = result["summary"][str(w)][p]
            total = sum(c.values()) - c["skipped"]
            cells.append(f"{c['violated']}/{total}".rjust(12))
        lines.append(f"{p:<20}" + "".join(cells))
    lines.append(f"{'total violated':<20}"
                 + "".join(f"{result['summary'][str(w)]['total_violated']:>12}" for w in precisions))
    odd = [r for r in result["rows"] if r["outcome"] in ("unknown", "error")]
    for r in odd:
        lines.append(f"  {r['outcome']}: {r['system']} {r['precision']}-bit {r['property']}"
                     + (f" ({r['detail']})" if r.get("detail") else ""))
    t = result["timing"]
    lines.append(f"wall {t['wall']:.1f}s, task total {t['total']:.1f}s, "
                 f"max {t['max']:.2f}s, mean {t['mean']:.3f}s")
    for f in result["trend_violations"]:
        lines.append(f"TREND VIOLATION: {f}")
    return "\n".join(lines)
