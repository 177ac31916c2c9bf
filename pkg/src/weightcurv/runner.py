"""run(config) and suite(manifest)."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .comparison import THEOREM_IDS
from .config import ExperimentConfig, build_manifold, load_manifest
from .errors import ConfigError, ExperimentError, GeometryError, HypothesisFailed, ModelError
from .experiments import DEFAULT_THEOREM, RUNNERS
from .report import (STATUS_ERROR, STATUS_FAIL, STATUS_NA, STATUS_PASS, RunReport, summary_stats, theorem_table,
                     write_csv, write_json)

DEFAULT_MANIFEST = Path(__file__).parent / "configs" / "default.yaml"


def _file_stem(cfg: ExperimentConfig) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in cfg.label)


def run(cfg: ExperimentConfig, out_dir=None) -> RunReport:
    """Execute one experiment; writes <label>.json and <label>.csv under ``out_dir`` (or cfg.out_dir) if set."""
    t0 = time.perf_counter()
    theorem = DEFAULT_THEOREM[cfg.experiment]
    verdicts, summary, extra = [], {}, {}
    header, rows = None, None
    message, code = "", ""
    try:
        M = build_manifold(cfg)
        outcome = RUNNERS[cfg.experiment](M, cfg, np.random.default_rng(cfg.seed))
        verdicts = outcome.verdicts
        theorem = outcome.theorem or (verdicts[0].theorem if verdicts else theorem)
        header, rows = outcome.header, outcome.rows
        summary = summary_stats(outcome.residuals)
        if not verdicts:
            status, message, code = STATUS_ERROR, "no verdicts were produced", "experiment_error"
        else:
            status = STATUS_PASS if all(v.satisfied for v in verdicts) else STATUS_FAIL
    except HypothesisFailed as exc:
        status, message, code = STATUS_NA, str(exc), exc.code
        if exc.report is not None:
            extra["hypothesis_report"] = exc.report
        if exc.header is not None:
            header, rows = exc.header, exc.rows
    except (ConfigError, ModelError) as exc:
        status, message, code = STATUS_ERROR, str(exc), type(exc).code
        extra["detail_code"] = exc.code
    except (ExperimentError, GeometryError, ValueError) as exc:
        status, message = STATUS_ERROR, str(exc)
        code = getattr(exc, "code", "experiment_error")
    report = RunReport(
        experiment=cfg.experiment, theorem=theorem, model=cfg.model, status=status, verdicts=verdicts,
        summary=summary, wall_time=time.perf_counter() - t0, config=cfg.as_dict(), message=message, code=code,
        extra=extra,
    )
    out = out_dir if out_dir is not None else cfg.out_dir
    if out is not None:
        stem = _file_stem(cfg)
        write_json(Path(out) / f"{stem}.json", report.as_dict())
        if header is not None:
            write_csv(Path(out) / f"{stem}.csv", header, rows)
    return report


def _run_one(args):
    cfg, out_dir = args
    return run(cfg, out_dir)


def suite(configs, out_dir=None, workers=1):
    """Run every config (concurrently up to ``workers``); reports sorted by (experiment, label)."""
    configs = sorted(configs, key=lambda c: (c.experiment, c.label))
    jobs = [(c, out_dir) for c in configs]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_run_one, jobs))
    else:
        reports = [_run_one(j) for j in jobs]
    table = theorem_table(reports, THEOREM_IDS)
    if out_dir is not None:
        write_csv(Path(out_dir) / "theorem_table.csv", ["theorem", "status", "runs", "passed", "failed", "n/a"], table)
        write_json(Path(out_dir) / "suite.json", {
            "table": [dict(zip(("theorem", "status", "runs", "passed", "failed", "n/a"), row)) for row in table],
            "runs": [{"label": c.label, "experiment": r.experiment, "theorem": r.theorem, "status": r.status,
                      "message": r.message} for c, r in zip(configs, reports)],
        })
    return reports, table


def suite_exit_code(reports) -> int:
    if any(r.exit_code == 2 for r in reports):
        return 2
    if any(r.status in (STATUS_FAIL, STATUS_ERROR) for r in reports):
        return 1
    return 0


def load_suite(path=None):
    return load_manifest(path or DEFAULT_MANIFEST)
