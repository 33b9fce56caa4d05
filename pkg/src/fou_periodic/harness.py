"""
Monte Carlo experiments: seeded replication sweeps, limit-law tests and reports.

A replication simulates one path up to the largest horizon and estimates
theta at every horizon on prefixes of that path. Replications are keyed on
(base_seed, index) and run on a thread pool; results are merged by index so
outputs do not depend on scheduling or the number of workers.
"""

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from fou_periodic import rng
from fou_periodic.asymptotics import AlphaLimitLaw, MuLimitLaw, sample_alpha_limit
from fou_periodic.basis import PeriodicDrift
from fou_periodic.config import DEFAULTS, ExperimentSpec
from fou_periodic.errors import DegenerateDesignError, ResultParseError, UsageError
from fou_periodic.estimator import estimate
from fou_periodic.fbm import FbmPath, generate_fbm_path
from fou_periodic.process import ProcessPath, simulate_exact
from fou_periodic.statkit import correlation_test, ks_one_sample_normal, ks_two_sample, summarize
from fou_periodic.utils import write_csv, write_json

logger = logging.getLogger(__name__)

RESULTS_FILE = "results.csv"
SUMMARY_FILE = "summary.json"
EXPERIMENT_FILE = "experiment.json"
LIMITS_FILE = "limits.json"
LIMIT_SAMPLE_FILE = "alpha_limit.csv"
LIMIT_LAW_FILE = "alpha_limit_law.json"

# KS p-values above this count as agreement
P_VALUE_FLOOR = 0.01


@dataclass(frozen=True, eq=False)
class HorizonRecord:
    """Estimates at one horizon with the scaled errors e^{alpha n}(alpha_hat - alpha), n^{1-H}(mu_hat - mu)."""

    n: int
    alpha_hat: float
    mu_hat: np.ndarray
    gamma_inv: float
    err_alpha_scaled: float
    err_mu_scaled: np.ndarray


@dataclass(frozen=True)
class ReplicationResult:
    rep: int
    seed: int
    records: tuple[HorizonRecord, ...]
    skipped: tuple[int, ...] = ()


@dataclass
class McResult:
    """All replications of one experiment, ordered by replication index."""

    spec: ExperimentSpec
    replications: list[ReplicationResult]
    summary: dict[str, Any] = field(default_factory=dict)

    @property
    def skipped(self) -> int:
        return sum(len(r.skipped) for r in self.replications)

    def records_at(self, n: int) -> list[HorizonRecord]:
        return [rec for r in self.replications for rec in r.records if rec.n == n]


def drift_from_spec(spec: ExperimentSpec) -> PeriodicDrift:
    return PeriodicDrift.from_spec(spec.model.basis, spec.model.mu)


def replication_path(spec: ExperimentSpec, rep: int, drift: PeriodicDrift | None = None) -> ProcessPath:
    """The path of replication `rep`, covering the largest horizon."""
    drift = drift or drift_from_spec(spec)
    m = spec.max_horizon * spec.steps_per_unit
    if spec.mc.zero_noise:
        bh = FbmPath.zero(spec.model.H, m, spec.grid.dt)
    else:
        bh = generate_fbm_path(spec.model.H, m, spec.grid.dt, spec.mc.base_seed, key=(rng.PATH, rep))
    return simulate_exact(drift, spec.model.alpha, bh)


def run_replication(spec: ExperimentSpec, rep: int, drift: PeriodicDrift | None = None) -> ReplicationResult:
    """Simulate one path and estimate at every configured horizon."""
    drift = drift or drift_from_spec(spec)
    path = replication_path(spec, rep, drift)
    alpha, H = spec.model.alpha, spec.model.H
    mu = np.asarray(spec.model.mu, dtype=float)

    records: list[HorizonRecord] = []
    skipped: list[int] = []
    for n in spec.grid.horizons:
        try:
            est = estimate(path, n=n)
        except DegenerateDesignError as e:
            logger.info("Replication %d skipped at n=%d: %s", rep, n, e.message)
            skipped.append(n)
            continue
        records.append(
            HorizonRecord(
                n=n,
                alpha_hat=est.alpha_hat,
                mu_hat=est.mu_hat,
                gamma_inv=est.stats.gamma_inv,
                err_alpha_scaled=math.exp(alpha * n) * (est.alpha_hat - alpha),
                err_mu_scaled=n ** (1.0 - H) * (est.mu_hat - mu),
            )
        )
    seed = rng.derive_seed(spec.mc.base_seed, rng.PATH, rep)
    return ReplicationResult(rep, seed, tuple(records), tuple(skipped))


def results_header(p: int) -> list[str]:
    return (
        ["rep", "seed", "n", "alpha_hat"]
        + [f"mu_hat_{i}" for i in range(1, p + 1)]
        + ["gamma_inv", "err_alpha_scaled"]
        + [f"err_mu_scaled_{i}" for i in range(1, p + 1)]
    )


def _result_rows(replications: list[ReplicationResult]) -> list[list[Any]]:
    rows = []
    for r in replications:
        for rec in r.records:
            rows.append(
                [r.rep, r.seed, rec.n, rec.alpha_hat]
                + rec.mu_hat.tolist()
                + [rec.gamma_inv, rec.err_alpha_scaled]
                + rec.err_mu_scaled.tolist()
            )
    return rows


def run_mc(spec: ExperimentSpec, out_dir: Path | None = None, threads: int = 1) -> McResult:
    """
    Run every replication of an experiment.

    Args:
        spec: validated experiment
        out_dir: if given, write experiment.json there, plus results.csv and
            summary.json as selected by [output] formats
        threads: worker threads; results do not depend on this

    Returns:
        McResult with replications sorted by index and the summary.
    """
    drift = drift_from_spec(spec)
    logger.info(
        "Running %d replications at horizons %s on %d thread(s)",
        spec.mc.replications,
        spec.grid.horizons,
        threads,
    )
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        replications = list(pool.map(lambda r: run_replication(spec, r, drift), range(spec.mc.replications)))
    replications.sort(key=lambda r: r.rep)

    result = McResult(spec, replications)
    result.summary = summarize_mc(spec, _records_by_horizon(result), result.skipped)
    if result.summary["skip_warning"]:
        logger.warning(
            "%d of %d estimates skipped as degenerate",
            result.skipped,
            spec.mc.replications * len(spec.grid.horizons),
        )
    if out_dir is not None:
        write_mc_outputs(result, out_dir)
    return result


def write_mc_outputs(result: McResult, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    p = len(result.spec.model.mu)
    formats = result.spec.output.formats
    if "csv" in formats:
        write_csv(out_dir / RESULTS_FILE, results_header(p), _result_rows(result.replications))
    if "json" in formats:
        write_json(out_dir / SUMMARY_FILE, result.summary)
    (out_dir / EXPERIMENT_FILE).write_text(result.spec.model_dump_json(indent=2) + "\n")


def _records_by_horizon(result: McResult) -> dict[int, list[HorizonRecord]]:
    return {n: result.records_at(n) for n in result.spec.grid.horizons}


def summarize_mc(
    spec: ExperimentSpec, by_horizon: dict[int, list[HorizonRecord]], skipped: int
) -> dict[str, Any]:
    """
    Per-horizon medians, the consistency trend and the exponential rate slope.

    The rate slope is the least-squares slope of log median |alpha_hat - alpha|
    against n; the estimator error decays like e^{-alpha n}, so it should be
    close to -alpha.
    """
    alpha = spec.model.alpha
    mu = np.asarray(spec.model.mu, dtype=float)
    horizons = []
    for n, records in sorted(by_horizon.items()):
        if not records:
            horizons.append({"n": n, "count": 0})
            continue
        err_alpha = np.array([abs(r.alpha_hat - alpha) for r in records])
        err_mu = np.array([float(np.max(np.abs(r.mu_hat - mu))) for r in records])
        horizons.append(
            {
                "n": n,
                "count": len(records),
                "median_abs_err_alpha": float(np.median(err_alpha)),
                "median_err_mu_inf": float(np.median(err_mu)),
                "err_alpha_scaled": summarize([r.err_alpha_scaled for r in records]),
                "err_mu_scaled_1": summarize([float(r.err_mu_scaled[0]) for r in records]),
            }
        )

    filled = [h for h in horizons if h["count"]]
    med_alpha = [h["median_abs_err_alpha"] for h in filled]
    med_mu = [h["median_err_mu_inf"] for h in filled]
    consistent = len(filled) > 1 and all(b < a for a, b in zip(med_alpha, med_alpha[1:])) and all(
        b < a for a, b in zip(med_mu, med_mu[1:])
    )
    slope = None
    if len(filled) > 1 and all(m > 0 for m in med_alpha):
        slope = float(np.polyfit([h["n"] for h in filled], np.log(med_alpha), 1)[0])

    total = spec.mc.replications * len(spec.grid.horizons)
    checks: dict[str, Any] = {}
    if "consistency" in spec.tests.suites:
        checks["consistency"] = consistent
    if "rate" in spec.tests.suites:
        checks["rate"] = slope is not None and -1.25 * alpha <= slope <= -0.75 * alpha

    return {
        "replications": spec.mc.replications,
        "base_seed": spec.mc.base_seed,
        "horizons": horizons,
        "skipped": skipped,
        "skip_warning": skipped > DEFAULTS["harness"]["skip_warning_fraction"] * total,
        "consistency_trend": consistent,
        "rate_slope": slope,
        "expected_rate_slope": -alpha,
        "checks": checks,
    }


def read_results_csv(path: Path) -> list[tuple[int, int, HorizonRecord]]:
    """Parse results.csv into (rep, seed, record) triples."""
    if not path.exists():
        raise UsageError(f"No results at {path}; run `mc` first")
    rows: list[tuple[int, int, HorizonRecord]] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:4] != ["rep", "seed", "n", "alpha_hat"]:
            raise ResultParseError(str(path), 1, "not a results file")
        p = (len(header) - 6) // 2
        if p < 1 or header != results_header(p):
            raise ResultParseError(str(path), 1, f"unexpected header {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ResultParseError(str(path), lineno, f"expected {len(header)} columns, got {len(row)}")
            try:
                values = [float(v) for v in row[3:]]
                record = HorizonRecord(
                    n=int(row[2]),
                    alpha_hat=values[0],
                    mu_hat=np.array(values[1 : 1 + p]),
                    gamma_inv=values[1 + p],
                    err_alpha_scaled=values[2 + p],
                    err_mu_scaled=np.array(values[3 + p :]),
                )
                rows.append((int(row[0]), int(row[1]), record))
            except ValueError as e:
                raise ResultParseError(str(path), lineno, str(e)) from e
    return rows


def load_run(out_dir: Path) -> tuple[ExperimentSpec, dict[int, list[HorizonRecord]]]:
    """The experiment echo and the per-horizon records of a finished `mc` run."""
    spec_path = out_dir / EXPERIMENT_FILE
    if not spec_path.exists():
        raise UsageError(f"No {EXPERIMENT_FILE} in {out_dir}; run `mc` first")
    spec = ExperimentSpec.model_validate_json(spec_path.read_text())
    if "csv" not in spec.output.formats:
        raise UsageError(f"The run in {out_dir} was written without csv results; add csv to [output] formats")
    by_horizon: dict[int, list[HorizonRecord]] = {n: [] for n in spec.grid.horizons}
    for _, _, record in read_results_csv(out_dir / RESULTS_FILE):
        by_horizon.setdefault(record.n, []).append(record)
    return spec, by_horizon


def build_report(out_dir: Path) -> dict[str, Any]:
    """Recompute the summary of a finished run from its CSV."""
    spec, by_horizon = load_run(out_dir)
    total = spec.mc.replications * len(spec.grid.horizons)
    skipped = total - sum(len(v) for v in by_horizon.values())
    return summarize_mc(spec, by_horizon, skipped)


def run_limit_tests(out_dir: Path, threads: int = 1, seed: int | None = None) -> dict[str, Any]:
    """
    Distributional tests at the largest horizon of a finished `mc` run.

    (a) two-sample KS of e^{alpha n}(alpha_hat - alpha) against draws of the
        ratio law; (b) one-sample KS of n^{1-H}(mu_hat_1 - mu_1) against
        N(0, D_11), or a shrinkage check when D_11 = 0; (c) a correlation
        smoke test between the two scaled errors.
    """
    spec, by_horizon = load_run(out_dir)
    if "limits" not in spec.tests.suites:
        raise UsageError(f"The limits suite is disabled in [tests] suites of the run in {out_dir}")
    n_max = spec.max_horizon
    records = by_horizon.get(n_max, [])
    if not records:
        raise UsageError(f"No usable records at the largest horizon n={n_max}")
    seed = spec.mc.base_seed if seed is None else seed
    drift = drift_from_spec(spec)
    alpha, H = spec.model.alpha, spec.model.H

    err_alpha = np.array([r.err_alpha_scaled for r in records])
    err_mu = np.array([float(r.err_mu_scaled[0]) for r in records])

    law = AlphaLimitLaw.from_drift(drift, alpha, H, dt=spec.tests.limit_dt)
    draws = sample_alpha_limit(law, spec.tests.limit_draws, seed, threads)
    write_csv(out_dir / LIMIT_SAMPLE_FILE, ["draw_index", "value"], enumerate(draws.tolist()))
    write_json(out_dir / LIMIT_LAW_FILE, law.as_dict())

    tests = [ks_two_sample(err_alpha, draws, label="alpha_scaled_vs_ratio_law").as_dict()]
    mu_law = MuLimitLaw.from_basis(drift.basis)
    shrinkage = None
    if mu_law.degenerate(0):
        variances = {
            n: float(np.var([float(r.err_mu_scaled[0]) for r in recs], ddof=1))
            for n, recs in sorted(by_horizon.items())
            if len(recs) > 1
        }
        values = list(variances.values())
        shrinkage = {
            "variances": variances,
            "shrinks": len(values) > 1 and values[-1] < values[0],
        }
    else:
        tests.append(
            ks_one_sample_normal(err_mu, 0.0, math.sqrt(mu_law.variance(0)), label="mu1_scaled_vs_normal").as_dict()
        )
    correlation = correlation_test(err_alpha, err_mu)

    passed = all(t["p_value"] > P_VALUE_FLOOR for t in tests) and bool(correlation["independent"])
    if shrinkage is not None:
        passed = passed and shrinkage["shrinks"]
    report = {
        "n": n_max,
        "records": len(records),
        "ks": tests,
        "mu1_shrinkage": shrinkage,
        "correlation": correlation,
        "law": law.as_dict(),
        "passed": passed,
    }
    write_json(out_dir / LIMITS_FILE, report)
    return report
