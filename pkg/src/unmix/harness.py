"""Monte Carlo benchmark harness.

Runs each configured extractor `runs` times with independently derived
seeds, matches every result against the reference endmembers, and reports
per-run RMS scores plus aggregate statistics (mean, std, Welch's t and
two-sided p versus a baseline algorithm, gain, mean wall time). Reports
serialize to JSON and to CSV tables; both are deterministic given the
master seed, apart from measured wall times.
"""

from __future__ import annotations

import json
import math
import multiprocessing
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .core import EndmemberSet, SpectralCube, match_endmembers, rms
from .extractors import ExtractorSpec, extract_detailed
from .geometry import pca_reduce
from .seeds import mix64

METRIC_NAMES = ("sam", "sid")

_STAT_ROWS = ("Mean", "Std", "T-statistic", "P-value", "Gain%", "Time(s)", "Failures")


# ---------------------------------------------------------------------------
# statistics


def _sample_stats(values: Sequence[float]) -> Tuple[float, float]:
    """Mean and unbiased (ddof = 1) standard deviation."""
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    max_iter = 300
    eps = 3e-16
    fpmin = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h


def _betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def welch_t(a: Sequence[float], b: Sequence[float]) -> Tuple[float, float]:
    """Welch's unequal-variance t-test.

    Returns (t_statistic, two_sided_p). The p-value comes from the
    Student-t survival function with Welch-Satterthwaite degrees of
    freedom, evaluated through the regularized incomplete beta function.
    Two zero-variance samples with equal means give (0, 1); with unequal
    means the difference is infinitely significant, (+/-inf, 0).
    """
    xs = [float(v) for v in a]
    ys = [float(v) for v in b]
    if len(xs) < 2 or len(ys) < 2:
        raise ValueError("each sample needs at least 2 values")
    if not all(map(math.isfinite, xs + ys)):
        raise ValueError("samples must be finite")
    mean_a, std_a = _sample_stats(xs)
    mean_b, std_b = _sample_stats(ys)
    qa = std_a * std_a / len(xs)
    qb = std_b * std_b / len(ys)
    if qa + qb == 0.0:
        if mean_a == mean_b:
            return 0.0, 1.0
        return math.copysign(math.inf, mean_a - mean_b), 0.0
    t = (mean_a - mean_b) / math.sqrt(qa + qb)
    df_num = (qa + qb) ** 2
    df_den = 0.0
    if qa > 0.0:
        df_den += qa * qa / (len(xs) - 1)
    if qb > 0.0:
        df_den += qb * qb / (len(ys) - 1)
    df = df_num / df_den
    p = _betainc(df / 2.0, 0.5, df / (df + t * t))
    return t, min(max(p, 0.0), 1.0)


def gain_percent(baseline_mean: float, candidate_mean: float) -> float:
    """100 * (baseline - candidate) / candidate; positive when the
    candidate's error is lower than the baseline's."""
    if not candidate_mean > 0.0:
        raise ValueError("candidate mean must be positive")
    return 100.0 * (baseline_mean - candidate_mean) / candidate_mean


# ---------------------------------------------------------------------------
# bench specification and report


@dataclass(frozen=True)
class BenchSpec:
    """One benchmark campaign over a fixed cube and reference library."""

    cube: SpectralCube
    reference: EndmemberSet
    algorithms: Tuple[ExtractorSpec, ...]
    runs: int = 50
    metrics: Tuple[str, ...] = ("sam",)
    baseline: str = "VCA"
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "metrics", tuple(m.lower() for m in self.metrics))
        if self.runs < 2:
            raise ValueError("runs must be >= 2 for statistics")
        if not self.metrics:
            raise ValueError("at least one metric required")
        for m in self.metrics:
            if m not in METRIC_NAMES:
                raise ValueError("unknown metric '%s'" % m)
        if not self.algorithms:
            raise ValueError("at least one algorithm required")
        labels = [a.label for a in self.algorithms]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate algorithm labels: %s" % labels)
        if self.baseline not in labels:
            raise ValueError("baseline '%s' not among algorithms" % self.baseline)
        for a in self.algorithms:
            if a.p != self.reference.count:
                raise ValueError(
                    "algorithm p=%d does not match reference count %d"
                    % (a.p, self.reference.count)
                )
        if self.reference.spectra.shape[0] != self.cube.bands:
            raise ValueError("reference band count does not match cube")


@dataclass
class BenchReport:
    """Everything run_bench measured, ready for JSON/CSV serialization.

    per_run holds one entry per (algorithm, metric, run); failed runs are
    None there and listed under failures. All aggregate rows are exactly
    recomputable from per_run.
    """

    labels: List[str]
    metrics: List[str]
    runs: int
    master_seed: int
    baseline: str
    endmember_count: int
    per_run: Dict[str, Dict[str, List[Optional[float]]]]
    per_endmember_best: Dict[str, Dict[str, Dict[str, object]]]
    per_endmember_mean: Dict[str, Dict[str, List[float]]]
    stats: Dict[str, Dict[str, Dict[str, Optional[float]]]]
    time_mean: Dict[str, Optional[float]]
    failures: Dict[str, List[Dict[str, object]]]
    convergence: Dict[str, Dict[str, object]] = field(default_factory=dict)
    sid_shifted_runs: Dict[str, int] = field(default_factory=dict)

    def to_json_dict(self) -> Dict[str, object]:
        return _json_safe(
            {
                "schema": 1,
                "runs": self.runs,
                "master_seed": self.master_seed,
                "baseline": self.baseline,
                "endmember_count": self.endmember_count,
                "metrics": list(self.metrics),
                "algorithms": list(self.labels),
                "per_run": self.per_run,
                "per_endmember_best": self.per_endmember_best,
                "per_endmember_mean": self.per_endmember_mean,
                "stats": self.stats,
                "time_mean_s": self.time_mean,
                "failures": self.failures,
                "convergence": self.convergence,
                "sid_shifted_runs": self.sid_shifted_runs,
            }
        )


def _json_safe(value):
    """Strict JSON has no inf/nan; map non-finite floats to null."""
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


# ---------------------------------------------------------------------------
# single-run execution (also the multiprocessing worker body)

_WORKER: Dict[str, object] = {}


def _init_worker(cube, algorithms, reference, metrics) -> None:
    _WORKER["cube"] = cube
    _WORKER["algorithms"] = algorithms
    _WORKER["reference"] = reference
    _WORKER["metrics"] = metrics


def _match_scores(
    extracted: EndmemberSet, reference: EndmemberSet, metric: str
) -> Tuple[Tuple[float, ...], bool]:
    """Matched per-reference-endmember scores; for SID, spectra with
    negative entries (noise can push reflectance below zero) are lifted by
    the common minimum first, and the lift is flagged."""
    shifted = False
    if metric == "sid":
        low = min(float(extracted.spectra.min()), float(reference.spectra.min()))
        if low < 0.0:
            shifted = True
            extracted = EndmemberSet(extracted.spectra - low, extracted.source_indices)
            reference = EndmemberSet(reference.spectra - low, reference.source_indices)
    pairs = match_endmembers(extracted, reference, metric=metric)
    return tuple(score for _, _, score in pairs), shifted


def _execute_run(task: Tuple[int, int, int]) -> Tuple[int, int, Dict[str, object]]:
    algo_idx, run_idx, seed = task
    cube: SpectralCube = _WORKER["cube"]
    spec: ExtractorSpec = _WORKER["algorithms"][algo_idx]
    reference: EndmemberSet = _WORKER["reference"]
    metrics: Tuple[str, ...] = _WORKER["metrics"]
    outcome: Dict[str, object] = {
        "error": None,
        "elapsed": 0.0,
        "scores": {},
        "rms": {},
        "history": None,
        "mean_history": None,
        "sid_shifted": False,
    }
    start = time.perf_counter()
    try:
        result = extract_detailed(cube, spec.with_seed(seed))
        outcome["elapsed"] = time.perf_counter() - start
        for metric in metrics:
            scores, shifted = _match_scores(result.endmembers, reference, metric)
            outcome["scores"][metric] = scores
            outcome["rms"][metric] = rms(scores)
            outcome["sid_shifted"] = outcome["sid_shifted"] or shifted
        if result.fitness_history is not None:
            outcome["history"] = list(result.fitness_history)
            outcome["mean_history"] = list(result.mean_history)
    except Exception as exc:  # noqa: BLE001 - per-run failures are data
        outcome["elapsed"] = time.perf_counter() - start
        outcome["error"] = "%s: %s" % (type(exc).__name__, exc)
    return algo_idx, run_idx, outcome


def _prewarm_reductions(spec: BenchSpec) -> None:
    # Compute the shared PCA reductions once before any fork so workers
    # inherit the cache instead of redoing the SVD per task.
    dims = set()
    for algo in spec.algorithms:
        if algo.algorithm in ("nfindr", "gaee"):
            dims.add(algo.p - 1)
        if algo.algorithm == "vca" or (algo.ga is not None and algo.ga.vca_seed_enabled):
            dims.add(algo.p)
    for d in sorted(dims):
        pca_reduce(spec.cube, d)


# ---------------------------------------------------------------------------
# orchestration


def run_bench(spec: BenchSpec, jobs: int = 1) -> BenchReport:
    """Execute the campaign and aggregate the report.

    Run (algorithm a, run k) uses rng seed mix64(master_seed, a, k), so
    results do not depend on scheduling; jobs > 1 distributes runs over a
    process pool and merges by key. Extractor failures are recorded and
    excluded from statistics rather than aborting the campaign.
    """
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    _prewarm_reductions(spec)

    tasks = [
        (a, k, mix64(spec.master_seed, a, k))
        for a in range(len(spec.algorithms))
        for k in range(spec.runs)
    ]
    _init_worker(spec.cube, spec.algorithms, spec.reference, spec.metrics)
    if jobs == 1:
        raw = [_execute_run(t) for t in tasks]
    else:
        methods = multiprocessing.get_all_start_methods()
        ctx = multiprocessing.get_context("fork" if "fork" in methods else "spawn")
        with ctx.Pool(
            processes=jobs,
            initializer=_init_worker,
            initargs=(spec.cube, spec.algorithms, spec.reference, spec.metrics),
        ) as pool:
            raw = pool.map(_execute_run, tasks)

    outcomes: Dict[Tuple[int, int], Dict[str, object]] = {
        (a, k): payload for a, k, payload in raw
    }
    return _build_report(spec, outcomes)


def _build_report(
    spec: BenchSpec, outcomes: Dict[Tuple[int, int], Dict[str, object]]
) -> BenchReport:
    labels = [a.label for a in spec.algorithms]
    p = spec.reference.count

    per_run: Dict[str, Dict[str, List[Optional[float]]]] = {}
    best_tables: Dict[str, Dict[str, Dict[str, object]]] = {}
    mean_tables: Dict[str, Dict[str, List[float]]] = {}
    stats: Dict[str, Dict[str, Dict[str, Optional[float]]]] = {}
    time_mean: Dict[str, Optional[float]] = {}
    failures: Dict[str, List[Dict[str, object]]] = {}
    convergence: Dict[str, Dict[str, object]] = {}
    shifted_counts: Dict[str, int] = {}

    baseline_idx = labels.index(spec.baseline)
    baseline_values: Dict[str, List[float]] = {}
    for metric in spec.metrics:
        baseline_values[metric] = [
            outcomes[(baseline_idx, k)]["rms"][metric]
            for k in range(spec.runs)
            if outcomes[(baseline_idx, k)]["error"] is None
        ]

    for a, (algo, label) in enumerate(zip(spec.algorithms, labels)):
        runs = [outcomes[(a, k)] for k in range(spec.runs)]
        ok = [k for k in range(spec.runs) if runs[k]["error"] is None]
        failures[label] = [
            {"run": k, "error": runs[k]["error"]}
            for k in range(spec.runs)
            if runs[k]["error"] is not None
        ]
        elapsed = [runs[k]["elapsed"] for k in ok]
        time_mean[label] = (math.fsum(elapsed) / len(elapsed)) if elapsed else None
        shifted = sum(1 for k in ok if runs[k]["sid_shifted"])
        if "sid" in spec.metrics:
            shifted_counts[label] = shifted

        per_run[label] = {}
        best_tables[label] = {}
        mean_tables[label] = {}
        stats[label] = {}
        for metric in spec.metrics:
            values = [runs[k]["rms"][metric] if k in ok else None for k in range(spec.runs)]
            per_run[label][metric] = values
            ok_values = [values[k] for k in ok]
            entry: Dict[str, Optional[float]] = {
                "mean": None,
                "std": None,
                "t": None,
                "p": None,
                "gain": None,  # stays None at perfect recovery (mean 0)
                "failures": len(failures[label]),
            }
            if ok_values:
                mean, std = _sample_stats(ok_values)
                entry["mean"] = mean
                entry["std"] = std
                base = baseline_values[metric]
                if len(base) >= 2 and len(ok_values) >= 2:
                    t, pv = welch_t(base, ok_values)
                    entry["t"] = t
                    entry["p"] = pv
                if mean > 0.0 and base:
                    entry["gain"] = gain_percent(math.fsum(base) / len(base), mean)
            stats[label][metric] = entry

            if ok:
                best_run = min(ok, key=lambda k: (runs[k]["rms"][metric], k))
                best_tables[label][metric] = {
                    "run": best_run,
                    "scores": list(runs[best_run]["scores"][metric]),
                    "rms": runs[best_run]["rms"][metric],
                }
                mean_scores = [
                    math.fsum(runs[k]["scores"][metric][i] for k in ok) / len(ok)
                    for i in range(p)
                ]
                mean_tables[label][metric] = mean_scores
            else:
                best_tables[label][metric] = {"run": None, "scores": [], "rms": None}
                mean_tables[label][metric] = []

        histories = [(k, runs[k]) for k in ok if runs[k]["history"] is not None]
        if histories:
            first_metric = spec.metrics[0]
            pick, payload = min(histories, key=lambda kv: (kv[1]["rms"][first_metric], kv[0]))
            convergence[label] = {
                "run": pick,
                "best": list(payload["history"]),
                "mean": list(payload["mean_history"]),
            }

    return BenchReport(
        labels=labels,
        metrics=list(spec.metrics),
        runs=spec.runs,
        master_seed=spec.master_seed,
        baseline=spec.baseline,
        endmember_count=p,
        per_run=per_run,
        per_endmember_best=best_tables,
        per_endmember_mean=mean_tables,
        stats=stats,
        time_mean=time_mean,
        failures=failures,
        convergence=convergence,
        sid_shifted_runs=shifted_counts,
    )


# ---------------------------------------------------------------------------
# serialization


def _fmt(value: Optional[float]) -> str:
    if value is None:
        return ""
    return "%.17g" % value


def write_report_json(report: BenchReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report.to_json_dict(), fh, indent=2, allow_nan=False)
        fh.write("\n")


def write_report_csvs(report: BenchReport, prefix) -> List[str]:
    """Write the per-run, per-endmember (best and mean), and statistics
    tables for each metric; returns the created paths."""
    paths: List[str] = []
    prefix = str(prefix)
    for metric in report.metrics:
        runs_path = "%s_runs_%s.csv" % (prefix, metric)
        with open(runs_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("run," + ",".join(report.labels) + "\n")
            for k in range(report.runs):
                cells = [_fmt(report.per_run[label][metric][k]) for label in report.labels]
                fh.write("%d,%s\n" % (k, ",".join(cells)))
        paths.append(runs_path)

        for flavor in ("best", "mean"):
            em_path = "%s_endmembers_%s_%s.csv" % (prefix, metric, flavor)
            with open(em_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("endmember," + ",".join(report.labels) + "\n")
                for i in range(report.endmember_count):
                    cells = []
                    for label in report.labels:
                        if flavor == "best":
                            scores = report.per_endmember_best[label][metric]["scores"]
                        else:
                            scores = report.per_endmember_mean[label][metric]
                        cells.append(_fmt(scores[i]) if i < len(scores) else "")
                    fh.write("e%d,%s\n" % (i + 1, ",".join(cells)))
                rms_cells = []
                for label in report.labels:
                    if flavor == "best":
                        rms_cells.append(_fmt(report.per_endmember_best[label][metric]["rms"]))
                    else:
                        vals = [v for v in report.per_run[label][metric] if v is not None]
                        rms_cells.append(_fmt(math.fsum(vals) / len(vals)) if vals else "")
                fh.write("RMS,%s\n" % ",".join(rms_cells))
            paths.append(em_path)

        stats_path = "%s_stats_%s.csv" % (prefix, metric)
        with open(stats_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("# Gain%% = 100*(baseline_mean - mean)/mean; baseline = %s;"
                     " positive favors the column algorithm\n" % report.baseline)
            fh.write("# T-statistic/P-value: Welch's two-sided t-test of baseline"
                     " per-run RMS vs the column algorithm's\n")
            fh.write("# Std: unbiased sample standard deviation (ddof=1) over runs\n")
            fh.write("statistic," + ",".join(report.labels) + "\n")
            for name in _STAT_ROWS:
                cells = []
                for label in report.labels:
                    entry = report.stats[label][metric]
                    if name == "Mean":
                        value = entry["mean"]
                    elif name == "Std":
                        value = entry["std"]
                    elif name == "T-statistic":
                        value = entry["t"]
                    elif name == "P-value":
                        value = entry["p"]
                    elif name == "Gain%":
                        value = entry["gain"]
                    elif name == "Time(s)":
                        value = report.time_mean[label]
                    else:
                        value = entry["failures"]
                    cells.append(_fmt(value))
                fh.write("%s,%s\n" % (name, ",".join(cells)))
        paths.append(stats_path)
    return paths
