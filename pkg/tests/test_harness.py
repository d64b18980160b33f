"""Benchmark harness: statistics, report assembly, serialization."""

import json
import math

import numpy as np
import pytest

from unmix import (
    BenchSpec,
    EndmemberSet,
    ExtractorSpec,
    SceneSpec,
    SpectralCube,
    add_noise,
    gain_percent,
    run_bench,
    synthesize,
    welch_t,
    write_report_csvs,
    write_report_json,
)


def test_welch_t_identical_samples():
    t, p = welch_t((1.0, 2.0, 3.0), (1.0, 2.0, 3.0))
    assert t == 0.0 and p == 1.0


def test_welch_t_against_reference_oracle():
    scipy_stats = pytest.importorskip("scipy.stats")
    a = [1.0, 2.0, 3.0, 4.0, 5.0]
    b = [2.0, 3.0, 4.0, 5.0, 6.0]
    t, p = welch_t(a, b)
    ref = scipy_stats.ttest_ind(a, b, equal_var=False)
    assert abs(t - ref.statistic) < 1e-6
    assert abs(p - ref.pvalue) < 1e-6


def test_welch_t_random_pairs_match_scipy():
    scipy_stats = pytest.importorskip("scipy.stats")
    rng = np.random.default_rng(19)
    for _ in range(30):
        a = rng.normal(rng.uniform(-1, 1), rng.uniform(0.5, 2.0), size=int(rng.integers(2, 30)))
        b = rng.normal(rng.uniform(-1, 1), rng.uniform(0.5, 2.0), size=int(rng.integers(2, 30)))
        t, p = welch_t(a.tolist(), b.tolist())
        ref = scipy_stats.ttest_ind(a, b, equal_var=False)
        assert abs(t - ref.statistic) < 1e-6
        assert abs(p - ref.pvalue) < 1e-6


def test_welch_t_swap_negates_t():
    a = [1.0, 2.0, 3.5]
    b = [2.0, 4.0, 4.5, 5.0]
    t1, p1 = welch_t(a, b)
    t2, p2 = welch_t(b, a)
    assert t1 == -t2
    assert p1 == p2


def test_welch_t_zero_variance_cases():
    assert welch_t((2.0, 2.0), (2.0, 2.0)) == (0.0, 1.0)
    t, p = welch_t((3.0, 3.0), (2.0, 2.0))
    assert t == math.inf and p == 0.0
    t, p = welch_t((1.0, 1.0), (2.0, 2.0))
    assert t == -math.inf and p == 0.0


def test_welch_t_validation():
    with pytest.raises(ValueError):
        welch_t((1.0,), (1.0, 2.0))
    with pytest.raises(ValueError):
        welch_t((1.0, math.nan), (1.0, 2.0))


def test_gain_percent():
    assert gain_percent(0.1, 0.1) == 0.0
    assert gain_percent(0.2, 0.1) == 100.0
    assert abs(gain_percent(0.1024, 0.1016) - 0.7874015748031496) < 1e-12


def small_bench_inputs(snr=None, seed=3):
    spec = SceneSpec(endmember_count=3, bands=12, side=5, seed=seed)
    cube, truth, _ = synthesize(spec)
    if snr is not None:
        cube = add_noise(cube, snr, seed=seed + 1)
    return cube, truth


def test_bench_spec_validation():
    cube, truth = small_bench_inputs()
    vca3 = ExtractorSpec.from_name("vca", 3)
    with pytest.raises(ValueError, match="runs"):
        BenchSpec(cube=cube, reference=truth, algorithms=(vca3,), runs=1, baseline="VCA")
    with pytest.raises(ValueError, match="unknown metric"):
        BenchSpec(cube=cube, reference=truth, algorithms=(vca3,), metrics=("ssim",), baseline="VCA")
    with pytest.raises(ValueError, match="baseline"):
        BenchSpec(cube=cube, reference=truth, algorithms=(vca3,), baseline="N-FINDR")
    with pytest.raises(ValueError, match="duplicate"):
        BenchSpec(cube=cube, reference=truth, algorithms=(vca3, vca3.with_seed(1)), baseline="VCA")
    with pytest.raises(ValueError, match="does not match reference"):
        BenchSpec(cube=cube, reference=truth, algorithms=(ExtractorSpec.from_name("vca", 4),), baseline="VCA")


def test_run_bench_constant_algorithm_stats():
    # N-FINDR lands on the exact vertices every run here: per-run RMS 0,
    # std 0, and the self-baseline t-test degenerates to (0, 1).
    cube, truth = small_bench_inputs()
    spec = BenchSpec(
        cube=cube, reference=truth,
        algorithms=(ExtractorSpec.from_name("nfindr", 3),),
        runs=3, metrics=("sam",), baseline="N-FINDR", master_seed=5,
    )
    report = run_bench(spec)
    values = report.per_run["N-FINDR"]["sam"]
    assert values == [0.0, 0.0, 0.0]
    entry = report.stats["N-FINDR"]["sam"]
    assert entry["mean"] == 0.0 and entry["std"] == 0.0
    assert entry["t"] == 0.0 and entry["p"] == 1.0
    assert entry["gain"] is None  # no gain ratio at perfect recovery
    assert entry["failures"] == 0


def test_run_bench_self_baseline_gain_zero_on_noisy_cube():
    cube, truth = small_bench_inputs(snr=25.0)
    spec = BenchSpec(
        cube=cube, reference=truth,
        algorithms=(ExtractorSpec.from_name("vca", 3),),
        runs=4, metrics=("sam",), baseline="VCA", master_seed=9,
    )
    report = run_bench(spec)
    entry = report.stats["VCA"]["sam"]
    assert entry["mean"] > 0.0
    assert entry["gain"] == 0.0
    assert entry["t"] == 0.0 and entry["p"] == 1.0


def test_run_bench_records_failures_without_aborting():
    # Identical pixels stall VCA's redraw loop every run; the bench must
    # finish, report the errors, and keep N-FINDR's results.
    cube = SpectralCube(np.full((4, 6), 0.5))
    truth = EndmemberSet(np.full((4, 2), 0.5))
    spec = BenchSpec(
        cube=cube, reference=truth,
        algorithms=(ExtractorSpec.from_name("vca", 2), ExtractorSpec.from_name("nfindr", 2)),
        runs=2, metrics=("sam",), baseline="N-FINDR", master_seed=0,
    )
    report = run_bench(spec)
    assert len(report.failures["VCA"]) == 2
    assert all("VCA stalled" in f["error"] for f in report.failures["VCA"])
    assert report.per_run["VCA"]["sam"] == [None, None]
    entry = report.stats["VCA"]["sam"]
    assert entry["mean"] is None and entry["failures"] == 2
    assert report.stats["N-FINDR"]["sam"]["mean"] == 0.0
    assert report.time_mean["VCA"] is None


def scrub_times(d):
    d = json.loads(json.dumps(d))
    d["time_mean_s"] = None
    return d


def test_run_bench_jobs_do_not_change_results():
    cube, truth = small_bench_inputs(snr=30.0)
    algos = (
        ExtractorSpec.from_name("vca", 3),
        ExtractorSpec.from_name("gaee", 3, npop=15, ngen=8),
    )
    spec = BenchSpec(cube=cube, reference=truth, algorithms=algos, runs=4,
                     metrics=("sam",), baseline="VCA", master_seed=21)
    r1 = run_bench(spec, jobs=1)
    r2 = run_bench(spec, jobs=2)
    assert scrub_times(r1.to_json_dict()) == scrub_times(r2.to_json_dict())


def test_run_bench_deterministic_across_calls():
    cube, truth = small_bench_inputs(snr=30.0, seed=8)
    spec = BenchSpec(
        cube=cube, reference=truth,
        algorithms=(ExtractorSpec.from_name("gaee-ivfm", 3, npop=12, ngen=6),),
        runs=3, metrics=("sam", "sid"), baseline="GAEE-IVFm", master_seed=2,
    )
    r1 = run_bench(spec)
    r2 = run_bench(spec)
    assert scrub_times(r1.to_json_dict()) == scrub_times(r2.to_json_dict())


def test_convergence_recorded_for_gaee_only():
    cube, truth = small_bench_inputs()
    spec = BenchSpec(
        cube=cube, reference=truth,
        algorithms=(ExtractorSpec.from_name("vca", 3),
                    ExtractorSpec.from_name("gaee", 3, npop=12, ngen=7)),
        runs=2, metrics=("sam",), baseline="VCA", master_seed=4,
    )
    report = run_bench(spec)
    assert "GAEE" in report.convergence
    assert "VCA" not in report.convergence
    conv = report.convergence["GAEE"]
    assert len(conv["best"]) == 8 and len(conv["mean"]) == 8
    assert conv["run"] in (0, 1)


def test_report_files_and_recompute(tmp_path):
    cube, truth = small_bench_inputs(snr=22.0, seed=14)
    spec = BenchSpec(
        cube=cube, reference=truth,
        algorithms=(ExtractorSpec.from_name("vca", 3),
                    ExtractorSpec.from_name("nfindr", 3)),
        runs=5, metrics=("sam",), baseline="VCA", master_seed=77,
    )
    report = run_bench(spec)
    json_path = tmp_path / "report.json"
    write_report_json(report, json_path)
    paths = write_report_csvs(report, tmp_path / "report")
    assert [p.split("report")[-1] for p in paths] == [
        "_runs_sam.csv", "_endmembers_sam_best.csv", "_endmembers_sam_mean.csv", "_stats_sam.csv",
    ]

    doc = json.loads(json_path.read_text())
    assert doc["schema"] == 1
    assert doc["runs"] == 5

    runs_lines = (tmp_path / "report_runs_sam.csv").read_text().splitlines()
    assert runs_lines[0] == "run,VCA,N-FINDR"
    assert len(runs_lines) == 6

    # Spreadsheet-style recompute of the stats table from the raw runs CSV.
    per_label = {"VCA": [], "N-FINDR": []}
    for line in runs_lines[1:]:
        _, v1, v2 = line.split(",")
        per_label["VCA"].append(float(v1))
        per_label["N-FINDR"].append(float(v2))
    stats_lines = (tmp_path / "report_stats_sam.csv").read_text().splitlines()
    assert stats_lines[0].startswith("#") and stats_lines[2].startswith("#")
    header = stats_lines[3].split(",")
    assert header == ["statistic", "VCA", "N-FINDR"]
    rows = {ln.split(",")[0]: ln.split(",")[1:] for ln in stats_lines[4:]}
    for col, label in enumerate(["VCA", "N-FINDR"]):
        vals = per_label[label]
        n = len(vals)
        mean = math.fsum(vals) / n
        var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1)
        assert abs(float(rows["Mean"][col]) - mean) < 1e-12
        assert abs(float(rows["Std"][col]) - math.sqrt(var)) < 1e-12
    assert rows["Failures"] == ["0", "0"]

    em_lines = (tmp_path / "report_endmembers_sam_best.csv").read_text().splitlines()
    assert em_lines[0] == "endmember,VCA,N-FINDR"
    assert len(em_lines) == 5  # header, e1..e3, RMS
    assert em_lines[-1].startswith("RMS,")


def test_sid_metric_and_shift_counter():
    cube, truth = small_bench_inputs(snr=4.0, seed=6)  # noisy enough to go negative
    assert cube.data.min() < 0.0
    spec = BenchSpec(
        cube=cube, reference=truth,
        algorithms=(ExtractorSpec.from_name("nfindr", 3),),
        runs=2, metrics=("sam", "sid"), baseline="N-FINDR", master_seed=1,
    )
    report = run_bench(spec)
    assert report.sid_shifted_runs["N-FINDR"] == 2
    assert all(v is not None for v in report.per_run["N-FINDR"]["sid"])
