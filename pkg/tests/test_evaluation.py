import itertools

import numpy as np
import pytest

from noisekit.applications import build_ghz
from noisekit.backend import MockBackend, MockGroundTruth
from noisekit.characterization import SuiteConfig, build_suite, run_suite
from noisekit.devices import line, uniform_truth
from noisekit.errors import ArityMismatch, EmptyLadder
from noisekit.estimation import FitConfig, fit_composite
from noisekit.evaluation import (
    ApplicationRun,
    compare_models,
    scaling_report,
    score_model,
    select_model,
    tvd,
    write_scaling_csv,
    write_scores_csv,
)
from noisekit.noise import CompositeNoiseModel, ReadoutModel
from noisekit.outcomes import Counts, Distribution

NOISELESS = CompositeNoiseModel.noiseless()


# -- tvd -------------------------------------------------------------------------

def test_tvd_identical_is_zero():
    d = Distribution({"00": 0.5, "11": 0.5})
    assert tvd(d, d) == 0.0


def test_tvd_disjoint_supports_is_one():
    assert tvd(Distribution({"00": 1.0}), Distribution({"11": 1.0})) == 1.0


def test_tvd_frozen_example():
    a = Distribution({"00": 0.5, "11": 0.5})
    b = Distribution({"00": 0.4, "11": 0.4, "01": 0.1, "10": 0.1})
    assert tvd(a, b) == pytest.approx(0.2, abs=1e-15)


def test_tvd_counts_and_distributions_mix():
    counts = Counts({"00": 4096, "11": 4096}, 8192)
    assert tvd(counts, Distribution({"00": 0.5, "11": 0.5})) == 0.0


def test_tvd_arity_mismatch():
    with pytest.raises(ArityMismatch):
        tvd(Distribution({"0": 1.0}), Distribution({"00": 1.0}))


def test_tvd_metric_properties():
    """Bounds, zero-iff-equal, symmetry, triangle inequality on random
    3-outcome distribution triples."""
    rng = np.random.default_rng(99)
    keys = ("00", "01", "10")
    for _ in range(1000):
        a, b, c = (
            Distribution(dict(zip(keys, map(float, rng.dirichlet(np.ones(3))))))
            for _ in range(3)
        )
        ab, ba = tvd(a, b), tvd(b, a)
        bc, ac = tvd(b, c), tvd(a, c)
        assert 0.0 <= ab <= 1.0
        assert abs(ab - ba) <= 1e-12
        assert ac <= ab + bc + 1e-12
        assert tvd(a, a) <= 1e-12


def test_tvd_zero_only_for_equal():
    rng = np.random.default_rng(3)
    for _ in range(100):
        p = rng.dirichlet(np.ones(4))
        q = rng.dirichlet(np.ones(4))
        keys = ("00", "01", "10", "11")
        a = Distribution(dict(zip(keys, map(float, p))))
        b = Distribution(dict(zip(keys, map(float, q))))
        if tvd(a, b) == 0.0:
            assert np.allclose(p, q)


def test_tvd_relabel_invariance():
    rng = np.random.default_rng(8)
    keys = ["00", "01", "10", "11"]
    for _ in range(20):
        p = dict(zip(keys, map(float, rng.dirichlet(np.ones(4)))))
        q = dict(zip(keys, map(float, rng.dirichlet(np.ones(4)))))
        base = tvd(Distribution(p), Distribution(q))
        perm = list(rng.permutation(keys))
        relabel = dict(zip(keys, perm))
        pp = {relabel[k]: v for k, v in p.items()}
        qq = {relabel[k]: v for k, v in q.items()}
        assert tvd(Distribution(pp), Distribution(qq)) == pytest.approx(base, abs=1e-12)


# -- ApplicationRun / ModelScore ----------------------------------------------------

def test_application_run_invariants(bell_circuit):
    with pytest.raises(ValueError):
        ApplicationRun(bell_circuit, Counts({}, 0))
    with pytest.raises(ArityMismatch):
        ApplicationRun(bell_circuit, Counts({"0": 10}, 10))


# -- score_model --------------------------------------------------------------------

def _bell_run(truth_model, shots=8192, seed=5):
    topo = line(2)
    backend = MockBackend(topo, MockGroundTruth(truth_model))
    circuit = build_ghz(2, topo)
    counts = backend.run([circuit], shots, seed)[0]
    return ApplicationRun(circuit, counts)


def test_score_noiseless_model_on_noiseless_run():
    run = _bell_run(NOISELESS)
    score = score_model(run, NOISELESS, resamples=40, seed=1)
    assert score.tvd <= 0.02  # sampling floor only
    assert score.cnot_count == 1
    assert score.tvd_per_cnot == score.tvd


def test_score_self_consistency_floor():
    truth = uniform_truth(line(2))
    run = _bell_run(truth, shots=100_000)
    score = score_model(run, truth, sim_shots=100_000, resamples=20, seed=2)
    assert score.tvd <= 0.02


def test_score_exact_mode():
    truth = uniform_truth(line(2))
    run = _bell_run(truth, shots=100_000)
    score = score_model(run, truth, exact=True)
    assert score.resamples == 0
    assert score.tvd <= 0.01
    assert score.tvd_stderr == 0.0


def test_score_per_cnot_normalization():
    topo = line(5)
    truth = uniform_truth(topo)
    backend = MockBackend(topo, MockGroundTruth(truth))
    circuit = build_ghz(5, topo)
    counts = backend.run([circuit], 8192, 3)[0]
    score = score_model(ApplicationRun(circuit, counts), truth, resamples=20, seed=4)
    assert score.cnot_count == 4
    assert score.tvd_per_cnot == pytest.approx(score.tvd / 4)


# -- compare_models -----------------------------------------------------------------

def _fitted_variants(topo, truth, shots=8192, seed=11):
    backend = MockBackend(topo, MockGroundTruth(truth))
    plan = build_suite(topo, SuiteConfig(shots=shots, seed=seed))
    chars = run_suite(plan, backend)
    return {
        v: fit_composite(chars, FitConfig(variant=v)).model
        for v in ("noiseless", "sro", "aro", "dp", "sro+dp", "aro+dp")
    }


def test_compare_models_aro_dp_wins_on_asymmetric_truth():
    topo = line(2)
    truth = uniform_truth(topo, p0=0.02, p1=0.07, p_x=0.0033, p_cnot=0.05)
    variants = _fitted_variants(topo, truth)
    run = _bell_run(truth, seed=21)
    scores = compare_models(run, list(variants.items()), resamples=60, seed=9)
    assert scores[0].model_id == "aro+dp"
    assert scores[-1].model_id == "noiseless"


def test_compare_models_singleton():
    run = _bell_run(NOISELESS)
    scores = compare_models(run, [("only", NOISELESS)], resamples=10, seed=0)
    assert len(scores) == 1 and scores[0].model_id == "only"


def test_compare_models_tie_broken_by_parameter_count():
    run = _bell_run(uniform_truth(line(2)))
    rich = CompositeNoiseModel(
        granularity="register_average",
        avg_readout=ReadoutModel(0.0212, 0.0681),
        avg_x=0.0033, avg_h=0.0, avg_cnot=0.02,
    )
    poor = CompositeNoiseModel(
        granularity="register_average",
        avg_readout=ReadoutModel.symmetric(0.0212),
        avg_x=0.0, avg_h=0.0, avg_cnot=0.02,
        )
    # identical dynamics are not required for the tie rule; force a tie by
    # scoring the same model object under two ids
    scores = compare_models(run, [("b-rich", rich), ("a-rich", rich)],
                            resamples=10, seed=5)
    assert scores[0].tvd == scores[1].tvd
    assert scores[0].model_id == "a-rich"  # equal params: id breaks the tie
    assert poor.num_parameters() < rich.num_parameters()


def test_compare_models_order_invariant():
    topo = line(2)
    truth = uniform_truth(topo)
    variants = _fitted_variants(topo, truth, seed=13)
    run = _bell_run(truth, seed=31)
    items = list(variants.items())
    a = compare_models(run, items, resamples=20, seed=3)
    b = compare_models(run, list(reversed(items)), resamples=20, seed=3)
    assert [s.model_id for s in a] == [s.model_id for s in b]
    assert [s.tvd for s in a] == [s.tvd for s in b]


# -- select_model -------------------------------------------------------------------

def test_select_trivial_threshold():
    run = _bell_run(uniform_truth(line(2)))
    ladder = [("sro", NOISELESS), ("aro", NOISELESS)]
    sel = select_model(run, ladder, threshold=1.0, resamples=5, seed=0)
    assert sel.model_id == "sro" and sel.iterations == 1 and sel.threshold_met


def test_select_unattainable_threshold():
    truth = uniform_truth(line(2))
    run = _bell_run(truth)
    ladder = [("noiseless", NOISELESS), ("truth", truth)]
    sel = select_model(run, ladder, threshold=1e-12, resamples=10, seed=1)
    assert not sel.threshold_met
    assert sel.model_id == "truth"  # best scorer returned
    assert sel.iterations == 2


def test_select_empty_ladder():
    run = _bell_run(NOISELESS)
    with pytest.raises(EmptyLadder):
        select_model(run, [], threshold=0.5)


def test_select_walks_ladder_on_mock_ghz():
    topo = line(6)
    truth = uniform_truth(topo)
    backend = MockBackend(topo, MockGroundTruth(truth))
    plan = build_suite(topo, SuiteConfig(shots=8192, seed=17))
    chars = run_suite(plan, backend)
    ladder = [
        (v, fit_composite(chars, FitConfig(variant=v)).model)
        for v in ("sro", "aro", "sro+dp", "aro+dp")
    ]
    circuit = build_ghz(6, topo)
    run = ApplicationRun(circuit, backend.run([circuit], 8192, 23)[0])
    sel = select_model(run, ladder, threshold=0.05, resamples=30, seed=2)
    assert sel.threshold_met
    assert sel.score.tvd <= 0.05
    assert 1 <= sel.iterations <= 4


# -- scaling_report -----------------------------------------------------------------

def _ghz_runs(topo, truth, ns, shots=8192, seed=41):
    backend = MockBackend(topo, MockGroundTruth(truth))
    circuits = [build_ghz(n, topo) for n in ns]
    counts = backend.run(circuits, shots, seed)
    return [ApplicationRun(c, k) for c, k in zip(circuits, counts)]


def test_scaling_single_point_cv_zero():
    topo = line(3)
    truth = uniform_truth(topo)
    runs = _ghz_runs(topo, truth, [3])
    report = scaling_report(runs, truth, resamples=10, seed=1)
    assert report.cv_tvd_per_cnot == 0.0
    assert report.rows[0].n == 3 and report.rows[0].cnot_count == 2


def test_scaling_noiseless_model_tvd_grows_with_n():
    topo = line(8)
    truth = uniform_truth(topo)
    runs = _ghz_runs(topo, truth, [2, 5, 8])
    report = scaling_report(runs, NOISELESS, resamples=15, seed=6)
    tvds = [r.tvd_mean for r in report.rows]
    assert tvds[0] < tvds[1] < tvds[2]


def test_scaling_csv_columns(tmp_path):
    topo = line(3)
    truth = uniform_truth(topo)
    report = scaling_report(_ghz_runs(topo, truth, [2, 3]), truth,
                            resamples=5, seed=2)
    path = tmp_path / "scaling.csv"
    write_scaling_csv(path, report)
    header = path.read_text().splitlines()[0]
    assert header == "n,cnot_count,tvd_mean,tvd_std,tvd_per_cnot"


def test_scores_csv_columns(tmp_path):
    run = _bell_run(NOISELESS)
    scores = compare_models(run, [("m", NOISELESS)], resamples=5, seed=0)
    path = tmp_path / "scores.csv"
    write_scores_csv(path, scores)
    header = path.read_text().splitlines()[0]
    assert header.startswith("model_id,tvd_mean,tvd_std,tvd_per_cnot,cnot_count")
