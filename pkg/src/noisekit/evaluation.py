"""Model accuracy scoring by total variation distance, model-family
comparison, threshold-driven selection, and per-cnot scaling analysis.

Model predictions are sampled at the experiment's shot count by default so
the finite-statistics TVD floor affects both sides symmetrically; exact
channel-averaged scoring is available for narrow circuits.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .circuit import Circuit
from .errors import ArityMismatch, EmptyLadder
from .noise import CompositeNoiseModel
from .outcomes import Counts, Distribution, as_frequencies
from .rng import child_seed
from .simulator import TrajectorySampler, simulate_noisy_exact


def tvd(a: Counts | Distribution, b: Counts | Distribution) -> float:
    """Total variation distance: half the L1 gap between outcome frequencies.

    Counts are converted to exact frequencies; outcomes missing from one
    side contribute frequency zero.
    """
    fa, bits_a = as_frequencies(a)
    fb, bits_b = as_frequencies(b)
    if bits_a != bits_b:
        raise ArityMismatch(f"cannot compare {bits_a}-bit with {bits_b}-bit outcomes")
    keys = set(fa) | set(fb)
    return 0.5 * sum(abs(fa.get(k, 0.0) - fb.get(k, 0.0)) for k in keys)


@dataclass(frozen=True)
class ApplicationRun:
    """An executed application circuit with its recorded counts."""

    circuit: Circuit
    counts: Counts

    def __post_init__(self):
        if self.counts.shots <= 0:
            raise ValueError("application run needs at least one shot")
        measured = len(self.circuit.measured_qubits())
        if self.counts.num_bits != measured:
            raise ArityMismatch(
                f"{self.counts.num_bits}-bit counts for a circuit measuring "
                f"{measured} bits"
            )


@dataclass(frozen=True)
class ModelScore:
    model_id: str
    tvd: float
    tvd_stderr: float
    tvd_per_cnot: float
    cnot_count: int
    n_parameters: int
    resamples: int
    sim_shots: int

    def __post_init__(self):
        if not (0.0 <= self.tvd <= 1.0):
            raise ValueError(f"tvd {self.tvd} outside [0,1]")

    def to_json_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "tvd": self.tvd,
            "tvd_stderr": self.tvd_stderr,
            "tvd_per_cnot": self.tvd_per_cnot,
            "cnot_count": self.cnot_count,
            "n_parameters": self.n_parameters,
            "resamples": self.resamples,
            "sim_shots": self.sim_shots,
        }


def score_model(
    run: ApplicationRun,
    model: CompositeNoiseModel,
    sim_shots: int | None = None,
    resamples: int = 100,
    seed: int = 0,
    exact: bool = False,
    model_id: str = "",
) -> ModelScore:
    """TVD between the run and the model's predictions.

    Sampled mode simulates `resamples` independent count sets of `sim_shots`
    each (default: the experiment's own shot count) and reports the mean and
    spread of the TVD values. Exact mode compares against the channel-
    averaged distribution directly.
    """
    cnots = run.circuit.cnot_count
    if exact:
        dist = simulate_noisy_exact(run.circuit, model)
        value = tvd(run.counts, dist)
        return ModelScore(
            model_id=model_id,
            tvd=value,
            tvd_stderr=0.0,
            tvd_per_cnot=value / max(cnots, 1),
            cnot_count=cnots,
            n_parameters=model.num_parameters(),
            resamples=0,
            sim_shots=0,
        )
    shots = sim_shots if sim_shots is not None else run.counts.shots
    sampler = TrajectorySampler(run.circuit, model)
    values = [
        tvd(run.counts, sampler.sample(shots, child_seed(seed, r)))
        for r in range(resamples)
    ]
    mean = float(np.mean(values))
    spread = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return ModelScore(
        model_id=model_id,
        tvd=mean,
        tvd_stderr=spread,
        tvd_per_cnot=mean / max(cnots, 1),
        cnot_count=cnots,
        n_parameters=model.num_parameters(),
        resamples=resamples,
        sim_shots=shots,
    )


def compare_models(
    run: ApplicationRun,
    models: list[tuple[str, CompositeNoiseModel]],
    sim_shots: int | None = None,
    resamples: int = 100,
    seed: int = 0,
) -> list[ModelScore]:
    """Score every variant under an identical protocol; rank ascending by
    mean TVD, ties broken by fewer model parameters (prefer simpler)."""
    if len(models) < 1:
        raise EmptyLadder("compare_models needs at least one model")
    scores = [
        score_model(run, model, sim_shots=sim_shots, resamples=resamples,
                    seed=seed, model_id=model_id)
        for model_id, model in models
    ]
    return sorted(scores, key=lambda s: (s.tvd, s.n_parameters, s.model_id))


@dataclass(frozen=True)
class SelectionResult:
    model_id: str
    model: CompositeNoiseModel
    score: ModelScore
    iterations: int
    threshold: float
    threshold_met: bool


def select_model(
    run: ApplicationRun,
    ladder: list[tuple[str, CompositeNoiseModel]],
    threshold: float,
    sim_shots: int | None = None,
    resamples: int = 100,
    seed: int = 0,
) -> SelectionResult:
    """Walk a complexity-ordered ladder of models until one meets the
    user-defined TVD threshold; otherwise return the best scorer flagged
    threshold_unmet."""
    if not ladder:
        raise EmptyLadder("model selection needs a nonempty ladder")
    best: tuple[str, CompositeNoiseModel, ModelScore] | None = None
    for iteration, (model_id, model) in enumerate(ladder, start=1):
        score = score_model(run, model, sim_shots=sim_shots, resamples=resamples,
                            seed=seed, model_id=model_id)
        if best is None or score.tvd < best[2].tvd:
            best = (model_id, model, score)
        if score.tvd <= threshold:
            return SelectionResult(model_id, model, score, iteration, threshold, True)
    model_id, model, score = best
    return SelectionResult(model_id, model, score, len(ladder), threshold, False)


@dataclass(frozen=True)
class ScalingRow:
    n: int
    cnot_count: int
    tvd_mean: float
    tvd_std: float
    tvd_per_cnot: float


@dataclass(frozen=True)
class ScalingReport:
    rows: tuple[ScalingRow, ...]
    cv_tvd_per_cnot: float


def scaling_report(
    runs: list[ApplicationRun],
    model: CompositeNoiseModel,
    sim_shots: int | None = None,
    resamples: int = 100,
    seed: int = 0,
) -> ScalingReport:
    """Score one model across circuit widths and report how flat the
    cnot-normalized TVD stays (coefficient of variation)."""
    rows = []
    for run in runs:
        score = score_model(run, model, sim_shots=sim_shots, resamples=resamples,
                            seed=seed)
        rows.append(
            ScalingRow(
                n=len(run.circuit.measured_qubits()),
                cnot_count=score.cnot_count,
                tvd_mean=score.tvd,
                tvd_std=score.tvd_stderr,
                tvd_per_cnot=score.tvd_per_cnot,
            )
        )
    rows.sort(key=lambda r: r.n)
    per_cnot = np.array([r.tvd_per_cnot for r in rows])
    cv = float(np.std(per_cnot) / np.mean(per_cnot)) if len(rows) and per_cnot.mean() > 0 else 0.0
    return ScalingReport(tuple(rows), cv)


# -- report writers -------------------------------------------------------------

def write_scores_json(path: str | Path, scores: list[ModelScore],
                      meta: dict | None = None) -> None:
    payload = {"meta": dict(meta or {}), "scores": [s.to_json_dict() for s in scores]}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))


def write_scores_csv(path: str | Path, scores: list[ModelScore]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["model_id", "tvd_mean", "tvd_std", "tvd_per_cnot", "cnot_count",
             "n_parameters"]
        )
        for s in scores:
            writer.writerow(
                [s.model_id, f"{s.tvd:.6f}", f"{s.tvd_stderr:.6f}",
                 f"{s.tvd_per_cnot:.6f}", s.cnot_count, s.n_parameters]
            )


def write_scaling_csv(path: str | Path, report: ScalingReport) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "cnot_count", "tvd_mean", "tvd_std", "tvd_per_cnot"])
        for r in report.rows:
            writer.writerow(
                [r.n, r.cnot_count, f"{r.tvd_mean:.6f}", f"{r.tvd_std:.6f}",
                 f"{r.tvd_per_cnot:.6f}"]
            )
