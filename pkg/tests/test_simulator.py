import numpy as np
import pytest

from noisekit.circuit import Circuit, cnot, h, identity, measure, x
from noisekit.errors import TooWide
from noisekit.noise import CompositeNoiseModel, ReadoutModel
from noisekit.outcomes import Distribution
from noisekit.simulator import (
    TrajectorySampler,
    sample_from_distribution,
    simulate_ideal,
    simulate_noisy_exact,
    simulate_noisy_sampled,
)


def _uniform_model(p_x=0.0, p_h=0.0, p_cnot=0.0, p0=0.0, p1=0.0,
                   readout_on=True, cnot_dp_on=True):
    return CompositeNoiseModel(
        granularity="register_average",
        avg_readout=ReadoutModel(p0, p1),
        avg_x=p_x,
        avg_h=p_h,
        avg_cnot=p_cnot,
        readout_on=readout_on,
        cnot_dp_on=cnot_dp_on,
    )


NOISELESS = CompositeNoiseModel.noiseless()


def _tvd(a: dict, b: dict) -> float:
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)


# -- simulate_ideal ------------------------------------------------------------

def test_ideal_ghz2(bell_circuit):
    dist = simulate_ideal(bell_circuit)
    assert dist.prob("00") == pytest.approx(0.5, abs=1e-12)
    assert dist.prob("11") == pytest.approx(0.5, abs=1e-12)
    assert dist.prob("01") == 0.0


def test_ideal_x_gate():
    dist = simulate_ideal(Circuit(1, 1, (x(0), measure(0, 0)), "x"))
    assert dist.prob("1") == pytest.approx(1.0, abs=1e-12)


def test_ideal_hh_involution():
    dist = simulate_ideal(Circuit(1, 1, (h(0), h(0), measure(0, 0)), "hh"))
    assert dist.prob("0") == pytest.approx(1.0, abs=1e-12)


def test_ideal_identity_gate_noop():
    dist = simulate_ideal(Circuit(1, 1, (identity(0), measure(0, 0)), "id"))
    assert dist.prob("0") == pytest.approx(1.0, abs=1e-12)


def test_ideal_too_wide():
    gates = tuple(h(q) for q in range(25)) + (measure(0, 0),)
    with pytest.raises(TooWide):
        simulate_ideal(Circuit(25, 1, gates, "wide"))


def test_ideal_remaps_active_qubits():
    # Large register, only two active qubits: must not allocate 2^30 states.
    circuit = Circuit(30, 2, (h(17), cnot(17, 23), measure(17, 0), measure(23, 1)), "b")
    dist = simulate_ideal(circuit)
    assert dist.prob("00") == pytest.approx(0.5, abs=1e-12)


def test_mid_circuit_measurement_rejected():
    circuit = Circuit(1, 1, (measure(0, 0), x(0)), "bad")
    with pytest.raises(ValueError):
        simulate_ideal(circuit)


# -- simulate_noisy_exact ------------------------------------------------------

def test_exact_noiseless_limit(bell_circuit):
    dist = simulate_noisy_exact(bell_circuit, _uniform_model())
    assert dist.prob("00") == pytest.approx(0.5, abs=1e-12)
    assert dist.prob("11") == pytest.approx(0.5, abs=1e-12)


def test_exact_full_depolarization(bell_circuit):
    dist = simulate_noisy_exact(bell_circuit, _uniform_model(p_cnot=0.75))
    for key in ("00", "01", "10", "11"):
        assert dist.prob(key) == pytest.approx(0.25, abs=1e-12)


def test_exact_bell_p01(bell_circuit):
    # Frozen from direct evaluation of the quadratic closed form at p=0.1.
    dist = simulate_noisy_exact(bell_circuit, _uniform_model(p_cnot=0.1))
    assert dist.prob("00") == pytest.approx(0.4377777778, abs=1e-9)
    assert dist.prob("11") == pytest.approx(0.4377777778, abs=1e-9)
    assert dist.prob("01") == pytest.approx(0.0622222222, abs=1e-9)
    assert dist.prob("10") == pytest.approx(0.0622222222, abs=1e-9)


def test_exact_equals_ideal_at_zero_noise():
    rng = np.random.default_rng(2)
    for trial in range(10):
        circuit = _random_circuit(rng, n=3)
        ideal = simulate_ideal(circuit)
        exact = simulate_noisy_exact(circuit, NOISELESS)
        assert _tvd(dict(ideal.items()), dict(exact.items())) < 1e-12


def test_exact_too_wide():
    gates = tuple(h(q) for q in range(9)) + (measure(0, 0),)
    with pytest.raises(TooWide):
        simulate_noisy_exact(Circuit(9, 1, gates, "wide"), NOISELESS)


# -- simulate_noisy_sampled ----------------------------------------------------

def test_sampled_noiseless_support(bell_circuit):
    counts = simulate_noisy_sampled(bell_circuit, NOISELESS, 8192, seed=1)
    assert set(counts.counts) == {"00", "11"}
    assert counts.shots == 8192


def test_sampled_deterministic(bell_circuit):
    model = _uniform_model(p_cnot=0.1, p0=0.02, p1=0.07)
    a = simulate_noisy_sampled(bell_circuit, model, 4096, seed=9)
    b = simulate_noisy_sampled(bell_circuit, model, 4096, seed=9)
    assert a == b
    c = simulate_noisy_sampled(bell_circuit, model, 4096, seed=10)
    assert a != c


def test_sampled_converges_to_exact(bell_circuit):
    model = _uniform_model(p_cnot=0.02, p_x=0.0033, p0=0.0212, p1=0.0681)
    exact = simulate_noisy_exact(bell_circuit, model)
    counts = simulate_noisy_sampled(bell_circuit, model, 10**6, seed=3)
    assert _tvd(counts.frequencies(), dict(exact.items())) <= 0.005


def test_sampled_zero_shots(bell_circuit):
    counts = simulate_noisy_sampled(bell_circuit, NOISELESS, 0, seed=0)
    assert counts.shots == 0 and counts.counts == {}


def _random_circuit(rng, n, depth=6, label="rand"):
    gates = []
    for _ in range(depth):
        kind = rng.integers(0, 3 if n >= 2 else 2)
        if kind == 0:
            gates.append(h(int(rng.integers(0, n))))
        elif kind == 1:
            gates.append(x(int(rng.integers(0, n))))
        else:
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(cnot(int(a), int(b)))
    gates += [measure(q, q) for q in range(n)]
    return Circuit(n, n, tuple(gates), label)


def _random_model(rng):
    return _uniform_model(
        p_x=float(rng.uniform(0, 0.05)),
        p_cnot=float(rng.uniform(0, 0.15)),
        p0=float(rng.uniform(0, 0.1)),
        p1=float(rng.uniform(0, 0.1)),
    )


def test_oracle_equivalence_exact_vs_sampled():
    """Exact channel averaging and trajectory sampling agree for all widths
    up to 4 on a randomized test set."""
    rng = np.random.default_rng(2024)
    for trial in range(8):
        n = int(rng.integers(1, 5))
        circuit = _random_circuit(rng, n, label=f"rand{trial}")
        model = _random_model(rng)
        exact = simulate_noisy_exact(circuit, model)
        counts = simulate_noisy_sampled(circuit, model, 10**5, seed=trial)
        assert _tvd(counts.frequencies(), dict(exact.items())) <= 0.01


def test_sampler_reuse_matches_one_shot_calls(bell_circuit):
    model = _uniform_model(p_cnot=0.05, p0=0.01, p1=0.03)
    sampler = TrajectorySampler(bell_circuit, model)
    a = sampler.sample(2048, seed=5)
    b = sampler.sample(2048, seed=5)
    assert a == b
    assert a == simulate_noisy_sampled(bell_circuit, model, 2048, seed=5)


# -- sample_from_distribution ----------------------------------------------------

def test_sample_point_mass():
    counts = sample_from_distribution(Distribution({"0": 1.0}), 100, seed=0)
    assert counts.counts == {"0": 100}


def test_sample_binomial_bound():
    counts = sample_from_distribution(
        Distribution({"0": 0.5, "1": 0.5}), 8192, seed=123
    )
    # 4 sigma of Binomial(8192, 1/2) is ~181
    assert abs(counts.counts["0"] - 4096) <= 182
    assert abs(counts.counts["1"] - 4096) <= 182


def test_sample_zero_shots():
    counts = sample_from_distribution(Distribution({"0": 1.0}), 0, seed=0)
    assert counts.shots == 0 and counts.counts == {}


def test_sample_deterministic():
    dist = Distribution({"00": 0.25, "01": 0.25, "10": 0.25, "11": 0.25})
    assert sample_from_distribution(dist, 999, 7) == sample_from_distribution(dist, 999, 7)
