"""Parameter estimation from characterization records.

Direct frequency estimators for readout-of-0 error, a damped-Newton solver
for the coupled (p1, p_x) system, a survival-decay fit for per-gate
Hadamard error, and a bounded scalar least-squares fit for the cnot
depolarizing parameter. Standard errors propagate binomial counting noise
through each estimator by finite differences (delta method); estimates that
land outside [0,1] are clamped and flagged infeasible rather than rejected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .characterization import Characterization
from .errors import (
    InsufficientLengths,
    MissingCoverage,
    NoConvergence,
    OutOfRange,
    WrongKind,
)
from .noise import (
    PER_ELEMENT,
    REGISTER_AVERAGE,
    SUBSET_AVERAGE,
    VARIANTS,
    CompositeNoiseModel,
    ReadoutModel,
    apply_readout_to_distribution,
    bell_frequencies,
)


@dataclass(frozen=True)
class EstimationResult:
    """One fitted parameter with its pre-clamp raw value and diagnostics."""

    name: str
    value: float
    raw_value: float
    stderr: float = 0.0
    feasible: bool = True
    residual_norm: float = 0.0
    iterations: int = 0

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise OutOfRange(f"{self.name}: clamped value {self.value} outside [0,1]")
        if self.stderr < 0:
            raise OutOfRange(f"{self.name}: negative stderr")


def _clamped(name, raw, stderr=0.0, residual_norm=0.0, iterations=0) -> EstimationResult:
    value = min(1.0, max(0.0, raw))
    return EstimationResult(
        name=name,
        value=value,
        raw_value=raw,
        stderr=stderr,
        feasible=(value == raw),
        residual_norm=residual_norm,
        iterations=iterations,
    )


def binomial_stderr(freq: float, shots: int | None) -> float:
    if not shots:
        return 0.0
    v = min(1.0, max(0.0, freq))
    return math.sqrt(v * (1.0 - v) / shots)


# -- generic solvers -----------------------------------------------------------

def damped_newton_2x2(residual_fn, x0, residual_tol=1e-10, max_iter=200,
                      fd_step=1e-7):
    """Solve residual_fn(x) = 0 for 2-vectors by damped Newton iteration.

    The Jacobian is numerically differenced; each step is halved until the
    residual infinity-norm decreases. Raises NoConvergence with diagnostics
    if the tolerance is not met within max_iter iterations.
    """
    x = np.asarray(x0, dtype=float)
    for iteration in range(max_iter):
        r = np.asarray(residual_fn(x), dtype=float)
        r_norm = np.max(np.abs(r))
        if r_norm <= residual_tol:
            return x, r_norm, iteration
        jac = np.empty((2, 2))
        for col in range(2):
            bump = np.zeros(2)
            bump[col] = fd_step
            jac[:, col] = (
                np.asarray(residual_fn(x + bump)) - np.asarray(residual_fn(x - bump))
            ) / (2 * fd_step)
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(
                "singular Jacobian in 2x2 Newton solve",
                {"x": x.tolist(), "residual": r.tolist(), "iterations": iteration},
            ) from exc
        scale = 1.0
        while scale > 1e-10:
            trial = x + scale * step
            if np.max(np.abs(residual_fn(trial))) < r_norm:
                break
            scale /= 2.0
        else:
            raise NoConvergence(
                "damping stalled in 2x2 Newton solve",
                {"x": x.tolist(), "residual_norm": r_norm, "iterations": iteration},
            )
        x = x + scale * step
    raise NoConvergence(
        "residual tolerance not reached",
        {"x": x.tolist(), "residual_norm": float(np.max(np.abs(residual_fn(x)))),
         "iterations": max_iter},
    )


def minimize_bounded(fn, lo, hi, param_tol=1e-10, coarse=65, max_newton=80):
    """Minimize a smooth scalar function on [lo, hi].

    Coarse scan to bracket the global minimum, golden-section refinement,
    then Newton polish on the (finite-differenced) derivative; falls back to
    the golden-section result whenever Newton misbehaves. Returns
    (minimizer, fn(minimizer), iterations).
    """
    grid = np.linspace(lo, hi, coarse)
    values = [fn(g) for g in grid]
    best = int(np.argmin(values))
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, coarse - 1)]
    iterations = coarse

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > 1e-8:
        iterations += 1
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)

    step_h = 1e-6
    newton_steps = 0
    while lo + step_h <= x <= hi - step_h and newton_steps < max_newton:
        newton_steps += 1
        iterations += 1
        f0, fp, fm = fn(x), fn(x + step_h), fn(x - step_h)
        d1 = (fp - fm) / (2 * step_h)
        d2 = (fp - 2 * f0 + fm) / step_h**2
        if d2 <= 0.0 or not math.isfinite(d2):
            break
        nxt = min(hi, max(lo, x - d1 / d2))
        moved = abs(nxt - x)
        if fn(nxt) > f0:
            break
        x = nxt
        if moved <= param_tol:
            break
    # exact boundary minima beat any interior resolution limit
    fx = fn(x)
    for endpoint in (lo, hi):
        fe = fn(endpoint)
        if fe <= fx:
            x, fx = endpoint, fe
    return float(x), float(fx), iterations


# -- direct and solved estimators ----------------------------------------------

def _frequency_of(char: Characterization, outcome: str) -> float:
    return char.counts.frequency(outcome)


def estimate_p0(char: Characterization) -> EstimationResult:
    """Readout-of-0 flip rate from the init-measure test: the observed
    frequency of outcome 1. Doubles as p_sro for the symmetric model."""
    if char.kind.kind != "init":
        raise WrongKind(f"estimate_p0 needs an init test, got {char.kind.kind}")
    freq = _frequency_of(char, "1")
    return EstimationResult(
        name=f"p0:q{char.kind.qubit}",
        value=freq,
        raw_value=freq,
        stderr=binomial_stderr(freq, char.counts.shots),
    )


def _x_test_frequencies_raw(p0: float, p1: float, p_x: float) -> tuple[float, float]:
    # Same closed forms as noise.predicted_x_test_frequencies, without the
    # domain checks so the solver can traverse infeasible iterates.
    q = 2.0 * p_x / 3.0
    g_x_0 = q * (1.0 - p0) + p1 * (1.0 - q)
    g_xx_0 = (1.0 - p0) * ((1.0 - q) ** 2 + q ** 2) + p1 * (2.0 * q * (1.0 - q))
    return g_x_0, g_xx_0


def solve_aro_system(
    g_x_0: float,
    g_xx_0: float,
    p0: float,
    shots: int | None = None,
    p0_stderr: float = 0.0,
    qubit: int | None = None,
) -> tuple[EstimationResult, EstimationResult]:
    """Recover (p1, p_x) from the X / XX test frequencies given p0.

    Damped Newton with a numeric Jacobian, initial guess (g_x_0, 0.001),
    residual infinity-norm tolerance 1e-10. Raw solutions outside [0,1]
    (possible for near-noiseless registers) are clamped and flagged.
    """
    for name, value in (("g_x_0", g_x_0), ("g_xx_0", g_xx_0), ("p0", p0)):
        if not (0.0 <= value <= 1.0):
            raise OutOfRange(f"{name}={value} is not a probability")

    def residual(theta):
        pred_x, pred_xx = _x_test_frequencies_raw(p0, theta[0], theta[1])
        return np.array([pred_x - g_x_0, pred_xx - g_xx_0])

    solution, r_norm, iterations = damped_newton_2x2(residual, (g_x_0, 0.001))
    p1_raw, px_raw = float(solution[0]), float(solution[1])

    stderr_p1 = stderr_px = 0.0
    if shots:
        fd = 1e-7
        jac = np.empty((2, 2))
        for col in range(2):
            bump = np.zeros(2)
            bump[col] = fd
            jac[:, col] = (residual(solution + bump) - residual(solution - bump)) / (2 * fd)
        jac_inv = np.linalg.inv(jac)
        var_g = np.diag(
            [binomial_stderr(g_x_0, shots) ** 2, binomial_stderr(g_xx_0, shots) ** 2]
        )
        d_p0 = np.array(
            [
                (_x_test_frequencies_raw(p0 + fd, p1_raw, px_raw)[i]
                 - _x_test_frequencies_raw(p0 - fd, p1_raw, px_raw)[i]) / (2 * fd)
                for i in range(2)
            ]
        )
        sens_p0 = jac_inv @ d_p0
        cov = jac_inv @ var_g @ jac_inv.T + np.outer(sens_p0, sens_p0) * p0_stderr**2
        stderr_p1, stderr_px = math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1])

    tag = f":q{qubit}" if qubit is not None else ""
    return (
        _clamped(f"p1{tag}", p1_raw, stderr_p1, r_norm, iterations),
        _clamped(f"p_x{tag}", px_raw, stderr_px, r_norm, iterations),
    )


def hadamard_survival(length: int, p_h: float) -> float:
    """Probability of the ideal outcome 0 after an even Hadamard train where
    every gate carries a depolarizing channel with parameter p_h."""
    return 0.5 + 0.5 * (1.0 - 4.0 * p_h / 3.0) ** length


@dataclass(frozen=True)
class HadamardFit:
    result: EstimationResult
    include_in_model: bool


def estimate_hadamard_error(
    chars: list[Characterization], readout: ReadoutModel
) -> HadamardFit:
    """Per-gate Hadamard depolarizing rate from even-length sequence tests.

    Least squares of readout-corrected survival against
    1/2 + 1/2 (1 - 4p/3)^L. The include flag recommends dropping the channel
    when the rate is indistinguishable from zero (<= 10 stderr).
    """
    for char in chars:
        if char.kind.kind != "hseq":
            raise WrongKind(f"expected hseq tests, got {char.kind.kind}")
    lengths = sorted({char.kind.length for char in chars})
    if len(lengths) < 2:
        raise InsufficientLengths(
            f"need >=2 distinct sequence lengths, got {lengths}"
        )
    denom = 1.0 - readout.p0 - readout.p1
    if abs(denom) < 1e-9:
        raise NoConvergence("readout too noisy to invert for survival correction")
    by_length = {char.kind.length: char for char in chars}
    observed = {l: by_length[l].counts.frequency("0") for l in lengths}
    shots = next(iter(by_length.values())).counts.shots

    def corrected(obs):
        return {l: (obs[l] - readout.p1) / denom for l in lengths}

    def fit(obs):
        target = corrected(obs)
        obj = lambda p: sum((hadamard_survival(l, p) - target[l]) ** 2 for l in lengths)
        return minimize_bounded(obj, 0.0, 1.0)

    value, ssr, iterations = fit(observed)

    stderr = 0.0
    if shots:
        delta = 1e-4
        var = 0.0
        for l in lengths:
            sigma = binomial_stderr(observed[l], shots)
            hi = dict(observed); hi[l] += delta
            lo = dict(observed); lo[l] -= delta
            slope = (fit(hi)[0] - fit(lo)[0]) / (2 * delta)
            var += (slope * sigma) ** 2
        stderr = math.sqrt(var)

    qubit = chars[0].kind.qubit
    result = EstimationResult(
        name=f"p_h:q{qubit}",
        value=value,
        raw_value=value,
        stderr=stderr,
        residual_norm=math.sqrt(ssr),
        iterations=iterations,
    )
    return HadamardFit(result, include_in_model=value > 10.0 * stderr)


def fit_pcnot(
    char: Characterization,
    readout_j: ReadoutModel,
    readout_k: ReadoutModel,
    shots: int | None = None,
    readout_stderrs: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0),
) -> EstimationResult:
    """Least-squares cnot depolarizing rate from a Bell-state test.

    Minimizes the sum of squared residuals between the predicted
    readout-transformed Bell frequencies and the observed ones, with the
    parameter bounded in [0,1].
    """
    if char.kind.kind != "bell":
        raise WrongKind(f"fit_pcnot needs a bell test, got {char.kind.kind}")
    keys = ("00", "01", "10", "11")
    observed = {k: char.counts.frequency(k) for k in keys}

    def fit(obs, ro_j, ro_k):
        def objective(p):
            model = apply_readout_to_distribution(bell_frequencies(p), [ro_j, ro_k])
            return sum((model.prob(k) - obs[k]) ** 2 for k in keys)

        return minimize_bounded(objective, 0.0, 1.0)

    value, ssr, iterations = fit(observed, readout_j, readout_k)

    stderr = 0.0
    if shots:
        delta = 1e-4
        var = 0.0
        for k in keys:
            sigma = binomial_stderr(observed[k], shots)
            if sigma == 0.0:
                continue
            hi = dict(observed); hi[k] += delta
            lo = dict(observed); lo[k] = max(0.0, lo[k] - delta)
            slope = (fit(hi, readout_j, readout_k)[0] - fit(lo, readout_j, readout_k)[0]) / (
                hi[k] - lo[k]
            )
            var += (slope * sigma) ** 2
        params = [
            (readout_stderrs[0], lambda d: (ReadoutModel(_bump(readout_j.p0, d), readout_j.p1), readout_k)),
            (readout_stderrs[1], lambda d: (ReadoutModel(readout_j.p0, _bump(readout_j.p1, d)), readout_k)),
            (readout_stderrs[2], lambda d: (readout_j, ReadoutModel(_bump(readout_k.p0, d), readout_k.p1))),
            (readout_stderrs[3], lambda d: (readout_j, ReadoutModel(readout_k.p0, _bump(readout_k.p1, d)))),
        ]
        for sigma, perturb in params:
            if sigma == 0.0:
                continue
            hi_models = perturb(delta)
            lo_models = perturb(-delta)
            slope = (fit(observed, *hi_models)[0] - fit(observed, *lo_models)[0]) / (2 * delta)
            var += (slope * sigma) ** 2
        stderr = math.sqrt(var)

    j, k = char.kind.coupling
    return EstimationResult(
        name=f"p_cnot:q{j}-q{k}",
        value=value,
        raw_value=value,
        stderr=stderr,
        residual_norm=math.sqrt(ssr),
        iterations=iterations,
    )


def _bump(p: float, delta: float) -> float:
    return min(1.0, max(0.0, p + delta))


# -- composite orchestration ----------------------------------------------------

@dataclass(frozen=True)
class FitConfig:
    variant: str = "aro+dp"
    granularity: str = PER_ELEMENT
    subset: tuple[int, ...] | None = None
    window: str = ""
    provenance: str = ""

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; pick from {sorted(VARIANTS)}")
        if self.granularity == SUBSET_AVERAGE and not self.subset:
            raise ValueError("subset_average fitting requires a nonempty subset")


@dataclass(frozen=True)
class CompositeFit:
    model: CompositeNoiseModel
    estimates: dict[str, EstimationResult] = field(default_factory=dict)
    variant: str = "aro+dp"

    def diagnostics_dict(self) -> dict:
        return {
            "variant": self.variant,
            "parameters": {
                name: {
                    "value": r.value,
                    "raw_value": r.raw_value,
                    "stderr": r.stderr,
                    "feasible": r.feasible,
                    "residual_norm": r.residual_norm,
                    "iterations": r.iterations,
                }
                for name, r in sorted(self.estimates.items())
            },
        }


def fit_composite(chars: list[Characterization], config: FitConfig) -> CompositeFit:
    """Compose a noise model from characterization records.

    Per qubit: p0 from the init test and (p1, p_x) from the X/XX system.
    Per coupling: p_cnot refit against the variant's own readout model, so
    e.g. the SRO+DP and ARO+DP depolarizing parameters differ. Averaged
    granularities fit per element first and then average the parameters.
    """
    readout_mode, gate_dp = VARIANTS[config.variant]
    if config.variant == "noiseless":
        model = replace(
            CompositeNoiseModel.noiseless(),
            window=config.window,
            provenance=config.provenance,
        )
        return CompositeFit(model, {}, config.variant)

    by_kind: dict[tuple, Characterization] = {}
    hseqs: dict[int, list[Characterization]] = {}
    covered_qubits: set[int] = set()
    covered_couplings: set[tuple[int, int]] = set()
    for char in chars:
        kind = char.kind
        if kind.kind == "bell":
            covered_couplings.add(kind.coupling)
            covered_qubits.update(kind.coupling)
            by_kind[("bell", kind.coupling)] = char
        elif kind.kind == "hseq":
            hseqs.setdefault(kind.qubit, []).append(char)
            covered_qubits.add(kind.qubit)
        else:
            covered_qubits.add(kind.qubit)
            by_kind[(kind.kind, kind.qubit)] = char

    if config.granularity == SUBSET_AVERAGE:
        qubits = sorted(config.subset)
        couplings = sorted(
            c for c in covered_couplings if c[0] in config.subset and c[1] in config.subset
        )
    else:
        qubits = sorted(covered_qubits)
        couplings = sorted(covered_couplings)

    missing = [f"init:q{q}" for q in qubits if ("init", q) not in by_kind]
    need_x_system = readout_mode == "aro" or gate_dp
    if need_x_system:
        for q in qubits:
            missing.extend(
                label
                for kind, label in (("x", f"x:q{q}"), ("xx", f"xx:q{q}"))
                if (kind, q) not in by_kind
            )
    if gate_dp and not couplings:
        missing.append("bell:<any coupling>")
    if missing:
        raise MissingCoverage(
            "characterization does not cover the requested fit: " + ", ".join(missing),
            missing,
        )

    estimates: dict[str, EstimationResult] = {}
    p0_results: dict[int, EstimationResult] = {}
    p1_results: dict[int, EstimationResult] = {}
    px_results: dict[int, EstimationResult] = {}
    ph_results: dict[int, HadamardFit] = {}
    shots = chars[0].counts.shots if chars else None

    for q in qubits:
        p0_res = estimate_p0(by_kind[("init", q)])
        p0_results[q] = p0_res
        estimates[p0_res.name] = p0_res
        if need_x_system:
            g_x_0 = by_kind[("x", q)].counts.frequency("0")
            g_xx_0 = by_kind[("xx", q)].counts.frequency("0")
            p1_res, px_res = solve_aro_system(
                g_x_0, g_xx_0, p0_res.value, shots=shots,
                p0_stderr=p0_res.stderr, qubit=q,
            )
            p1_results[q] = p1_res
            px_results[q] = px_res
            estimates[p1_res.name] = p1_res
            estimates[px_res.name] = px_res

    def readout_of(q: int) -> ReadoutModel:
        if readout_mode == "aro":
            return ReadoutModel(p0_results[q].value, p1_results[q].value)
        if readout_mode == "sro":
            return ReadoutModel.symmetric(p0_results[q].value)
        return ReadoutModel.ideal()

    def readout_stderrs_of(q: int) -> tuple[float, float, float, float]:
        if readout_mode == "aro":
            return (p0_results[q].stderr, p1_results[q].stderr)
        if readout_mode == "sro":
            return (p0_results[q].stderr, p0_results[q].stderr)
        return (0.0, 0.0)

    for q in qubits:
        if q in hseqs and gate_dp:
            ph_results[q] = estimate_hadamard_error(hseqs[q], readout_of(q))
            estimates[ph_results[q].result.name] = ph_results[q].result

    pcnot_results: dict[tuple[int, int], EstimationResult] = {}
    if gate_dp:
        for coupling in couplings:
            j, k = coupling
            res = fit_pcnot(
                by_kind[("bell", coupling)],
                readout_of(j),
                readout_of(k),
                shots=shots,
                readout_stderrs=readout_stderrs_of(j) + readout_stderrs_of(k),
            )
            pcnot_results[coupling] = res
            estimates[res.name] = res

    include_x = gate_dp and readout_mode != "off"
    x_map = {q: px_results[q].value for q in qubits} if include_x else {}
    h_map = {
        q: fit.result.value for q, fit in ph_results.items() if fit.include_in_model
    }
    readout_map = {q: readout_of(q) for q in qubits} if readout_mode != "off" else {}
    cnot_map = {c: r.value for c, r in pcnot_results.items()}

    if config.granularity == PER_ELEMENT:
        model = CompositeNoiseModel(
            granularity=PER_ELEMENT,
            readout=readout_map,
            x_gate=x_map,
            h_gate=h_map,
            cnot=cnot_map,
            readout_on=readout_mode != "off",
            cnot_dp_on=gate_dp,
            window=config.window,
            provenance=config.provenance,
        )
    else:
        mean = lambda vals: float(np.mean(list(vals))) if vals else 0.0
        avg_p0 = mean([p0_results[q].value for q in qubits])
        avg_p1 = (
            mean([p1_results[q].value for q in qubits])
            if readout_mode == "aro"
            else avg_p0
        )
        model = CompositeNoiseModel(
            granularity=config.granularity,
            subset=tuple(sorted(config.subset)) if config.subset else None,
            avg_readout=(
                ReadoutModel(avg_p0, avg_p1)
                if readout_mode != "off"
                else ReadoutModel.ideal()
            ),
            avg_x=mean(list(x_map.values())),
            avg_h=mean(list(h_map.values())),
            avg_cnot=mean(list(cnot_map.values())),
            readout_on=readout_mode != "off",
            cnot_dp_on=gate_dp,
            window=config.window,
            provenance=config.provenance,
        )
    return CompositeFit(model, estimates, config.variant)
