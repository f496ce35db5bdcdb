"""Ideal, exact-noisy, and Monte Carlo trajectory simulation.

Circuits are internally remapped onto their active qubits, so simulation
cost scales with the touched register slice rather than the device size.
Measurements must be terminal per qubit (no gate may act on a qubit after
it is measured) and each qubit may be measured at most once.

Trajectory semantics: per noisy gate, with the channel probability, inject
one uniformly chosen Pauli from {X, Y, Z}; per measured bit, flip with the
readout model probability. Shots with identical injected-error patterns are
grouped and share one statevector evaluation, which leaves the sampled law
unchanged.
"""
from __future__ import annotations

import numpy as np

from . import _kernels
from .circuit import Circuit
from .errors import TooWide
from .noise import CompositeNoiseModel
from .outcomes import Counts, Distribution
from .rng import generator

_STREAM_ERRORS = 0
_STREAM_OUTCOMES = 1
_STREAM_READOUT = 2
_STREAM_MULTINOMIAL = 4

_PAULI_MATS = {
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
}
_H_MAT = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
_CNOT_MAT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


class _Compiled:
    """Circuit lowered onto its active qubits."""

    def __init__(self, circuit: Circuit):
        actives = circuit.active_qubits()
        self.local = {q: i for i, q in enumerate(actives)}
        self.n = len(actives)
        self.ops: list[tuple[str, tuple[int, ...], tuple[int, ...]]] = []
        measured: dict[int, int] = {}  # clbit -> local qubit
        measured_orig: dict[int, int] = {}
        done: set[int] = set()
        for g in circuit.gates:
            for q in g.qubits:
                if q in done:
                    raise ValueError(
                        f"gate on qubit {q} after its measurement is unsupported"
                    )
            if g.name == "measure":
                measured[g.clbit] = self.local[g.qubits[0]]
                measured_orig[g.clbit] = g.qubits[0]
                done.add(g.qubits[0])
            self.ops.append((g.name, tuple(self.local[q] for q in g.qubits), g.qubits))
        self.clbits = sorted(measured)
        self.measured_locals = [measured[c] for c in self.clbits]
        self.measured_qubits = [measured_orig[c] for c in self.clbits]
        self.num_bits = len(self.clbits)

    def stride(self, local_qubit: int) -> int:
        return 1 << (self.n - 1 - local_qubit)


def _run_statevector(comp: _Compiled, fixups=None, kernels=None) -> np.ndarray:
    """Apply the compiled ops (plus optional per-op Pauli injections)."""
    k = kernels or _kernels.ACTIVE
    psi = np.zeros(1 << comp.n, dtype=complex)
    psi[0] = 1.0
    pauli_fns = {1: k.x, 2: k.y, 3: k.z}
    for i, (name, locs, _) in enumerate(comp.ops):
        if name == "h":
            k.h(psi, comp.stride(locs[0]))
        elif name == "x":
            k.x(psi, comp.stride(locs[0]))
        elif name == "cnot":
            k.cnot(psi, comp.stride(locs[0]), comp.stride(locs[1]))
        # "id" and "measure" leave the state untouched
        if fixups is not None:
            for local_q, code in fixups.get(i, ()):
                pauli_fns[code](psi, comp.stride(local_q))
    norm = np.linalg.norm(psi)
    assert abs(norm - 1.0) < 1e-10, f"statevector norm drifted to {norm}"
    return psi


def _measured_marginal(probs: np.ndarray, comp: _Compiled) -> np.ndarray:
    """Marginal over measured qubits, flattened in classical-bit order."""
    if comp.num_bits == 0:
        return np.array([probs.sum()])
    t = probs.reshape([2] * comp.n)
    keep = comp.measured_locals
    drop = tuple(a for a in range(comp.n) if a not in keep)
    if drop:
        t = t.sum(axis=drop)
    order = [sorted(keep).index(a) for a in keep]
    return t.transpose(order).reshape(-1)


def _to_distribution(vec: np.ndarray, num_bits: int, floor: float = 1e-15) -> Distribution:
    probs = {
        format(i, f"0{num_bits}b") if num_bits else "": float(p)
        for i, p in enumerate(vec)
        if p > floor
    }
    return Distribution(probs, num_bits=num_bits)


def simulate_ideal(circuit: Circuit, max_qubits: int = 24) -> Distribution:
    """Exact measurement distribution of the noiseless circuit."""
    comp = _Compiled(circuit)
    if comp.n > max_qubits:
        raise TooWide(f"{comp.n} active qubits exceeds the {max_qubits}-qubit guard")
    psi = _run_statevector(comp)
    return _to_distribution(_measured_marginal(np.abs(psi) ** 2, comp), comp.num_bits)


# -- exact noisy simulation (density matrix) ---------------------------------

def _apply_axes(t: np.ndarray, mat: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    """Multiply `mat` onto the given tensor axes (collapsed in order)."""
    rest = [a for a in range(t.ndim) if a not in axes]
    t = t.transpose(list(axes) + rest)
    shape = t.shape
    dim = mat.shape[0]
    t = (mat @ t.reshape(dim, -1)).reshape(shape)
    inv = np.argsort(list(axes) + rest)
    return t.transpose(inv)


def _dm_apply_unitary(rho: np.ndarray, mat: np.ndarray, locs: tuple[int, ...], n: int):
    rho = _apply_axes(rho, mat, locs)
    return _apply_axes(rho, mat.conj(), tuple(a + n for a in locs))


def _dm_depolarize(rho: np.ndarray, local_q: int, p: float, n: int) -> np.ndarray:
    if p == 0.0:
        return rho
    mix = sum(
        _dm_apply_unitary(rho, _PAULI_MATS[code], (local_q,), n) for code in (1, 2, 3)
    )
    return (1.0 - p) * rho + (p / 3.0) * mix


def simulate_noisy_exact(
    circuit: Circuit, model: CompositeNoiseModel, max_qubits: int = 8
) -> Distribution:
    """Channel-averaged outcome distribution under the composite model.

    Density-matrix evolution: each gate is followed by its depolarizing
    channel, and the readout channel acts as a per-bit stochastic matrix on
    the classical outcome distribution.
    """
    comp = _Compiled(circuit)
    if comp.n > max_qubits:
        raise TooWide(f"{comp.n} active qubits exceeds the {max_qubits}-qubit guard")
    rho = np.zeros([2] * (2 * comp.n), dtype=complex)
    rho[(0,) * (2 * comp.n)] = 1.0
    for name, locs, origs in comp.ops:
        if name == "h":
            rho = _dm_apply_unitary(rho, _H_MAT, locs, comp.n)
            rho = _dm_depolarize(rho, locs[0], model.h_for(origs[0]), comp.n)
        elif name == "x":
            rho = _dm_apply_unitary(rho, _PAULI_MATS[1], locs, comp.n)
            rho = _dm_depolarize(rho, locs[0], model.x_for(origs[0]), comp.n)
        elif name == "cnot":
            rho = _dm_apply_unitary(rho, _CNOT_MAT, locs, comp.n)
            if model.cnot_dp_on:
                p = model.cnot_for(*origs)
                rho = _dm_depolarize(rho, locs[0], p, comp.n)
                rho = _dm_depolarize(rho, locs[1], p, comp.n)
    diag = np.real(np.einsum("ii->i", rho.reshape(1 << comp.n, 1 << comp.n)))
    vec = _measured_marginal(diag, comp)
    if model.readout_on and comp.num_bits:
        vec = vec.reshape([2] * comp.num_bits)
        for bit, q in enumerate(comp.measured_qubits):
            ro = model.readout_for(q)
            stoch = np.array([[1.0 - ro.p0, ro.p1], [ro.p0, 1.0 - ro.p1]])
            vec = _apply_axes(vec, stoch, (bit,))
        vec = vec.reshape(-1)
    return _to_distribution(vec, comp.num_bits)


# -- Monte Carlo trajectory sampling ------------------------------------------

class TrajectorySampler:
    """Reusable sampler for one (circuit, model) pair.

    Outcome distributions for distinct injected-error patterns are cached,
    so repeated sampling (e.g. across evaluation resamples) only pays for
    statevector runs on patterns not yet seen.
    """

    def __init__(self, circuit: Circuit, model: CompositeNoiseModel,
                 max_qubits: int = 24, kernels=None):
        self._comp = _Compiled(circuit)
        if self._comp.n > max_qubits:
            raise TooWide(
                f"{self._comp.n} active qubits exceeds the {max_qubits}-qubit guard"
            )
        self._kernels = kernels
        sites: list[tuple[int, int, float]] = []  # (op index, local qubit, prob)
        for i, (name, locs, origs) in enumerate(self._comp.ops):
            if name == "h":
                p = model.h_for(origs[0])
                if p > 0.0:
                    sites.append((i, locs[0], p))
            elif name == "x":
                p = model.x_for(origs[0])
                if p > 0.0:
                    sites.append((i, locs[0], p))
            elif name == "cnot" and model.cnot_dp_on:
                p = model.cnot_for(*origs)
                if p > 0.0:
                    sites.append((i, locs[0], p))
                    sites.append((i, locs[1], p))
        self._sites = sites
        self._readout_on = model.readout_on and self._comp.num_bits > 0
        if self._readout_on:
            ros = [model.readout_for(q) for q in self._comp.measured_qubits]
            self._p0 = np.array([r.p0 for r in ros])
            self._p1 = np.array([r.p1 for r in ros])
        self._cache: dict[bytes, tuple[np.ndarray, np.ndarray]] = {}

    @property
    def num_bits(self) -> int:
        return self._comp.num_bits

    def _pattern_probs(self, row: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        key = row.tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        fixups: dict[int, list[tuple[int, int]]] = {}
        for (op_i, local_q, _), code in zip(self._sites, row):
            if code:
                fixups.setdefault(op_i, []).append((local_q, int(code)))
        psi = _run_statevector(self._comp, fixups, self._kernels)
        vec = _measured_marginal(np.abs(psi) ** 2, self._comp)
        idx = np.flatnonzero(vec > 1e-16).astype(np.int64)
        entry = (idx, vec[idx])
        self._cache[key] = entry
        return entry

    def _sample_arrays(self, shots: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-shot (pre-readout, observed) outcome indices."""
        if shots == 0:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty
        rng_err = generator(seed, _STREAM_ERRORS)
        if self._sites:
            cols = []
            for _, _, p in self._sites:
                u = rng_err.random(shots)
                picks = rng_err.integers(1, 4, size=shots, dtype=np.uint8)
                cols.append(np.where(u < p, picks, np.uint8(0)))
            codes = np.column_stack(cols)
            patterns, pattern_counts = np.unique(codes, axis=0, return_counts=True)
        else:
            patterns = np.zeros((1, 0), dtype=np.uint8)
            pattern_counts = np.array([shots])
        rng_out = generator(seed, _STREAM_OUTCOMES)
        chunks = []
        for row, group_shots in zip(patterns, pattern_counts):
            idx, p = self._pattern_probs(row)
            draws = rng_out.multinomial(int(group_shots), p / p.sum())
            chunks.append(np.repeat(idx, draws))
        pre = np.concatenate(chunks)
        obs = pre
        m = self._comp.num_bits
        if self._readout_on:
            rng_ro = generator(seed, _STREAM_READOUT)
            flips = np.zeros(shots, dtype=np.int64)
            for bit in range(m):
                pos = m - 1 - bit
                vals = (pre >> pos) & 1
                p_flip = np.where(vals == 1, self._p1[bit], self._p0[bit])
                flips |= (rng_ro.random(shots) < p_flip).astype(np.int64) << pos
            obs = pre ^ flips
        return pre, obs

    def sample(self, shots: int, seed: int) -> Counts:
        if shots == 0:
            return Counts({}, 0)
        _, obs = self._sample_arrays(shots, seed)
        return counts_from_indices(obs, self._comp.num_bits, shots)


def counts_from_indices(indices: np.ndarray, num_bits: int, shots: int) -> Counts:
    values, reps = np.unique(indices, return_counts=True)
    fmt = f"0{num_bits}b"
    return Counts(
        {format(int(v), fmt) if num_bits else "": int(c) for v, c in zip(values, reps)},
        shots,
    )


def simulate_noisy_sampled(
    circuit: Circuit, model: CompositeNoiseModel, shots: int, seed: int
) -> Counts:
    """Monte Carlo trajectory counts; deterministic for a fixed seed."""
    return TrajectorySampler(circuit, model).sample(shots, seed)


def sample_from_distribution(dist: Distribution, shots: int, seed: int) -> Counts:
    """Multinomial draw from a distribution, deterministic per seed."""
    if shots == 0:
        return Counts({}, 0)
    keys = sorted(dist.probs)
    pvals = np.clip(np.array([dist.probs[k] for k in keys], dtype=float), 0.0, None)
    rng = generator(seed, _STREAM_MULTINOMIAL)
    draws = rng.multinomial(shots, pvals / pvals.sum())
    return Counts({k: int(c) for k, c in zip(keys, draws) if c}, shots)
