"""Characterization test suites: generation, execution, and accounting.

A full-spatial suite covers every qubit with init/X/XX tests (plus optional
even-length Hadamard sequences) and every coupling with a Bell-state test.
Labels follow the stable grammar `init:q3`, `x:q3`, `xx:q3`, `hseq:q3:len8`,
`bell:q3-q4` and uniquely identify (kind, parameters).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .circuit import Circuit, DeviceTopology, cnot, h, measure, validate, x
from .errors import OddHadamardLength, ParseError
from .noise import PER_ELEMENT, SUBSET_AVERAGE
from .outcomes import Counts, Distribution

KINDS = ("init", "x", "xx", "hseq", "bell")


@dataclass(frozen=True)
class TestKind:
    """One characterization test: kind plus its qubit/coupling parameters."""

    __test__ = False  # not a pytest class despite the name

    kind: str
    qubit: int | None = None
    coupling: tuple[int, int] | None = None
    length: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown test kind {self.kind!r}")
        if self.kind == "bell":
            if self.coupling is None:
                raise ValueError("bell test requires a coupling")
            object.__setattr__(self, "coupling", tuple(self.coupling))
        elif self.qubit is None:
            raise ValueError(f"{self.kind} test requires a qubit")
        if self.kind == "hseq":
            if self.length is None or self.length < 2 or self.length % 2:
                raise OddHadamardLength(
                    f"hadamard sequence length must be even and >= 2, got {self.length}"
                )

    @property
    def label(self) -> str:
        if self.kind == "bell":
            return f"bell:q{self.coupling[0]}-q{self.coupling[1]}"
        if self.kind == "hseq":
            return f"hseq:q{self.qubit}:len{self.length}"
        return f"{self.kind}:q{self.qubit}"

    @classmethod
    def from_label(cls, label: str) -> "TestKind":
        try:
            parts = label.split(":")
            kind = parts[0]
            if kind == "bell":
                a, b = parts[1].split("-")
                return cls("bell", coupling=(int(a[1:]), int(b[1:])))
            if kind == "hseq":
                return cls("hseq", qubit=int(parts[1][1:]), length=int(parts[2][3:]))
            return cls(kind, qubit=int(parts[1][1:]))
        except (IndexError, ValueError) as exc:
            raise ParseError(f"bad test label {label!r}") from exc


def materialize(test: TestKind) -> tuple[Circuit, Distribution]:
    """Build the test circuit and its ideal outcome distribution."""
    if test.kind == "bell":
        j, k = test.coupling
        gates = (h(j), cnot(j, k), measure(j, 0), measure(k, 1))
        circuit = Circuit(max(j, k) + 1, 2, gates, test.label)
        return circuit, Distribution({"00": 0.5, "11": 0.5})
    q = test.qubit
    if test.kind == "init":
        gates, expected = (measure(q, 0),), {"0": 1.0}
    elif test.kind == "x":
        gates, expected = (x(q), measure(q, 0)), {"1": 1.0}
    elif test.kind == "xx":
        gates, expected = (x(q), x(q), measure(q, 0)), {"0": 1.0}
    else:  # hseq: even-length Hadamard train composes to identity
        gates = tuple(h(q) for _ in range(test.length)) + (measure(q, 0),)
        expected = {"0": 1.0}
    return Circuit(q + 1, 1, gates, test.label), Distribution(expected)


@dataclass(frozen=True)
class Characterization:
    """A test circuit paired with its observed counts."""

    kind: TestKind
    circuit: Circuit
    counts: Counts
    expected_ideal: Distribution

    @property
    def label(self) -> str:
        return self.circuit.label


@dataclass(frozen=True)
class SuiteConfig:
    granularity: str = PER_ELEMENT
    subset: tuple[int, ...] | None = None
    hadamard_lengths: tuple[int, ...] = ()
    shots: int = 8192
    seed: int = 0


@dataclass(frozen=True)
class SuitePlan:
    tests: tuple[TestKind, ...]
    shots: int
    seed: int

    def labels(self) -> list[str]:
        return [t.label for t in self.tests]


def build_suite(topo: DeviceTopology, config: SuiteConfig) -> SuitePlan:
    """Plan the characterization suite for a device.

    Full-spatial (and register-average) plans cover every qubit and every
    coupling; subset-average plans restrict to the subset's qubits and the
    couplings internal to it.
    """
    for length in config.hadamard_lengths:
        if length % 2 or length < 2:
            raise OddHadamardLength(f"hadamard length {length} is not even")
    if config.granularity == SUBSET_AVERAGE:
        qubits = sorted(config.subset or ())
        qubit_set = set(qubits)
        edges = sorted(
            e for e in topo.undirected_edges() if e[0] in qubit_set and e[1] in qubit_set
        )
    else:
        qubits = list(range(topo.num_qubits))
        edges = sorted(topo.undirected_edges())
    tests: list[TestKind] = []
    for kind in ("init", "x", "xx"):
        tests.extend(TestKind(kind, qubit=q) for q in qubits)
    for q in qubits:
        tests.extend(
            TestKind("hseq", qubit=q, length=l) for l in config.hadamard_lengths
        )
    tests.extend(TestKind("bell", coupling=e) for e in edges)
    return SuitePlan(tuple(tests), config.shots, config.seed)


def run_suite(plan: SuitePlan, backend) -> list[Characterization]:
    """Execute the plan on a backend; all-or-nothing, in plan order."""
    built = [materialize(t) for t in plan.tests]
    for circuit, _ in built:
        validate(circuit, backend.topology)
    counts_list = backend.run([c for c, _ in built], plan.shots, plan.seed)
    return [
        Characterization(t, circuit, counts, expected)
        for t, (circuit, expected), counts in zip(plan.tests, built, counts_list)
    ]


@dataclass(frozen=True)
class ExperimentBudget:
    """Census of a plan next to the closed-form shot formula N_s(2q+2c+1).

    The census (num_circuits x shots_per_circuit) is ground truth; the
    formula value is reported side-by-side so any discrepancy between the
    two accountings stays visible.
    """

    num_circuits: int
    shots_per_circuit: int
    total_shots: int
    num_qubits_covered: int
    num_couplings_covered: int
    formula_shots: int


def count_experiments(plan: SuitePlan) -> ExperimentBudget:
    q = len({t.qubit for t in plan.tests if t.kind == "init"})
    c = len({t.coupling for t in plan.tests if t.kind == "bell"})
    return ExperimentBudget(
        num_circuits=len(plan.tests),
        shots_per_circuit=plan.shots,
        total_shots=plan.shots * len(plan.tests),
        num_qubits_covered=q,
        num_couplings_covered=c,
        formula_shots=plan.shots * (2 * q + 2 * c + 1),
    )


# -- archive io ---------------------------------------------------------------

def archive_dict(
    plan: SuitePlan,
    chars: list[Characterization],
    window: str = "",
    meta: dict | None = None,
) -> dict:
    return {
        "meta": dict(meta or {}),
        "window": window,
        "shots": plan.shots,
        "seed": plan.seed,
        "entries": [
            {"label": ch.label, "shots": ch.counts.shots, "counts": dict(ch.counts.counts)}
            for ch in chars
        ],
    }


def write_archive(path: str | Path, data: dict) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True))


def read_archive(path: str | Path) -> tuple[dict, list[Characterization]]:
    """Load an archive back into characterization records (lossless)."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"archive {path} is not valid JSON: {exc}") from exc
    if "entries" not in data:
        raise ParseError(f"archive {path} lacks an 'entries' list")
    chars = []
    for entry in data["entries"]:
        try:
            label = entry["label"]
            counts = Counts(entry["counts"], entry["shots"])
        except (KeyError, ValueError) as exc:
            raise ParseError(f"bad archive entry {entry!r}: {exc}") from exc
        kind = TestKind.from_label(label)
        circuit, expected = materialize(kind)
        chars.append(Characterization(kind, circuit, counts, expected))
    return data, chars


def archive_hash(path: str | Path) -> str:
    """Provenance tag: sha256 of the archive's canonical content.

    The meta block (timestamps etc.) is excluded so logically identical
    archives hash identically.
    """
    data = json.loads(Path(path).read_text())
    data.pop("meta", None)
    canonical = json.dumps(data, sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]
