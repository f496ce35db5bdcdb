"""Noise channels and the composite, spatially-resolved device model.

Channel conventions: a depolarizing channel with parameter p applies one of
{X, Y, Z} with probability p/3 each, after the ideal gate; readout error is
a per-bit stochastic channel [[1-p0, p1], [p0, 1-p1]] acting on the
post-measurement classical bit string. A cnot is followed by two identical,
independent single-qubit depolarizing channels (one per operand), not a
two-qubit depolarizer.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .circuit import DeviceTopology
from .errors import ArityMismatch, MissingCoverage, OutOfRange
from .outcomes import Distribution

PER_ELEMENT = "per_element"
REGISTER_AVERAGE = "register_average"
SUBSET_AVERAGE = "subset_average"
GRANULARITIES = (PER_ELEMENT, REGISTER_AVERAGE, SUBSET_AVERAGE)

# The model-family ablations: (readout mode, gate depolarizing on).
VARIANTS = {
    "noiseless": ("off", False),
    "sro": ("sro", False),
    "aro": ("aro", False),
    "dp": ("off", True),
    "sro+dp": ("sro", True),
    "aro+dp": ("aro", True),
}


def _check_prob(value: float, name: str) -> float:
    if not (0.0 <= value <= 1.0):
        raise OutOfRange(f"{name}={value} is not a probability")
    return float(value)


@dataclass(frozen=True)
class ReadoutModel:
    """Bit-flip probabilities p0 (reading out 0) and p1 (reading out 1).

    The symmetric model (SRO) is the p0 == p1 special case.
    """

    p0: float
    p1: float

    def __post_init__(self):
        _check_prob(self.p0, "p0")
        _check_prob(self.p1, "p1")

    @classmethod
    def symmetric(cls, p_sro: float) -> "ReadoutModel":
        return cls(p_sro, p_sro)

    @classmethod
    def ideal(cls) -> "ReadoutModel":
        return cls(0.0, 0.0)

    @property
    def is_symmetric(self) -> bool:
        return self.p0 == self.p1


def predicted_x_test_frequencies(p0: float, p1: float, p_x: float) -> tuple[float, float]:
    """Closed-form frequencies of observing 0 in the X and XX test circuits.

    Single X gate (ideal outcome 1) followed by asymmetric readout, and two
    X gates (ideal outcome 0), each gate carrying a depolarizing channel
    with parameter p_x.
    """
    _check_prob(p0, "p0")
    _check_prob(p1, "p1")
    _check_prob(p_x, "p_x")
    q = 2.0 * p_x / 3.0
    g_x_0 = q * (1.0 - p0) + p1 * (1.0 - q)
    g_xx_0 = (1.0 - p0) * ((1.0 - q) ** 2 + q ** 2) + p1 * (2.0 * q * (1.0 - q))
    return g_x_0, g_xx_0


def bell_frequencies(p_cnot: float) -> Distribution:
    """Outcome frequencies of the noisy Bell-state test with ideal readout.

    Each qubit of the cnot carries an independent depolarizing channel with
    the same parameter.
    """
    _check_prob(p_cnot, "p_cnot")
    same = 0.5 - (2.0 / 3.0) * p_cnot + (4.0 / 9.0) * p_cnot ** 2
    diff = (2.0 / 3.0) * p_cnot - (4.0 / 9.0) * p_cnot ** 2
    return Distribution({"00": same, "01": diff, "10": diff, "11": same})


def apply_readout_to_distribution(
    dist: Distribution, readouts: list[ReadoutModel]
) -> Distribution:
    """Push a distribution through per-bit readout-error channels.

    readouts[i] acts on classical bit i (the i-th character of each key).
    """
    if dist.num_bits != len(readouts):
        raise ArityMismatch(
            f"{dist.num_bits}-bit distribution with {len(readouts)} readout models"
        )
    probs = dict(dist.probs)
    for bit, model in enumerate(readouts):
        updated: dict[str, float] = {}
        for key, p in probs.items():
            flip = model.p1 if key[bit] == "1" else model.p0
            flipped = key[:bit] + ("0" if key[bit] == "1" else "1") + key[bit + 1:]
            updated[key] = updated.get(key, 0.0) + p * (1.0 - flip)
            updated[flipped] = updated.get(flipped, 0.0) + p * flip
        probs = updated
    return Distribution(probs, num_bits=dist.num_bits)


def _edge(a: int, b: int) -> tuple[int, int]:
    return (min(a, b), max(a, b))


@dataclass(frozen=True)
class CompositeNoiseModel:
    """Per-element readout and depolarizing parameters plus feature flags.

    Averaged granularities carry their broadcast constants in the avg_*
    fields; per-element models use the explicit maps. readout_on and
    cnot_dp_on encode the model-family ablations (noiseless, SRO, ARO, DP,
    SRO+DP, ARO+DP). The x/h gate channels apply whenever their entries are
    nonzero; variant fitting only populates them for the +DP families.
    """

    granularity: str = PER_ELEMENT
    subset: tuple[int, ...] | None = None
    readout: dict[int, ReadoutModel] = field(default_factory=dict)
    x_gate: dict[int, float] = field(default_factory=dict)
    h_gate: dict[int, float] = field(default_factory=dict)
    cnot: dict[tuple[int, int], float] = field(default_factory=dict)
    avg_readout: ReadoutModel | None = None
    avg_x: float | None = None
    avg_h: float | None = None
    avg_cnot: float | None = None
    readout_on: bool = True
    cnot_dp_on: bool = True
    window: str = ""
    provenance: str = ""

    def __post_init__(self):
        if self.granularity not in GRANULARITIES:
            raise ValueError(f"unknown granularity {self.granularity!r}")
        if self.granularity == SUBSET_AVERAGE and self.subset is None:
            raise ValueError("subset_average requires a subset")
        object.__setattr__(self, "readout", dict(self.readout))
        object.__setattr__(self, "x_gate", dict(self.x_gate))
        object.__setattr__(self, "h_gate", dict(self.h_gate))
        object.__setattr__(
            self, "cnot", {_edge(*k): v for k, v in dict(self.cnot).items()}
        )
        for m in {*self.x_gate.values(), *self.h_gate.values(), *self.cnot.values()}:
            _check_prob(m, "depolarizing parameter")

    @classmethod
    def noiseless(cls) -> "CompositeNoiseModel":
        return cls(
            granularity=REGISTER_AVERAGE,
            avg_readout=ReadoutModel.ideal(),
            avg_x=0.0,
            avg_h=0.0,
            avg_cnot=0.0,
            readout_on=False,
            cnot_dp_on=False,
        )

    def readout_for(self, qubit: int) -> ReadoutModel:
        model = self.readout.get(qubit, self.avg_readout)
        if model is None:
            raise MissingCoverage(f"no readout model for qubit {qubit}", [f"q{qubit}"])
        return model

    def x_for(self, qubit: int) -> float:
        value = self.x_gate.get(qubit, self.avg_x)
        if value is None:
            return 0.0
        return value

    def h_for(self, qubit: int) -> float:
        value = self.h_gate.get(qubit, self.avg_h)
        if value is None:
            return 0.0
        return value

    def cnot_for(self, a: int, b: int) -> float:
        value = self.cnot.get(_edge(a, b), self.avg_cnot)
        if value is None:
            raise MissingCoverage(
                f"no cnot parameter for coupling ({a},{b})", [f"q{a}-q{b}"]
            )
        return value

    def num_parameters(self) -> int:
        """Distinct fitted scalars in the active channels (for tie-breaks)."""
        n = 0
        if self.readout_on:
            if self.readout:
                n += sum(1 if m.is_symmetric else 2 for m in self.readout.values())
            elif self.avg_readout is not None:
                n += 1 if self.avg_readout.is_symmetric else 2
        if self.cnot_dp_on:
            n += len(self.cnot) if self.cnot else (self.avg_cnot is not None)
            n += sum(1 for v in self.x_gate.values() if v > 0.0) or (
                1 if (self.avg_x or 0.0) > 0.0 else 0
            )
            n += sum(1 for v in self.h_gate.values() if v > 0.0) or (
                1 if (self.avg_h or 0.0) > 0.0 else 0
            )
        return int(n)

    def to_json_dict(self) -> dict:
        data: dict = {
            "granularity": self.granularity,
            "flags": {"readout_on": self.readout_on, "cnot_dp_on": self.cnot_dp_on},
            "readout": {
                str(q): {"p0": m.p0, "p1": m.p1} for q, m in sorted(self.readout.items())
            },
            "x_gate": {str(q): {"p_x": v} for q, v in sorted(self.x_gate.items())},
            "h_gate": {str(q): {"p_h": v} for q, v in sorted(self.h_gate.items())},
            "cnot": {
                f"{a}-{b}": {"p_cnot": v} for (a, b), v in sorted(self.cnot.items())
            },
            "window": self.window,
            "provenance": self.provenance,
        }
        if self.subset is not None:
            data["subset"] = list(self.subset)
        if self.avg_readout is not None:
            data["average"] = {
                "p0": self.avg_readout.p0,
                "p1": self.avg_readout.p1,
                "p_x": self.avg_x,
                "p_h": self.avg_h,
                "p_cnot": self.avg_cnot,
            }
        return data

    @classmethod
    def from_json_dict(cls, data: dict) -> "CompositeNoiseModel":
        avg = data.get("average")
        return cls(
            granularity=data["granularity"],
            subset=tuple(data["subset"]) if "subset" in data else None,
            readout={
                int(q): ReadoutModel(m["p0"], m["p1"])
                for q, m in data.get("readout", {}).items()
            },
            x_gate={int(q): m["p_x"] for q, m in data.get("x_gate", {}).items()},
            h_gate={int(q): m["p_h"] for q, m in data.get("h_gate", {}).items()},
            cnot={
                tuple(map(int, k.split("-"))): m["p_cnot"]
                for k, m in data.get("cnot", {}).items()
            },
            avg_readout=ReadoutModel(avg["p0"], avg["p1"]) if avg else None,
            avg_x=avg.get("p_x") if avg else None,
            avg_h=avg.get("p_h") if avg else None,
            avg_cnot=avg.get("p_cnot") if avg else None,
            readout_on=data["flags"]["readout_on"],
            cnot_dp_on=data["flags"]["cnot_dp_on"],
            window=data.get("window", ""),
            provenance=data.get("provenance", ""),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "CompositeNoiseModel":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def expand_granularity(
    model: CompositeNoiseModel, topo: DeviceTopology
) -> CompositeNoiseModel:
    """Broadcast an averaged model to constant per-element maps.

    Per-element models pass through unchanged (idempotent).
    """
    if model.granularity == PER_ELEMENT:
        return model
    readout = model.avg_readout or ReadoutModel.ideal()
    return replace(
        model,
        granularity=PER_ELEMENT,
        subset=None,
        readout={q: readout for q in range(topo.num_qubits)},
        x_gate={q: model.avg_x or 0.0 for q in range(topo.num_qubits)},
        h_gate={q: model.avg_h or 0.0 for q in range(topo.num_qubits)},
        cnot={edge: model.avg_cnot or 0.0 for edge in sorted(topo.undirected_edges())},
        avg_readout=None,
        avg_x=None,
        avg_h=None,
        avg_cnot=None,
    )
