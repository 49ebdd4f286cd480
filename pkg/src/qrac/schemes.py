"""Quantum random access codings, their evaluation, and the Nayak bound."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._tolerances import DERIVED_TOL
from .core import (
    BinaryPovm,
    DensityMatrix,
    DimensionError,
    PureState,
    QuantumError,
    ket,
    tensor,
)

__all__ = [
    "QracScheme",
    "EvaluationReport",
    "bitstrings",
    "encode_ambainis2",
    "encode_chuang3",
    "encode_hinry7",
    "chuang3_povms",
    "ambainis2_povms",
    "hinry7_povms",
    "HINRY7_ALPHA",
    "HINRY7_CLOSED_FORM",
    "CHUANG3_P",
    "AMBAINIS2_P",
    "standard_scheme",
    "evaluate_scheme",
    "cell_probabilities",
    "binary_entropy",
    "nayak_bound",
    "STANDARD_SCHEMES",
]

AMBAINIS2_P = math.cos(math.pi / 8) ** 2
CHUANG3_P = 0.5 + math.sqrt(3) / 6
HINRY7_ALPHA = 6 / (7 + math.sqrt(3))
# bit 7 is the binding cell: (1 - alpha) + alpha * 2cs with 2cs = 1/3
HINRY7_CLOSED_FORM = (9 + 2 * math.sqrt(3)) / 23


def bitstrings(n: int) -> list[str]:
    """All n-bit strings in lexicographic order."""
    return ["".join(b) for b in itertools.product("01", repeat=n)]


@dataclass(frozen=True, eq=False)
class QracScheme:
    """An (n, m) coding: 2^n encoding states and n binary decoders on m qubits.

    ``states`` maps each bit string ``x`` (first character is bit 1) to its
    encoding.  ``povms[i]`` decodes character ``x[i]``.
    """

    n: int
    m: int
    states: dict[str, DensityMatrix]
    povms: tuple[BinaryPovm, ...]
    label: str = ""

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise QuantumError(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")
        dim = 2**self.m
        states = {}
        for x, rho in self.states.items():
            if isinstance(rho, PureState):
                rho = rho.density()
            elif not isinstance(rho, DensityMatrix):
                rho = DensityMatrix(rho)
            states[x] = rho
        expected = bitstrings(self.n)
        if sorted(states) != expected:
            raise QuantumError(f"expected states for all {2**self.n} {self.n}-bit strings")
        for x in expected:
            if states[x].dim != dim:
                raise DimensionError(f"state {x} has dim {states[x].dim}, expected {dim}")
        povms = tuple(self.povms)
        if len(povms) != self.n:
            raise QuantumError(f"expected {self.n} POVMs, got {len(povms)}")
        for i, p in enumerate(povms):
            if p.dim != dim:
                raise DimensionError(f"POVM {i + 1} has dim {p.dim}, expected {dim}")
        object.__setattr__(self, "states", {x: states[x] for x in expected})
        object.__setattr__(self, "povms", povms)

    @property
    def dim(self) -> int:
        return 2**self.m

    @property
    def keys(self) -> list[str]:
        return list(self.states)

    def state_stack(self) -> np.ndarray:
        return np.array([rho.matrix for rho in self.states.values()])


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    """Success probability table of a scheme.

    ``per_cell[k, i]`` is the probability that decoder ``i`` returns bit
    ``i`` of ``keys[k]`` on that string's encoding.
    """

    keys: tuple[str, ...]
    per_cell: np.ndarray
    worst_case_p: float = field(init=False)
    average_p: float = field(init=False)
    argmin_cell: tuple[str, int] = field(init=False)

    def __post_init__(self):
        table = np.asarray(self.per_cell, dtype=float)
        table.setflags(write=False)
        object.__setattr__(self, "per_cell", table)
        k, i = np.unravel_index(int(np.argmin(table)), table.shape)
        object.__setattr__(self, "worst_case_p", float(table[k, i]))
        object.__setattr__(self, "average_p", float(np.mean(table)))
        object.__setattr__(self, "argmin_cell", (self.keys[k], int(i)))

    def cell(self, x: str, i: int) -> float:
        return float(self.per_cell[self.keys.index(x), i])

    def per_bit_worst(self) -> np.ndarray:
        return self.per_cell.min(axis=0)

    def to_dict(self, digits: int = 9, table: bool = False) -> dict:
        fmt = lambda v: float(f"{v:.{digits}g}")  # noqa: E731
        out = {
            "worst_case_p": fmt(self.worst_case_p),
            "average_p": fmt(self.average_p),
            "argmin_cell": {"x": self.argmin_cell[0], "bit": self.argmin_cell[1] + 1},
        }
        if table:
            out["per_cell"] = {
                x: [fmt(v) for v in row] for x, row in zip(self.keys, self.per_cell)
            }
        return out


def _clamp(p: np.ndarray) -> np.ndarray:
    p = p.copy()
    p[(p < 0) & (p >= -DERIVED_TOL)] = 0.0
    p[(p > 1) & (p <= 1 + DERIVED_TOL)] = 1.0
    return p


def cell_probabilities(states: np.ndarray, keys, povms) -> np.ndarray:
    """Vectorized ``Tr(E^i_{x_i} rho_x)`` for a stack of states."""
    bits = np.array([[int(c) for c in x] for x in keys], dtype=int)
    e0 = np.array([p.e0 for p in povms])
    e1 = np.array([p.e1 for p in povms])
    p0 = np.einsum("iab,kba->ki", e0, states).real
    p1 = np.einsum("iab,kba->ki", e1, states).real
    return _clamp(np.where(bits == 0, p0, p1))


def evaluate_scheme(scheme: QracScheme) -> EvaluationReport:
    """Exhaustive evaluation over every (x, i) cell."""
    table = cell_probabilities(scheme.state_stack(), scheme.keys, scheme.povms)
    return EvaluationReport(tuple(scheme.keys), table)


def _check_bits(x: str, n: int) -> None:
    if len(x) != n or set(x) - {"0", "1"}:
        raise ValueError(f"expected a {n}-bit string, got {x!r}")


_AMBAINIS2_ANGLE = {"00": 1, "10": 3, "11": 5, "01": 7}


def encode_ambainis2(x: str) -> PureState:
    """cos(t)|0> + sin(t)|1> with t = pi/8, 3pi/8, 5pi/8, 7pi/8 for 00, 10, 11, 01."""
    _check_bits(x, 2)
    t = _AMBAINIS2_ANGLE[x] * math.pi / 8
    return PureState([math.cos(t), math.sin(t)])


_CHUANG3_THETA = math.acos(math.sqrt(CHUANG3_P))
_CHUANG3_PHASE = {"00": 1, "01": -1, "10": 3, "11": -3}


def encode_chuang3(x: str) -> PureState:
    """Three bits into one qubit; Bloch vector ((-1)^x2, (-1)^x3, (-1)^x1)/sqrt(3)."""
    _check_bits(x, 3)
    c, s = math.cos(_CHUANG3_THETA), math.sin(_CHUANG3_THETA)
    phase = np.exp(1j * math.pi * _CHUANG3_PHASE[x[1:]] / 4)
    if x[0] == "0":
        return PureState([c, phase * s])
    return PureState([s, phase * c])


_BELL_EVEN = PureState(np.array([1, 0, 0, 1]) / math.sqrt(2))
_BELL_ODD = PureState(np.array([0, 1, 1, 0]) / math.sqrt(2))


def encode_hinry7(x: str) -> DensityMatrix:
    """alpha * phi(x1x2x3) (x) phi(x4x5x6) + (1 - alpha) * xi(x7)."""
    _check_bits(x, 7)
    product = tensor(encode_chuang3(x[:3]), encode_chuang3(x[3:6])).matrix
    xi = (_BELL_EVEN if x[6] == "0" else _BELL_ODD).projector()
    return DensityMatrix(HINRY7_ALPHA * product + (1 - HINRY7_ALPHA) * xi)


_PLUS = PureState(np.array([1, 1]) / math.sqrt(2))
_PLUS_I = PureState(np.array([1, 1j]) / math.sqrt(2))


def ambainis2_povms() -> tuple[BinaryPovm, BinaryPovm]:
    return BinaryPovm.projective(ket("0")), BinaryPovm.projective(_PLUS)


def chuang3_povms() -> tuple[BinaryPovm, BinaryPovm, BinaryPovm]:
    """z, x and y basis measurements for bits 1, 2, 3."""
    return (
        BinaryPovm.projective(ket("0")),
        BinaryPovm.projective(_PLUS),
        BinaryPovm.projective(_PLUS_I),
    )


def hinry7_povms() -> tuple[BinaryPovm, ...]:
    single = chuang3_povms()
    povms = [p.extend(0, 2) for p in single] + [p.extend(1, 2) for p in single]
    parity_even = ket("00").projector() + ket("11").projector()
    povms.append(BinaryPovm(parity_even))
    return tuple(povms)


def _build(name: str) -> QracScheme:
    if name == "ambainis2":
        states = {x: encode_ambainis2(x) for x in bitstrings(2)}
        return QracScheme(2, 1, states, ambainis2_povms(), label="ambainis2")
    if name == "chuang3":
        states = {x: encode_chuang3(x) for x in bitstrings(3)}
        return QracScheme(3, 1, states, chuang3_povms(), label="chuang3")
    if name == "hinry7":
        states = {x: encode_hinry7(x) for x in bitstrings(7)}
        return QracScheme(7, 2, states, hinry7_povms(), label="hinry7")
    if name == "example3":
        from .cloning import example3_scheme

        return example3_scheme()
    raise KeyError(f"unknown scheme {name!r}; choose from {', '.join(STANDARD_SCHEMES)}")


STANDARD_SCHEMES = ("ambainis2", "chuang3", "hinry7", "example3")


def standard_scheme(name: str) -> QracScheme:
    """Build one of the named codings: ambainis2, chuang3, hinry7, example3."""
    return _build(name)


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p!r}")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def nayak_bound(n: int, p: float) -> float:
    """Lower bound (1 - H(p)) n on the number of qubits of an (n, m, p) coding."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return (1.0 - binary_entropy(p)) * n
