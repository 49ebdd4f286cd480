"""Universal 1 -> 2 qubit cloning and the four-bit clone-and-guess coding.

The cloner is the Buzek-Hillery isometry from the input qubit into three
qubits (clone A, clone B, machine); tracing out the machine leaves the
joint state of the two clones.  The clone-and-guess decoder measures one
clone to guess which half of the four bits was sent, then either reads the
other clone with a three-into-one decoder or flips a fair coin.  Each such
procedure is pulled back through the cloner into a single binary POVM on
the transmitted qubit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import I2, BinaryPovm, DensityMatrix, _as_matrix, ket
from .schemes import QracScheme, bitstrings, chuang3_povms, encode_chuang3, evaluate_scheme

__all__ = [
    "CLONER_ISOMETRY",
    "buzek_hillery_clone",
    "clone_adjoint",
    "example3_effective_povms",
    "example3_scheme",
    "Example3Summary",
    "example3_summary",
]


def _cloner_isometry() -> np.ndarray:
    a, b = math.sqrt(2 / 3), math.sqrt(1 / 6)
    k = lambda s: ket(s).amplitudes  # noqa: E731
    # qubit order: clone A, clone B, machine
    v0 = a * k("000") + b * (k("011") + k("101"))
    v1 = a * k("111") + b * (k("010") + k("100"))
    v = np.stack([v0, v1], axis=1)
    v.setflags(write=False)
    return v


CLONER_ISOMETRY = _cloner_isometry()


def buzek_hillery_clone(rho) -> DensityMatrix:
    """Joint two-clone state (4 x 4) produced from a single-qubit state."""
    m = _as_matrix(rho)
    v = CLONER_ISOMETRY
    out = (v @ m @ v.conj().T).reshape(4, 2, 4, 2)
    return DensityMatrix(np.einsum("ajbj->ab", out))


def clone_adjoint(joint_effect: np.ndarray) -> np.ndarray:
    """Heisenberg-picture cloner: V^dag (J (x) I_machine) V."""
    v = CLONER_ISOMETRY
    return v.conj().T @ np.kron(joint_effect, I2) @ v


def _joint_effect(target: int) -> np.ndarray:
    """Effect on the clone pair for outcome 0 when decoding bit ``target`` (0-based)."""
    select, second, third = chuang3_povms()
    read = (second, third)[target % 2]
    half = target // 2  # 0: bits 1-2 live behind selector outcome 0, 1: bits 3-4 behind outcome 1
    keep = select.effect(half)
    guess = select.effect(1 - half)
    return np.kron(keep, read.e0) + np.kron(guess, 0.5 * I2)


def example3_effective_povms() -> tuple[BinaryPovm, ...]:
    """Single-qubit POVMs equivalent to clone-and-guess decoding of bits 1..4."""
    return tuple(BinaryPovm(clone_adjoint(_joint_effect(t)), tol=1e-12) for t in range(4))


def _example3_state(x: str) -> DensityMatrix:
    first = encode_chuang3("0" + x[0:2]).projector()
    second = encode_chuang3("1" + x[2:4]).projector()
    return DensityMatrix(0.5 * first + 0.5 * second)


def example3_scheme() -> QracScheme:
    states = {x: _example3_state(x) for x in bitstrings(4)}
    return QracScheme(4, 1, states, example3_effective_povms(), label="example3")


@dataclass(frozen=True)
class Example3Summary:
    """p_branch: worst success when the guessed half was actually sent.

    naive_p is the argument ``(p_branch + 1/2) / 2`` that treats the other
    branch as a fair coin; true_p is the exhaustive worst case.
    """

    p_branch: float
    naive_p: float
    true_p: float
    argmin_cell: tuple[str, int]


def example3_summary() -> Example3Summary:
    povms = example3_effective_povms()
    p_branch = 1.0
    for target in range(4):
        lead = "0" if target < 2 else "1"
        for pair in bitstrings(2):
            state = encode_chuang3(lead + pair).projector()
            bit = int(pair[target % 2])
            p = float(np.trace(povms[target].effect(bit) @ state).real)
            p_branch = min(p_branch, p)
    report = evaluate_scheme(example3_scheme())
    return Example3Summary(p_branch, (p_branch + 0.5) / 2, report.worst_case_p, report.argmin_cell)
