"""See-saw search over (n, m) codings.

Alternates two exact maximizations of the (weighted) mean success
probability: Helstrom measurements for fixed encodings, and top
eigenvectors of the score operators for fixed measurements.  A second
stage reweights the (x, i) cells multiplicatively so that the search
leans on the worst cells, since the coding's p is a worst case.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ._tolerances import DEGENERACY_TOL
from .core import BinaryPovm, DensityMatrix, PureState, hermitian_eigh
from .schemes import EvaluationReport, QracScheme, bitstrings, cell_probabilities

__all__ = [
    "SeeSawConfig",
    "TraceRow",
    "SearchResult",
    "TraceCheck",
    "splitmix64_seeds",
    "optimal_povm_for_bit",
    "optimal_state_for_bits",
    "see_saw",
    "ascent_trace_check",
    "MAX_QUBITS",
    "MAX_BITS",
]

log = logging.getLogger(__name__)

MAX_QUBITS = 2
MAX_BITS = 16
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeeSawConfig:
    restarts: int = 32
    max_iters: int = 500
    conv_tol: float = 1e-9
    seed: int = 0
    objective: str = "weighted"
    reweight_rounds: int = 20
    reweight_rate: float = 0.5

    def __post_init__(self):
        for name in ("restarts", "max_iters", "reweight_rounds"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.conv_tol > 0:
            raise ValueError("conv_tol must be positive")
        if self.objective not in ("average", "weighted"):
            raise ValueError(f"objective must be 'average' or 'weighted', got {self.objective!r}")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class TraceRow:
    round: int  # 0 is the unweighted see-saw, 1.. are reweighting rounds
    iteration: int
    phase: str  # "povm" or "state"
    objective: float
    average_p: float
    worst_case_p: float


@dataclass(frozen=True, eq=False)
class SearchResult:
    scheme: QracScheme
    report: EvaluationReport
    trace: list[TraceRow]
    converged: bool
    seed: int
    restart: int
    restart_summary: list[dict] = field(default_factory=list)


@dataclass(frozen=True)
class TraceCheck:
    violations: list[tuple[int, int, float]]

    @property
    def ok(self) -> bool:
        return not self.violations


def splitmix64_seeds(seed: int, count: int) -> list[int]:
    """First ``count`` outputs of the splitmix64 generator started at ``seed``."""
    out = []
    state = seed & _MASK64
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        out.append(z ^ (z >> 31))
    return out


def _bits_matrix(n: int) -> np.ndarray:
    return np.array([[int(c) for c in x] for x in bitstrings(n)], dtype=int)


def _helstrom_e0(states: np.ndarray, bits: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """E0 for every bit at once; ``weights`` has shape (2^n, n)."""
    signs = np.where(bits == 0, 1.0, -1.0) * weights  # (X, n)
    delta = np.einsum("xi,xab->iab", signs, states)
    delta = 0.5 * (delta + np.conj(np.swapaxes(delta, 1, 2)))
    vals, vecs = np.linalg.eigh(delta)
    scale = np.where(vals > DEGENERACY_TOL, 1.0, np.where(vals < -DEGENERACY_TOL, 0.0, 0.5))
    return np.einsum("iaj,ij,ibj->iab", vecs, scale, vecs.conj())


def _top_states(scores: np.ndarray) -> np.ndarray:
    """Top eigenvector projectors of a stack of Hermitian score operators."""
    vals, vecs = np.linalg.eigh(scores)
    top = vecs[..., -1]
    degenerate = np.flatnonzero(vals[:, -1] - vals[:, -2] <= DEGENERACY_TOL)
    for k in degenerate:
        top[k] = hermitian_eigh(scores[k])[1][:, 0]
    return np.einsum("xa,xb->xab", top, top.conj())


def _score_operators(e0: np.ndarray, bits: np.ndarray, weights: np.ndarray) -> np.ndarray:
    dim = e0.shape[-1]
    e1 = np.eye(dim) - e0
    eff = np.where(bits[:, :, None, None] == 0, e0[None], e1[None])  # (X, n, d, d)
    return np.einsum("xi,xiab->xab", weights, eff)


def optimal_povm_for_bit(states, i: int, weights=None) -> BinaryPovm:
    """Helstrom measurement separating {x : x_i = 0} from {x : x_i = 1}.

    ``states`` maps bit strings to states (or is a sequence in
    lexicographic order).  E0 projects onto the positive part of
    ``sum_x w_x (-1)^{x_i} rho_x``; the null space gets weight 1/2.
    """
    mats = _stack(states)
    n = int(round(math.log2(len(mats))))
    bits = _bits_matrix(n)
    w = np.full(len(mats), 1.0 / len(mats)) if weights is None else np.asarray(weights, dtype=float)
    cols = np.zeros((len(mats), n))
    cols[:, i] = w
    return BinaryPovm(_helstrom_e0(mats, bits, cols)[i])


def optimal_state_for_bits(povms, x: str, weights=None) -> PureState:
    """Top eigenvector of ``sum_i w_i E^i_{x_i}``; ties resolved canonically."""
    e0 = np.array([p.e0 for p in povms])
    bits = np.array([[int(c) for c in x]])
    w = np.ones((1, len(povms))) if weights is None else np.asarray(weights, dtype=float)[None]
    score = _score_operators(e0, bits, w)[0]
    vals, vecs = hermitian_eigh(score)
    return PureState(vecs[:, 0])


def _stack(states) -> np.ndarray:
    if isinstance(states, dict):
        states = [states[k] for k in sorted(states)]
    out = []
    for s in states:
        if isinstance(s, PureState):
            out.append(s.projector())
        elif isinstance(s, DensityMatrix):
            out.append(s.matrix)
        else:
            out.append(np.asarray(s, dtype=complex))
    return np.array(out)


def _random_pure_stack(count: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=(count, dim)) + 1j * rng.normal(size=(count, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return np.einsum("xa,xb->xab", v, v.conj())


class _Run:
    """One restart: mutable working arrays plus the best snapshot seen so far."""

    def __init__(self, n, m, cfg, seed, restart):
        self.n, self.m, self.cfg = n, m, cfg
        self.dim = 2**m
        self.keys = bitstrings(n)
        self.bits = _bits_matrix(n)
        rng = np.random.default_rng(seed)
        self.states = _random_pure_stack(2**n, self.dim, rng)
        self.e0 = None
        self.trace: list[TraceRow] = []
        self.best = None
        self.converged = True
        self.seed, self.restart = seed, restart

    def table(self) -> np.ndarray:
        e0 = self.e0
        e1 = np.eye(self.dim) - e0
        p0 = np.einsum("iab,kba->ki", e0, self.states).real
        p1 = np.einsum("iab,kba->ki", e1, self.states).real
        return np.where(self.bits == 0, p0, p1)

    def record(self, rnd, it, phase, weights):
        t = self.table()
        obj = float(np.sum(weights * t))
        worst, avg = float(t.min()), float(t.mean())
        self.trace.append(TraceRow(rnd, it, phase, obj, avg, worst))
        key = (round(worst, 12), round(avg, 12))
        if self.best is None or key > self.best[0]:
            self.best = (key, self.states.copy(), self.e0.copy())
        return obj

    def seesaw(self, rnd, weights):
        prev = -np.inf
        for it in range(self.cfg.max_iters):
            self.e0 = _helstrom_e0(self.states, self.bits, weights)
            self.record(rnd, it, "povm", weights)
            self.states = _top_states(_score_operators(self.e0, self.bits, weights))
            obj = self.record(rnd, it, "state", weights)
            if obj - prev < self.cfg.conv_tol:
                return
            prev = obj
        self.converged = False

    def run(self):
        cells = 2**self.n * self.n
        weights = np.full((2**self.n, self.n), 1.0 / cells)
        self.seesaw(0, weights)
        if self.cfg.objective == "weighted":
            for rnd in range(1, self.cfg.reweight_rounds + 1):
                t = self.table()
                spread = max(float(t.max() - t.min()), 1e-12)
                weights = weights * np.exp(-self.cfg.reweight_rate * (t - t.min()) / spread)
                weights /= weights.sum()
                self.seesaw(rnd, weights)
        return self

    def result(self) -> SearchResult:
        _, states, e0 = self.best
        scheme = QracScheme(
            self.n,
            self.m,
            {x: DensityMatrix(rho, tol=1e-10) for x, rho in zip(self.keys, states)},
            tuple(BinaryPovm(e, tol=1e-10) for e in e0),
            label=f"see-saw n={self.n} m={self.m} seed={self.seed}",
        )
        table = cell_probabilities(scheme.state_stack(), scheme.keys, scheme.povms)
        report = EvaluationReport(tuple(scheme.keys), table)
        return SearchResult(scheme, report, self.trace, self.converged, self.seed, self.restart)


def see_saw(n: int, m: int, config: SeeSawConfig | None = None) -> SearchResult:
    """Best coding found over seeded restarts, ranked by worst case then average.

    Restart seeds are the splitmix64 sequence started at ``config.seed``.
    """
    cfg = config or SeeSawConfig()
    if n < 1 or n > MAX_BITS:
        raise ValueError(f"n must be in 1..{MAX_BITS}, got {n}")
    if m < 1 or m > MAX_QUBITS:
        raise ValueError(f"m must be in 1..{MAX_QUBITS}, got {m}")
    best = None
    summary = []
    for restart, seed in enumerate(splitmix64_seeds(cfg.seed, cfg.restarts)):
        res = _Run(n, m, cfg, seed, restart).run().result()
        summary.append(
            {
                "restart": restart,
                "seed": seed,
                "worst_case_p": res.report.worst_case_p,
                "average_p": res.report.average_p,
                "converged": res.converged,
            }
        )
        key = (round(res.report.worst_case_p, 12), round(res.report.average_p, 12))
        if best is None or key > best[0]:
            best = (key, res)
        log.debug("restart %d: worst %.9f avg %.9f", restart, *key)
    res = best[1]
    return SearchResult(res.scheme, res.report, res.trace, res.converged, res.seed, res.restart, summary)


def ascent_trace_check(result, tol: float = 1e-12) -> TraceCheck:
    """Flag every step where the objective of one round decreased by more than ``tol``.

    Accepts a :class:`SearchResult` or a plain list of :class:`TraceRow`.
    """
    rows = result.trace if isinstance(result, SearchResult) else list(result)
    violations = []
    for prev, cur in zip(rows, rows[1:]):
        if cur.round != prev.round:
            continue
        drop = prev.objective - cur.objective
        if drop > tol:
            violations.append((cur.round, cur.iteration, drop))
    return TraceCheck(violations)
