"""Small dense Hermitian linear algebra for N-level quantum systems.

States, binary POVMs and the Bloch-vector correspondence under the
generalized Gell-Mann basis.  Every object here is immutable after
construction: the wrapped numpy arrays are flagged read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._tolerances import DEGENERACY_TOL, DERIVED_TOL, PSD_TOL, STRUCT_TOL

__all__ = [
    "I2",
    "X",
    "Y",
    "Z",
    "QuantumError",
    "InvalidLevelError",
    "NotAStateError",
    "DimensionError",
    "PureState",
    "DensityMatrix",
    "BinaryPovm",
    "BlochVector",
    "hermitian_eigh",
    "gell_mann_basis",
    "density_to_bloch",
    "bloch_to_density",
    "measure_prob",
    "povm_canonical_form",
    "tensor",
    "partial_trace",
    "ket",
    "random_pure_state",
    "random_binary_povm",
]

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
for _m in (I2, X, Y, Z):
    _m.setflags(write=False)


class QuantumError(ValueError):
    """Base class for violated quantum-object invariants."""


class InvalidLevelError(QuantumError):
    pass


class DimensionError(QuantumError):
    pass


class NotAStateError(QuantumError):
    """Raised when a matrix fails to be a density matrix.

    ``min_eigenvalue`` carries the most negative eigenvalue when positivity
    is what failed, otherwise ``None``.
    """

    def __init__(self, message: str, min_eigenvalue: float | None = None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


def _as_matrix(a) -> np.ndarray:
    if isinstance(a, DensityMatrix):
        return a.matrix
    if isinstance(a, PureState):
        return a.projector()
    return np.asarray(a, dtype=complex)


def _check_square(a: np.ndarray, what: str) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"{what} must be a non-empty square matrix, got shape {a.shape}")


def _hermiticity_residual(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T)))


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # first entry of non-negligible modulus becomes real positive
    idx = int(np.argmax(np.abs(v) > 1e-8))
    z = v[idx]
    if abs(z) > 0:
        v = v * (abs(z) / z)
    return v


def _block_basis(block: np.ndarray) -> np.ndarray:
    """Canonical orthonormal basis of span(block): Gram-Schmidt on P e_0, P e_1, ..."""
    n, k = block.shape
    proj = block @ block.conj().T
    chosen: list[np.ndarray] = []
    for j in range(n):
        v = proj[:, j].copy()
        for _ in range(2):
            for u in chosen:
                v -= (u.conj() @ v) * u
        norm = np.linalg.norm(v)
        if norm > 1e-3:
            chosen.append(_fix_phase(v / norm))
            if len(chosen) == k:
                break
    return np.stack(chosen, axis=1)


def hermitian_eigh(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix with a deterministic basis.

    Eigenvalues are returned in descending order, eigenvectors as columns.
    Eigenvalues within ``DEGENERACY_TOL`` of the first member of their run
    form one block; the basis of a block is obtained by Gram-Schmidt on the
    block projector applied to the computational basis vectors in index
    order.  Each vector's first non-negligible entry is real and positive.
    """
    a = np.asarray(a, dtype=complex)
    _check_square(a, "matrix")
    a = 0.5 * (a + a.conj().T)
    vals, vecs = np.linalg.eigh(a)
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1]
    n = len(vals)
    out = np.empty((n, n), dtype=complex)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and vals[start] - vals[stop] <= DEGENERACY_TOL:
            stop += 1
        if stop - start == 1:
            out[:, start] = _fix_phase(vecs[:, start])
        else:
            out[:, start:stop] = _block_basis(vecs[:, start:stop])
        start = stop
    return vals, out


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit vector in C^N."""

    amplitudes: np.ndarray
    tol: float = field(default=STRUCT_TOL, repr=False, compare=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size < 1:
            raise DimensionError("a pure state needs at least one amplitude")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > self.tol:
            raise NotAStateError(f"amplitudes have squared norm {norm2!r}, expected 1")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def normalized(cls, amplitudes) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(amps / np.linalg.norm(amps))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.projector())

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace N x N matrix."""

    matrix: np.ndarray
    tol: float = field(default=STRUCT_TOL, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        _check_square(m, "density matrix")
        herm = _hermiticity_residual(m)
        if herm > self.tol:
            raise NotAStateError(f"not Hermitian (residual {herm:.3e})")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > self.tol:
            raise NotAStateError(f"trace is {tr.real:.17g}, expected 1")
        m = 0.5 * (m + m.conj().T)
        lo = float(np.linalg.eigvalsh(m)[0])
        if lo < -PSD_TOL:
            raise NotAStateError(f"not positive semidefinite (eigenvalue {lo:.3e})", lo)
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def is_pure(self) -> bool:
        return abs(self.purity() - 1.0) <= DERIVED_TOL

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)[::-1]

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def mixture(cls, weights, states) -> "DensityMatrix":
        total = sum(w * _as_matrix(s) for w, s in zip(weights, states))
        return cls(total)


@dataclass(frozen=True, eq=False)
class BinaryPovm:
    """Two-outcome POVM ``(e0, e1)`` with ``e0 + e1 = I``.

    ``e1`` defaults to ``I - e0``.
    """

    e0: np.ndarray
    e1: np.ndarray | None = None
    tol: float = field(default=STRUCT_TOL, repr=False, compare=False)

    def __post_init__(self):
        e0 = _as_matrix(self.e0)
        _check_square(e0, "e0")
        n = e0.shape[0]
        e1 = np.eye(n) - e0 if self.e1 is None else _as_matrix(self.e1)
        if e1.shape != e0.shape:
            raise DimensionError(f"e0 has shape {e0.shape} but e1 has {e1.shape}")
        for name, e in (("e0", e0), ("e1", e1)):
            herm = _hermiticity_residual(e)
            if herm > self.tol:
                raise QuantumError(f"{name} is not Hermitian (residual {herm:.3e})")
        gap = float(np.max(np.abs(e0 + e1 - np.eye(n))))
        if gap > self.tol:
            raise QuantumError(f"e0 + e1 differs from identity by {gap:.3e}")
        e0 = 0.5 * (e0 + e0.conj().T)
        e1 = 0.5 * (e1 + e1.conj().T)
        ev = np.linalg.eigvalsh(e0)
        if ev[0] < -PSD_TOL or ev[-1] > 1 + PSD_TOL:
            raise QuantumError(f"e0 eigenvalues {ev[0]:.3e}..{ev[-1]:.3e} leave [0, 1]")
        object.__setattr__(self, "e0", _frozen(e0))
        object.__setattr__(self, "e1", _frozen(e1))

    @property
    def dim(self) -> int:
        return self.e0.shape[0]

    def effect(self, outcome: int) -> np.ndarray:
        return self.e0 if outcome == 0 else self.e1

    def is_projective(self, tol: float = DERIVED_TOL) -> bool:
        return bool(np.max(np.abs(self.e0 @ self.e0 - self.e0)) <= tol)

    @classmethod
    def projective(cls, state: PureState) -> "BinaryPovm":
        """``{|s><s|, I - |s><s|}`` for the given state ``s``."""
        return cls(state.projector())

    def extend(self, position: int, num_qubits: int) -> "BinaryPovm":
        """Embed a single-qubit POVM acting on qubit ``position`` of ``num_qubits``."""
        if self.dim != 2:
            raise DimensionError("only single-qubit POVMs can be embedded")
        ops = [I2] * num_qubits
        ops[position] = self.e0
        e0 = ops[0]
        for op in ops[1:]:
            e0 = np.kron(e0, op)
        return BinaryPovm(e0)


@dataclass(frozen=True, eq=False)
class BlochVector:
    """Real coordinates of a state in the generalized Gell-Mann basis."""

    coords: np.ndarray
    level: int

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if self.level < 2:
            raise InvalidLevelError(f"level must be >= 2, got {self.level}")
        if c.size != self.level**2 - 1:
            raise DimensionError(
                f"a level-{self.level} Bloch vector has {self.level**2 - 1} coordinates, got {c.size}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def dot(self, other) -> float:
        other = other.coords if isinstance(other, BlochVector) else np.asarray(other, dtype=float)
        return float(self.coords @ other)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)


@lru_cache(maxsize=None)
def _gell_mann_stack(level: int) -> np.ndarray:
    n = level
    sym, asym, diag = [], [], []
    for j in range(n):
        for k in range(j + 1, n):
            s = np.zeros((n, n), dtype=complex)
            s[j, k] = s[k, j] = 1
            sym.append(s)
            a = np.zeros((n, n), dtype=complex)
            a[j, k] = -1j
            a[k, j] = 1j
            asym.append(a)
    for l in range(1, n):
        d = np.zeros(n)
        d[:l] = 1
        d[l] = -l
        diag.append(np.diag(d * np.sqrt(2.0 / (l * (l + 1)))).astype(complex))
    stack = np.array(sym + asym + diag)
    stack.setflags(write=False)
    return stack


def gell_mann_basis(level: int) -> list[np.ndarray]:
    """Generalized Gell-Mann matrices for SU(level).

    Order: symmetric off-diagonal generators for pairs (j, k), j < k, in
    lexicographic order; then the antisymmetric ones in the same order;
    then the diagonal ones with growing support.  For ``level=2`` this is
    ``[X, Y, Z]``.  All satisfy ``Tr(l_i l_j) = 2 delta_ij``.
    """
    if not isinstance(level, (int, np.integer)) or level < 2:
        raise InvalidLevelError(f"level must be an integer >= 2, got {level!r}")
    return list(_gell_mann_stack(int(level)))


def _level_of(dim: int) -> int:
    if dim < 2:
        raise InvalidLevelError(f"Bloch vectors need dimension >= 2, got {dim}")
    return dim


def density_to_bloch(rho) -> BlochVector:
    """Bloch coordinates ``r_i = Tr(rho l_i)``."""
    m = _as_matrix(rho)
    level = _level_of(m.shape[0])
    coords = np.einsum("kij,ji->k", _gell_mann_stack(level), m).real
    return BlochVector(coords, level)


def bloch_to_density(r) -> DensityMatrix:
    """Inverse of :func:`density_to_bloch`.

    Raises :class:`NotAStateError` when ``I/N + 1/2 sum r_i l_i`` is not
    positive semidefinite; for N > 2 this can happen inside the unit ball.
    """
    if isinstance(r, BlochVector):
        coords, level = r.coords, r.level
    else:
        coords = np.asarray(r, dtype=float).reshape(-1)
        level = int(round(np.sqrt(coords.size + 1)))
        if level**2 - 1 != coords.size:
            raise DimensionError(f"{coords.size} is not N^2 - 1 for any N")
    if level < 2:
        raise InvalidLevelError("Bloch vectors need level >= 2")
    m = np.eye(level, dtype=complex) / level + 0.5 * np.einsum(
        "k,kij->ij", coords, _gell_mann_stack(level)
    )
    lo = float(np.linalg.eigvalsh(m)[0])
    if lo < -PSD_TOL:
        raise NotAStateError(f"Bloch vector maps to a matrix with eigenvalue {lo:.6g}", lo)
    return DensityMatrix(m)


def measure_prob(effect, rho) -> float:
    """Outcome probability ``Tr(effect rho)``.

    Values within ``DERIVED_TOL`` outside [0, 1] are clamped; anything
    further out is returned as is.
    """
    e = _as_matrix(effect)
    m = _as_matrix(rho)
    if e.shape != m.shape:
        raise DimensionError(f"effect is {e.shape}, state is {m.shape}")
    p = float(np.einsum("ij,ji->", e, m).real)
    if -DERIVED_TOL <= p < 0.0:
        return 0.0
    if 1.0 < p <= 1.0 + DERIVED_TOL:
        return 1.0
    return p


def povm_canonical_form(povm: BinaryPovm) -> tuple[np.ndarray, np.ndarray]:
    """Spectral form of ``e0``: weights (descending) and orthonormal columns."""
    return hermitian_eigh(povm.e0)


def tensor(rho_a, rho_b) -> DensityMatrix:
    return DensityMatrix(np.kron(_as_matrix(rho_a), _as_matrix(rho_b)))


def partial_trace(rho, dims: tuple[int, int] | None = None, keep: int = 0) -> DensityMatrix:
    """Reduced state of a bipartite system.

    ``dims`` defaults to two equal factors.  ``keep`` selects the
    subsystem that survives (0 = first, 1 = second).
    """
    m = _as_matrix(rho)
    n = m.shape[0]
    if dims is None:
        a = int(round(np.sqrt(n)))
        dims = (a, a)
    da, db = dims
    if da * db != n:
        raise DimensionError(f"dimension {n} does not factor as {da} x {db}")
    t = m.reshape(da, db, da, db)
    if keep == 0:
        out = np.einsum("ijkj->ik", t)
    elif keep == 1:
        out = np.einsum("jijk->ik", t)
    else:
        raise ValueError(f"keep must be 0 or 1, got {keep}")
    return DensityMatrix(out)


def ket(bits: str) -> PureState:
    """Computational basis state for a bit string, e.g. ``ket("01")``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return PureState(v)


def random_pure_state(dim: int, rng: np.random.Generator) -> PureState:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState.normalized(v)


def random_binary_povm(dim: int, rng: np.random.Generator) -> BinaryPovm:
    """Random unitary conjugate of a diagonal with uniform weights in [0, 1]."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    e0 = q @ np.diag(rng.uniform(0, 1, size=dim)) @ q.conj().T
    return BinaryPovm(e0)
