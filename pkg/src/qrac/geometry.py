"""Halfspaces of binary decoders and sign-pattern regions of the Bloch ball.

A binary POVM with ``e0 = sum_j a_j |u_j><u_j|`` on an N-level system
succeeds on outcome 0 with probability above one half exactly when the
state's Bloch vector ``r`` satisfies ``s . r > c`` with

    s = sum_j (a_j / 2) bloch(u_j),     c = 1/2 - sum_j a_j / N.

In fact ``Tr(e0 rho) - 1/2 == s . r - c`` identically.  A coding that
beats one half on every bit therefore needs all ``2^n`` sign patterns of
``n`` such halfspaces to meet the ball, and ``n`` hyperplanes in
``R^d`` cut out at most ``sum_{i<=d} C(n, i)`` regions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ._tolerances import DERIVED_TOL, STRUCT_TOL
from .core import BinaryPovm, density_to_bloch, povm_canonical_form
from .schemes import QracScheme, bitstrings

__all__ = [
    "Halfspace",
    "RegionWitness",
    "CapacityError",
    "povm_to_halfspace",
    "pattern_signs",
    "realized_patterns",
    "bloch_radius",
    "max_regions",
    "NoGoCertificate",
    "no_go_certificate",
]

REALIZED = "realized"
EMPTY = "empty"
UNDECIDED = "undecided"

_INT64_MAX = 2**63 - 1


class CapacityError(OverflowError):
    pass


@dataclass(frozen=True, eq=False)
class Halfspace:
    """``{r : s . r > c}``; ``source_index`` is the 0-based decoder it came from."""

    s: np.ndarray
    c: float
    source_index: int = 0
    degenerate: bool = field(init=False)

    def __post_init__(self):
        s = np.array(self.s, dtype=float).reshape(-1)
        if not (np.all(np.isfinite(s)) and math.isfinite(self.c)):
            raise ValueError("halfspace coefficients must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "degenerate", bool(np.linalg.norm(s) < STRUCT_TOL))

    @property
    def dim(self) -> int:
        return self.s.size

    def value(self, r) -> float:
        """``s . r - c``: positive on the outcome-0 side."""
        return float(self.s @ np.asarray(r, dtype=float) - self.c)

    def scaled(self, factor: float) -> "Halfspace":
        if factor <= 0:
            raise ValueError("only positive scaling preserves the halfspace")
        return Halfspace(self.s * factor, self.c * factor, self.source_index)

    def to_dict(self) -> dict:
        return {
            "bit": self.source_index + 1,
            "s": [float(v) for v in self.s],
            "c": self.c,
            "degenerate": self.degenerate,
        }


def povm_to_halfspace(povm: BinaryPovm, source_index: int = 0) -> Halfspace:
    alphas, vecs = povm_canonical_form(povm)
    n = povm.dim
    s = sum(0.5 * a * density_to_bloch(np.outer(u, u.conj())).coords for a, u in zip(alphas, vecs.T))
    c = 0.5 - float(np.sum(alphas)) / n
    return Halfspace(s, c, source_index)


def pattern_signs(pattern: str) -> np.ndarray:
    """+1 where the pattern asks for the outcome-0 side, -1 otherwise."""
    return np.array([1.0 if b == "0" else -1.0 for b in pattern])


@dataclass(frozen=True, eq=False)
class RegionWitness:
    """Outcome of the max-margin search for one sign pattern.

    ``margin`` is the best achieved ``min_i sign_i (s_i . r - c_i)`` with
    every halfspace rescaled to a unit normal; ``upper_bound`` is a dual
    certificate on the same quantity.
    """

    pattern: str
    status: str
    point: np.ndarray | None
    margin: float
    upper_bound: float

    @property
    def realized(self) -> bool:
        return self.status == REALIZED

    def to_dict(self) -> dict:
        return {
            "pattern": self.pattern,
            "status": self.status,
            "point": None if self.point is None else [float(v) for v in self.point],
            "margin": self.margin,
            "upper_bound": self.upper_bound,
        }


def _project_ball(r: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(r, axis=-1, keepdims=True)
    return r / np.maximum(norms, 1.0)


def _dual_bound(g: np.ndarray, h: np.ndarray) -> tuple[float, np.ndarray]:
    """Upper bound on max_{|r|<=1} min_i (g_i . r - h_i).

    Any convex weighting ``lam`` gives ``|g^T lam| - h . lam`` as a bound;
    the best weighting is searched with SLSQP and the vertices are always
    included, so the returned value is valid even if the search stalls.
    Also returns the direction ``g^T lam / |g^T lam|`` of the best weighting,
    which is the primal optimum whenever the ball constraint is active.
    """
    k = len(h)
    exact = lambda lam: float(np.linalg.norm(g.T @ lam) - h @ lam)  # noqa: E731
    best, best_lam = np.inf, None
    for i in range(k):
        lam = np.zeros(k)
        lam[i] = 1
        if exact(lam) < best:
            best, best_lam = exact(lam), lam
    if k > 1:
        best, best_lam = _slsqp_dual(g, h, exact, best, best_lam)
    v = g.T @ best_lam
    nv = np.linalg.norm(v)
    return best, (v / nv if nv > 0 else np.zeros_like(v))


def _slsqp_dual(g, h, exact, best, best_lam):
    k = len(h)

    def fun(lam):
        v = g.T @ lam
        nv = np.linalg.norm(v)
        grad = (g @ v) / max(nv, 1e-15) - h
        return nv - h @ lam, grad

    res = minimize(
        fun,
        np.full(k, 1.0 / k),
        jac=True,
        method="SLSQP",
        bounds=[(0.0, 1.0)] * k,
        constraints=[{"type": "eq", "fun": lambda lam: lam.sum() - 1.0, "jac": lambda lam: np.ones(k)}],
        options={"ftol": 1e-14, "maxiter": 500},
    )
    lam = np.clip(res.x, 0.0, None)
    if lam.sum() > 0:
        lam = lam / lam.sum()
        if exact(lam) < best:
            best, best_lam = exact(lam), lam
    return best, best_lam


def _polish(g: np.ndarray, h: np.ndarray, r: np.ndarray, target: float, sweeps: int) -> np.ndarray:
    """Cyclic projections onto {g_i . r >= h_i + target} and the unit ball."""
    for _ in range(sweeps):
        for gi, hi in zip(g, h):
            gap = hi + target - gi @ r
            if gap > 0:
                r = r + gap * gi
        r = _project_ball(r)
    return r


def realized_patterns(
    halfspaces,
    ball_dim: int | None = None,
    margin_eps: float = 1e-7,
    max_iter: int = 100_000,
    refine_iter: int = 2_000,
    radius: float = 1.0,
) -> list[RegionWitness]:
    """Decide which of the 2^k sign patterns meet the open ball of ``radius``.

    Use ``radius=bloch_radius(N)`` to cover every N-level state; for qubits
    that is the unit ball.  Margins and bounds are reported for the ball
    rescaled to unit radius, points in the original coordinates.

    Each halfspace is rescaled to a unit normal first, so the result does
    not depend on the positive scale of ``(s_i, c_i)``.  For every pattern
    the concave max-margin problem ``max_{|r|<=1} min_i sign_i (s_i . r - c_i)``
    is attacked by projected supergradient ascent with Polyak steps aimed at
    a dual upper bound (diminishing steps ``0.5 / sqrt(t+1)`` if that bound is
    not finite), starting from the origin, from each signed normal at half
    length, and from the unit direction suggested by the dual weights.  The best iterate wins; patterns still short of ``margin_eps``
    get an alternating-projection polish.

    Status is ``realized`` with a verified witness when the margin reaches
    ``margin_eps``, ``empty`` when the dual bound is below it, and
    ``undecided`` otherwise.  Degenerate halfspaces (``s ~ 0``) are decided
    up front: the side with ``sign * (-c) >= margin_eps`` holds everywhere,
    the other side nowhere.
    """
    hs = list(halfspaces)
    k = len(hs)
    if ball_dim is None:
        ball_dim = hs[0].dim if hs else 1
    for h in hs:
        if h.dim != ball_dim:
            raise ValueError(f"halfspace of dimension {h.dim} in a {ball_dim}-ball")
    if margin_eps <= 0:
        raise ValueError("margin_eps must be positive")
    if not radius > 0:
        raise ValueError("radius must be positive")
    if radius != 1.0:
        unit = [h if h.degenerate else Halfspace(h.s * radius, h.c, h.source_index) for h in hs]
        out = realized_patterns(unit, ball_dim, margin_eps, max_iter, refine_iter)
        return [
            RegionWitness(w.pattern, w.status, None if w.point is None else w.point * radius, w.margin, w.upper_bound)
            for w in out
        ]

    patterns = bitstrings(k) if k else [""]
    live = [i for i, h in enumerate(hs) if not h.degenerate]
    dead = [i for i, h in enumerate(hs) if h.degenerate]
    if live:
        norms = np.array([np.linalg.norm(hs[i].s) for i in live])
        a = np.array([hs[i].s for i in live]) / norms[:, None]
        b = np.array([hs[i].c for i in live]) / norms
    else:
        a = np.zeros((0, ball_dim))
        b = np.zeros(0)

    results: dict[str, RegionWitness] = {}
    todo = []
    for w in patterns:
        sig = pattern_signs(w)
        blocked = [i for i in dead if sig[i] * -hs[i].c < margin_eps]
        if blocked:
            val = min(sig[i] * -hs[i].c for i in blocked)
            results[w] = RegionWitness(w, EMPTY, None, val, val)
            continue
        sl = sig[live] if live else np.zeros(0)
        g = sl[:, None] * a
        hh = sl * b
        if not live:
            results[w] = RegionWitness(w, REALIZED, np.zeros(ball_dim), math.inf, math.inf)
            continue
        upper, direction = _dual_bound(g, hh)
        if upper < margin_eps:
            results[w] = RegionWitness(w, EMPTY, None, -math.inf, upper)
            continue
        todo.append((w, g, hh, upper, direction))

    if todo:
        results.update(_ascend(todo, ball_dim, margin_eps, max_iter, refine_iter))
    return [results[w] for w in patterns]


def _ascend(todo, d, eps, max_iter, refine_iter) -> dict[str, RegionWitness]:
    g = np.array([t[1] for t in todo])  # (P, k, d)
    h = np.array([t[2] for t in todo])  # (P, k)
    upper = np.array([t[3] for t in todo])
    p, k, _ = g.shape
    hint = np.array([t[4] for t in todo])[:, None, :]
    starts = np.concatenate([np.zeros((p, 1, d)), 0.5 * g, hint], axis=1)  # (P, S, d)
    r = starts.copy()
    best_val = np.full(p, -np.inf)
    best_pt = np.zeros((p, d))
    active = np.ones(p, dtype=bool)
    reached_at = np.full(p, -1)
    last_gain = np.zeros(p, dtype=int)
    gap_tol = 1e-10
    stall_iter = 100

    for t in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        gi, hi, ri = g[idx], h[idx], r[idx]
        vals = np.einsum("pkd,psd->psk", gi, ri) - hi[:, None, :]
        arg = np.argmin(vals, axis=2)
        f = np.take_along_axis(vals, arg[..., None], axis=2)[..., 0]  # (P', S)
        s_best = np.argmax(f, axis=1)
        f_best = f[np.arange(idx.size), s_best]
        improved = f_best > best_val[idx]
        last_gain[idx[f_best > best_val[idx] + 1e-9]] = t
        upd = idx[improved]
        best_val[upd] = f_best[improved]
        best_pt[upd] = ri[improved, s_best[improved]]

        newly = (best_val[idx] >= eps) & (reached_at[idx] < 0)
        reached_at[idx[newly]] = t
        refined = (t - reached_at[idx] >= refine_iter) | (t - last_gain[idx] >= stall_iter)
        finished = (upper[idx] - best_val[idx] <= gap_tol) | ((reached_at[idx] >= 0) & refined)
        active[idx[finished]] = False

        step_dir = np.take_along_axis(gi[:, None, :, :], arg[..., None, None], axis=2)[:, :, 0, :]
        if np.all(np.isfinite(upper[idx])):
            eta = np.maximum(upper[idx][:, None] - f, 0.0)
        else:
            eta = np.full(f.shape, 0.5 / math.sqrt(t + 1))
        r[idx] = _project_ball(ri + eta[..., None] * step_dir)

    out = {}
    for j, (w, gj, hj, up, _) in enumerate(todo):
        pt, val = best_pt[j], best_val[j]
        if val < eps:
            cand = _polish(gj, hj, pt.copy(), 2 * eps, sweeps=1000)
            cval = float(np.min(gj @ cand - hj))
            if cval > val and np.linalg.norm(cand) <= 1 + STRUCT_TOL:
                pt, val = cand, cval
        if val >= eps and np.linalg.norm(pt) <= 1 + STRUCT_TOL:
            out[w] = RegionWitness(w, REALIZED, pt.copy(), float(val), float(up))
        else:
            out[w] = RegionWitness(w, UNDECIDED, None, float(val), float(up))
    return out


def bloch_radius(level: int) -> float:
    """Radius of the smallest ball around 0 holding every N-level Bloch vector."""
    if level < 2:
        raise ValueError("level must be >= 2")
    return math.sqrt(2 * (level - 1) / level)


def max_regions(k_hyperplanes: int, d: int) -> int:
    """Most regions that ``k`` hyperplanes can cut ``R^d`` (or a d-ball) into."""
    if k_hyperplanes < 0 or d < 0:
        raise ValueError("k and d must be non-negative")
    total = 0
    for i in range(min(k_hyperplanes, d) + 1):
        total += math.comb(k_hyperplanes, i)
        if total > _INT64_MAX:
            raise CapacityError(f"max_regions({k_hyperplanes}, {d}) does not fit in 64 bits")
    return total


@dataclass(frozen=True, eq=False)
class NoGoCertificate:
    """Cell-by-cell check of a scheme against a claimed success probability.

    ``margins[k, i]`` is ``sign(x_i) * (s_i . r_x - c_i)``, which equals the
    cell's success probability minus one half.  ``status`` is ``refuted``
    when some cell falls short of ``claimed_p``, ``not-refuted`` when the
    scheme really achieves it (possible only when ``n < 4^m``), and
    ``inconsistent`` if every strict inequality holds although the counting
    bound forbids it.
    """

    claimed_p: float
    halfspaces: tuple[Halfspace, ...]
    keys: tuple[str, ...]
    margins: np.ndarray
    status: str
    violated_cell: tuple[str, int] | None
    slack: float | None
    strict_failures: int
    first_strict_failure: tuple[str, int] | None
    counting: dict | None

    def to_dict(self, digits: int = 9) -> dict:
        fmt = lambda v: None if v is None else float(f"{v:.{digits}g}")  # noqa: E731
        cell = lambda c: None if c is None else {"x": c[0], "bit": c[1] + 1}  # noqa: E731
        return {
            "claimed_p": self.claimed_p,
            "status": self.status,
            "violated_cell": cell(self.violated_cell),
            "slack": fmt(self.slack),
            "strict_failures": self.strict_failures,
            "first_strict_failure": cell(self.first_strict_failure),
            "halfspaces": [
                {**hs.to_dict(), "s": [fmt(v) for v in hs.s], "c": fmt(hs.c)} for hs in self.halfspaces
            ],
            "patterns": {
                x: {"holds": bool(np.all(row > DERIVED_TOL)), "min_margin": fmt(float(row.min()))}
                for x, row in zip(self.keys, self.margins)
            },
            "counting": self.counting,
        }


def no_go_certificate(scheme: QracScheme, claimed_p: float) -> NoGoCertificate:
    if not claimed_p > 0.5:
        raise ValueError(f"claimed_p must exceed 1/2, got {claimed_p!r}")
    hs = tuple(povm_to_halfspace(p, i) for i, p in enumerate(scheme.povms))
    keys = tuple(scheme.keys)
    bloch = np.array([density_to_bloch(scheme.states[x]).coords for x in keys])
    s = np.array([h.s for h in hs])
    c = np.array([h.c for h in hs])
    signs = np.array([pattern_signs(x) for x in keys])
    margins = signs * (bloch @ s.T - c)

    required = claimed_p - 0.5
    short = margins < required - DERIVED_TOL
    strict = margins <= DERIVED_TOL
    first_strict = None
    if strict.any():
        kk, ii = np.argwhere(strict)[0]
        first_strict = (keys[kk], int(ii))
    violated = slack = None
    if strict.any():
        violated = first_strict
    elif short.any():
        kk, ii = np.argwhere(short)[0]
        violated = (keys[kk], int(ii))
    if violated is not None:
        slack = float(margins[keys.index(violated[0]), violated[1]] - required)

    d = scheme.dim**2 - 1
    counting = None
    if scheme.n > d:
        regions = max_regions(scheme.n, d)
        counting = {
            "hyperplanes": scheme.n,
            "dimension": d,
            "max_regions": regions,
            "patterns_needed": 2**scheme.n,
            "statement": f"max_regions({scheme.n},{d})={regions} < {2**scheme.n}",
        }
    if violated is not None:
        status = "refuted"
    elif counting is not None:
        status = "inconsistent"
    else:
        status = "not-refuted"
    return NoGoCertificate(
        claimed_p, hs, keys, margins, status, violated, slack, int(strict.sum()), first_strict, counting
    )
