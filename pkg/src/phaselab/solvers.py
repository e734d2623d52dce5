"""Constrained empirical lq risk minimization for phaseless and rank-one models.

The vector problem minimizes ``|| A_ell(x) - b ||_q`` over a vector constraint
set, where A_ell maps x to the magnitudes (ell = 1) or squared magnitudes
(ell = 2) of its measurements.  The matrix problem minimizes
``|| A(X) - b ||_q`` over a symmetric matrix constraint set, where A collects
the signed quadratic measurements phi_k^* X phi_k.

Both are solved by projected subgradient descent with normalized steps and a
geometric step-size decay, restarted from several initial points; the best
feasible iterate across restarts is returned.  Complex gradients follow the
conjugate-coordinate convention, so the update direction for |phi^* x|^2 is
2 <phi, x> phi and for |phi^* x| it is Phase(<phi, x>) phi.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

from . import streams
from .ensembles import measurement_rows
from .exceptions import ConfigError, EigenFailure, NonFinite
from .geometry import (
    FiniteSet,
    FullSet,
    dist_d1,
    dist_d2,
    project,
    project_matrix,
    sample_cone_sphere,
)
from .validation import check_ell, check_measurements, check_q

SPECTRAL = "spectral"
RANDOM = "random"

_STOP_WINDOW = 50
_SOLVED_OBJECTIVE = 1e-12
_GRAD_FLOOR = 1e-300


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    """Knobs of the projected subgradient loop.

    ``init`` is "spectral", "random", or an explicit starting point (vector
    or matrix).  The first restart uses the configured initializer; further
    restarts draw fresh random starts.  Steps are
    ``step0 * scale * step_decay**t`` along the normalized subgradient,
    where ``scale`` is a signal-magnitude proxy estimated from b.
    """

    q: float = 2.0
    max_iters: int = 1000
    step0: float = 0.2
    step_decay: float = 0.99
    restarts: int = 5
    tol: float = 1e-12
    init: object = SPECTRAL

    def __post_init__(self):
        object.__setattr__(self, "q", check_q(self.q))
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.restarts < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts}")
        if not 0.0 < self.step_decay <= 1.0:
            raise ConfigError(f"step_decay must lie in (0, 1], got {self.step_decay}")
        if self.step0 <= 0:
            raise ConfigError(f"step0 must be positive, got {self.step0}")
        if self.tol <= 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")

    def to_json(self) -> str:
        init = self.init
        if isinstance(init, np.ndarray):
            init = "provided"
        return json.dumps(dataclasses.asdict(dataclasses.replace(self, init=init)))

    @staticmethod
    def from_json(text: str) -> "SolverConfig":
        obj = json.loads(text)
        return SolverConfig(**obj)


@dataclasses.dataclass(frozen=True)
class SolverReport:
    """Best-of-restarts outcome with optional ground-truth errors."""

    estimate: np.ndarray
    objective_final: float
    iterations_used: int
    restart_index: int
    d1_error: float | None = None
    d2_error: float | None = None
    frobenius_error: float | None = None
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        # Scalar fields only; the estimate array stays out of the JSON form.
        return {
            "objective_final": self.objective_final,
            "iterations_used": self.iterations_used,
            "restart_index": self.restart_index,
            "d1_error": self.d1_error,
            "d2_error": self.d2_error,
            "frobenius_error": self.frobenius_error,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def lq_norm(r: np.ndarray, q: float) -> float:
    if q == 1.0:
        return float(np.sum(np.abs(r)))
    if q == 2.0:
        return float(np.linalg.norm(r))
    return float(np.sum(np.abs(r) ** q) ** (1.0 / q))


def _residual_weights(r: np.ndarray, q: float) -> np.ndarray:
    """Entrywise subgradient of ||.||_q at r, with the 0/0 case set to 0."""
    if q == 1.0:
        return np.sign(r)
    norm = lq_norm(r, q)
    if norm <= 0.0:
        return np.zeros_like(r)
    if q == 2.0:
        return r / norm
    return np.sign(r) * np.abs(r) ** (q - 1.0) * norm ** (1.0 - q)


def spectral_init(Phi, b, ell: int) -> np.ndarray:
    """Leading eigenvector of the measurement-weighted covariance.

    Weights are b for intensity data and b**2 for amplitude data; the
    eigenvector is scaled so its intensity matches the mean weight.  A zero
    b carries no direction information; the first eigenvector is returned
    and callers flag the degeneracy.
    """
    rows = measurement_rows(Phi)
    m, _ = rows.shape
    ell = check_ell(ell)
    b = check_measurements(b, m)
    if np.any(b < 0):
        raise ConfigError("spectral initialization requires nonnegative measurements")
    w = b if ell == 2 else b**2
    S = rows.T @ (w[:, None] * rows.conj()) / m
    S = (S + S.conj().T) / 2.0
    try:
        _, vecs = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    top = vecs[:, -1]
    return top * math.sqrt(max(float(w.mean()), 0.0))


def _phase_objective_grad(rows, x, b, ell, q):
    a = rows.conj() @ x
    amp = np.abs(a)
    meas = amp if ell == 1 else amp**2
    r = meas - b
    obj = lq_norm(r, q)
    w = _residual_weights(r, q)
    if ell == 2:
        coef = 2.0 * w * a
    else:
        safe = np.where(amp > 0, amp, 1.0)
        coef = w * np.where(amp > 0, a / safe, 0.0)
    grad = coef @ rows
    return obj, grad


def _phase_objective(rows, x, b, ell, q):
    amp = np.abs(rows.conj() @ x)
    meas = amp if ell == 1 else amp**2
    return lq_norm(meas - b, q)


def _signal_scale(b: np.ndarray, ell: int) -> float:
    level = float(np.maximum(b, 0.0).mean())
    return level ** (1.0 / ell) if level > 0 else 1.0


def _descent(x0, objective, step, projector, cfg: SolverConfig):
    """Projected subgradient loop; returns (best_x, best_obj, iters)."""
    x = projector(x0)
    best_obj, _ = objective(x, want_grad=False)
    if not np.isfinite(best_obj):
        raise NonFinite("objective is not finite at the initial point")
    best_x = x.copy()
    if best_obj <= _SOLVED_OBJECTIVE:
        return best_x, best_obj, 0
    window_obj = best_obj
    iters = 0
    for t in range(cfg.max_iters):
        obj, grad = objective(x, want_grad=True)
        if not np.isfinite(obj):
            raise NonFinite(f"objective became non-finite at iteration {t}")
        if obj < best_obj:
            best_obj = obj
            best_x = x.copy()
        iters = t + 1
        if best_obj <= _SOLVED_OBJECTIVE:
            break
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= _GRAD_FLOOR:
            break
        x = projector(x - (step * cfg.step_decay**t / gnorm) * grad)
        if not np.all(np.isfinite(x)):
            raise NonFinite(f"iterate became non-finite at iteration {t}")
        if (t + 1) % _STOP_WINDOW == 0:
            if window_obj - best_obj <= cfg.tol * max(abs(window_obj), 1e-30):
                break
            window_obj = best_obj
    return best_x, best_obj, iters


def _run_restarts(cfg, make_start, objective, step, projector):
    best = None
    for r in range(cfg.restarts):
        x0, note = make_start(r)
        bx, bobj, iters = _descent(x0, objective, step, projector, cfg)
        if best is None or bobj < best[1]:
            best = (bx, bobj, iters, r, note)
        if best[1] <= _SOLVED_OBJECTIVE:
            break
    return best


def solve_phase(ell, Phi, b, constraint, cfg: SolverConfig,
                seed: int = 0, x_true=None) -> SolverReport:
    """Minimize || A_ell(x) - b ||_q over the vector constraint set.

    Args:
        ell: 1 for amplitude data, 2 for intensity data.
        Phi: measurement matrix (MeasurementMatrix or (m, n) array).
        b: observed measurements, length m.
        constraint: vector set descriptor; iterates are projected onto it
            after every step.
        cfg: solver configuration.
        seed: seed for the restart streams.
        x_true: optional ground truth; when given, the report carries the
            d1 and d2 recovery errors.

    Returns:
        SolverReport with the best feasible iterate across restarts.
    """
    ell = check_ell(ell)
    rows = measurement_rows(Phi)
    m, n = rows.shape
    b = check_measurements(b, m)
    complex_field = bool(np.iscomplexobj(rows))
    scale = _signal_scale(b, ell)
    ambient = FullSet(n)
    notes: list[str] = []

    def objective(x, want_grad):
        if want_grad:
            return _phase_objective_grad(rows, x, b, ell, cfg.q)
        return _phase_objective(rows, x, b, ell, cfg.q), None

    def projector(x):
        return project(constraint, x)

    def make_start(r):
        if r == 0 and isinstance(cfg.init, np.ndarray):
            return np.asarray(cfg.init), None
        if r == 0 and cfg.init == SPECTRAL:
            # Noise can push measurements negative; the initializer weights are clipped.
            x0 = spectral_init(rows, np.maximum(b, 0.0), ell)
            note = "zero measurements: spectral start is uninformative" if not b.any() else None
            return x0, note
        rng = streams.stream(seed, "restart", r)
        return scale * sample_cone_sphere(ambient, rng, complex_field), None

    best_x, best_obj, iters, r_idx, note = _run_restarts(
        cfg, make_start, objective, cfg.step0 * scale, projector
    )
    if note:
        notes.append(note)
    d1_err = d2_err = None
    if x_true is not None:
        d1_err = dist_d1(best_x, x_true)
        d2_err = dist_d2(best_x, x_true)
    return SolverReport(
        estimate=best_x,
        objective_final=best_obj,
        iterations_used=iters,
        restart_index=r_idx,
        d1_error=d1_err,
        d2_error=d2_err,
        notes=tuple(notes),
    )


def matrix_spectral_init(Phi, b) -> np.ndarray:
    """Debiased weighted covariance as a matrix starting point.

    E[b_k phi phi^*] equals 2 X + Tr(X) I for real Gaussian-like rows and
    X + Tr(X) I for complex ones, so the trace part is estimated and removed.
    """
    rows = measurement_rows(Phi)
    m, n = rows.shape
    b = check_measurements(b, m)
    Y = rows.T @ (b[:, None] * rows.conj()) / m
    Y = (Y + Y.conj().T) / 2.0
    tr = float(np.trace(Y).real)
    if np.iscomplexobj(rows):
        return Y - (tr / (n + 1.0)) * np.eye(n, dtype=Y.dtype)
    return (Y - (tr / (n + 2.0)) * np.eye(n, dtype=Y.dtype)) / 2.0


def _matrix_objective_grad(rows, X, b, q):
    prod = rows @ X.T
    vals = np.einsum("ij,ij->i", rows.conj(), prod).real
    r = vals - b
    obj = lq_norm(r, q)
    w = _residual_weights(r, q)
    grad = rows.T @ (w[:, None] * rows.conj())
    grad = (grad + grad.conj().T) / 2.0
    return obj, grad


def _matrix_objective(rows, X, b, q):
    prod = rows @ X.T
    vals = np.einsum("ij,ij->i", rows.conj(), prod).real
    return lq_norm(vals - b, q)


def solve_matrix(Phi, b, constraint, cfg: SolverConfig,
                 seed: int = 0, X_true=None) -> SolverReport:
    """Minimize || A(X) - b ||_q over the symmetric matrix constraint set.

    Iterates stay symmetric: the subgradient is Hermitian by construction
    and every step ends in a projection onto the constraint set.
    """
    rows = measurement_rows(Phi)
    m, n = rows.shape
    b = check_measurements(b, m)
    complex_field = bool(np.iscomplexobj(rows))
    scale = max(float(np.abs(b).mean()), 1e-30)

    def objective(X, want_grad):
        if want_grad:
            return _matrix_objective_grad(rows, X, b, cfg.q)
        return _matrix_objective(rows, X, b, cfg.q), None

    def projector(X):
        return project_matrix(constraint, X)

    def make_start(r):
        if r == 0 and isinstance(cfg.init, np.ndarray):
            return np.asarray(cfg.init), None
        if r == 0 and cfg.init == SPECTRAL:
            return matrix_spectral_init(rows, b), None
        rng = streams.stream(seed, "restart", r)
        return scale * sample_cone_sphere(constraint, rng, complex_field), None

    best_x, best_obj, iters, r_idx, note = _run_restarts(
        cfg, make_start, objective, cfg.step0 * scale, projector
    )
    frob = None
    if X_true is not None:
        frob = float(np.linalg.norm(best_x - np.asarray(X_true)))
    return SolverReport(
        estimate=best_x,
        objective_final=best_obj,
        iterations_used=iters,
        restart_index=r_idx,
        frobenius_error=frob,
        notes=(note,) if note else (),
    )


def solve_finite_oracle(ell, Phi, b, finite_set: FiniteSet, q) -> SolverReport:
    """Exact minimizer over an explicit finite set, by full enumeration.

    Ties in the objective are broken by the lowest member index.
    """
    ell = check_ell(ell)
    q = check_q(q)
    rows = measurement_rows(Phi)
    b = check_measurements(b, rows.shape[0])
    objectives = np.empty(len(finite_set))
    for i, member in enumerate(finite_set.members):
        objectives[i] = _phase_objective(rows, member, b, ell, q)
    idx = int(np.argmin(objectives))
    return SolverReport(
        estimate=finite_set.members[idx].copy(),
        objective_final=float(objectives[idx]),
        iterations_used=len(finite_set),
        restart_index=0,
    )


__all__ = [
    "SolverConfig",
    "SolverReport",
    "SPECTRAL",
    "RANDOM",
    "lq_norm",
    "spectral_init",
    "matrix_spectral_init",
    "solve_phase",
    "solve_matrix",
    "solve_finite_oracle",
]
