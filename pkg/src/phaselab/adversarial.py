"""Worst-case noise construction and sharpness measurements.

The noise is chosen so that a wrong target fits the corrupted measurements
exactly: z = A(alternative) - A(truth) makes the alternative a zero-residual
global minimizer of the recovery objective, so the recovery error it inflicts
is exactly the distance between the two targets.  The quantity of interest is

    ratio = d(alternative, truth) * m^(1/q) / ||z||_q,

which measures how tight the generic error ceiling ||z||_q / m^(1/q) is.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from . import streams
from .ensembles import (
    EnsembleSpec,
    amplitude_op,
    intensity_op,
    measurement_rows,
    rank_one_op,
    sample_ensemble,
    sample_vectors,
)
from .exceptions import ConfigError, EquivalentTargets, ZeroPerturbation
from .geometry import dist_for
from .solvers import lq_norm
from .validation import as_vector, check_ell, check_hermitian, check_positive_int, check_q

_MIN_TARGET_DISTANCE = 1e-8
_MIN_RELATIVE_SEPARATION = 0.1

PHASE_MODE = "phase"
MATRIX_MODE = "matrix"


@dataclasses.dataclass(frozen=True)
class AdversarialInstance:
    """A truth/alternative pair with the noise that hides the truth.

    ``x0`` and ``x_star`` are vectors (phase mode, with ``ell`` set) or
    symmetric matrices (matrix mode, ``ell`` is None).  ``d_error`` is the
    recovery error certified by the construction and ``ratio`` its value in
    units of the noise ceiling ||z||_q / m^(1/q).
    """

    x0: np.ndarray
    x_star: np.ndarray
    z: np.ndarray
    q: float
    ell: int | None
    d_error: float
    z_norm: float
    ratio: float

    @property
    def mode(self) -> str:
        return MATRIX_MODE if self.x0.ndim == 2 else PHASE_MODE


def make_phase_noise(Phi, ell: int, x0, x_star, q: float = 1.0) -> AdversarialInstance:
    """Noise that makes ``x_star`` fit the measurements of ``x0`` exactly."""
    ell = check_ell(ell)
    q = check_q(q)
    rows = measurement_rows(Phi)
    x0 = as_vector(x0, n=rows.shape[1], name="x0")
    x_star = as_vector(x_star, n=rows.shape[1], name="x_star")
    d = dist_for(ell, x_star, x0)
    if d < _MIN_TARGET_DISTANCE:
        raise EquivalentTargets("x0 and x_star coincide up to a unimodular phase")
    op = amplitude_op if ell == 1 else intensity_op
    z = op(rows, x_star) - op(rows, x0)
    z_norm = lq_norm(z, q)
    if z_norm <= 0.0:
        raise EquivalentTargets("measurements cannot separate x0 from x_star")
    ratio = d * rows.shape[0] ** (1.0 / q) / z_norm
    return AdversarialInstance(x0=x0, x_star=x_star, z=z, q=q, ell=ell,
                               d_error=d, z_norm=z_norm, ratio=ratio)


def make_matrix_noise(Phi, X0, w, t: float, q: float = 1.0) -> AdversarialInstance:
    """Noise hiding a rank-one perturbation X0 + t w w^* of the truth X0."""
    q = check_q(q)
    rows = measurement_rows(Phi)
    X0 = check_hermitian(X0, n=rows.shape[1], name="X0")
    w = as_vector(w, n=rows.shape[1], name="w")
    wnorm = float(np.linalg.norm(w))
    if t == 0.0 or wnorm <= 0.0:
        raise ZeroPerturbation("perturbation t w w^* must be nonzero")
    w = w / wnorm
    perturbation = float(t) * np.outer(w, w.conj())
    X_star = X0 + perturbation
    z = rank_one_op(rows, X_star - X0)
    z_norm = lq_norm(z, q)
    if z_norm <= 0.0:
        raise ZeroPerturbation("measurements cannot see the rank-one perturbation")
    d = float(np.linalg.norm(X_star - X0))
    ratio = d * rows.shape[0] ** (1.0 / q) / z_norm
    return AdversarialInstance(x0=X0, x_star=X_star, z=z, q=q, ell=None,
                               d_error=d, z_norm=z_norm, ratio=ratio)


def gamma_moment(spec: EnsembleSpec, ell: int, q: float, u, v,
                 trials: int = 10_000, seed: int = 0) -> float:
    """Monte Carlo q-th moment of the normalized measurement gap of a pair.

    Estimates E | (|<phi, u>|^ell - |<phi, v>|^ell) / d_ell(u, v) |^q for one
    fresh measurement vector phi from the ensemble's entry law.
    """
    ell = check_ell(ell)
    q = check_q(q)
    trials = check_positive_int(trials, "trials", minimum=10_000)
    u = as_vector(u, n=spec.n, name="u")
    v = as_vector(v, n=spec.n, name="v")
    d = dist_for(ell, u, v)
    if d < _MIN_TARGET_DISTANCE:
        raise EquivalentTargets("u and v coincide up to a unimodular phase")
    phis = sample_vectors(spec, trials, streams.stream(seed, "gamma"))
    au = np.abs(phis.conj() @ u)
    av = np.abs(phis.conj() @ v)
    if ell == 2:
        au, av = au**2, av**2
    return float(np.mean(np.abs((au - av) / d) ** q))


def _random_unit(n, rng, complex_field):
    v = rng.standard_normal(n)
    if complex_field:
        v = v + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _separated_alternative(x0, rng, complex_field):
    n = x0.shape[0]
    floor = _MIN_RELATIVE_SEPARATION * float(np.linalg.norm(x0))
    while True:
        cand = _random_unit(n, rng, complex_field)
        if dist_for(1, x0, cand) >= floor:
            return cand


def sharpness_experiment(spec: EnsembleSpec, mode: str, q: float,
                         trials: int = 100, ell: int = 2,
                         seed: int = 0) -> tuple[list[dict], dict]:
    """Per-trial sharpness ratios for fresh ensembles and random targets.

    ``mode`` is "phase" (vector targets, using ``ell``) or "matrix" (full
    symmetric truth with a random rank-one perturbation).  Returns the CSV
    row dicts and a summary with nearest-rank ratio quantiles.
    """
    if mode not in (PHASE_MODE, MATRIX_MODE):
        raise ConfigError(f"mode must be '{PHASE_MODE}' or '{MATRIX_MODE}', got {mode!r}")
    q = check_q(q)
    trials = check_positive_int(trials, "trials")
    complex_field = spec.field == "complex"
    n = spec.n
    rows_out: list[dict] = []
    ratios = np.empty(trials)
    for t in range(trials):
        phi_spec = dataclasses.replace(spec, seed=_trial_seed(seed, t))
        Phi = sample_ensemble(phi_spec)
        rng = streams.stream(seed, "target", t)
        if mode == PHASE_MODE:
            x0 = _random_unit(n, rng, complex_field)
            x_star = _separated_alternative(x0, rng, complex_field)
            inst = make_phase_noise(Phi, ell, x0, x_star, q)
            op = amplitude_op if ell == 1 else intensity_op
            corrupted = op(Phi, inst.x0) + inst.z
            residual = lq_norm(op(Phi, inst.x_star) - corrupted, q)
            tag = ell
        else:
            A = rng.standard_normal((n, n))
            if complex_field:
                A = A + 1j * rng.standard_normal((n, n))
            X0 = (A + A.conj().T) / 2.0
            X0 /= np.linalg.norm(X0)
            w = _random_unit(n, rng, complex_field)
            inst = make_matrix_noise(Phi, X0, w, 1.0, q)
            corrupted = rank_one_op(Phi, inst.x0) + inst.z
            residual = lq_norm(rank_one_op(Phi, inst.x_star) - corrupted, q)
            tag = "matrix"
        ratios[t] = inst.ratio
        rows_out.append({
            "trial": t,
            "seed": seed,
            "n": n,
            "m": spec.m,
            "q": q,
            "ell_or_matrix": tag,
            "d_error": inst.d_error,
            "z_norm_q": inst.z_norm,
            "ratio": inst.ratio,
            "residual_q": residual,
        })
    from .certificates import nearest_rank_quantiles

    q01, q50, q99 = nearest_rank_quantiles(ratios)
    summary = {"trials": trials, "q": q, "mode": mode,
               "ratio_q01": q01, "ratio_median": q50, "ratio_q99": q99}
    return rows_out, summary


def _trial_seed(seed: int, trial: int) -> int:
    # One 63-bit seed per trial ensemble, derived deterministically.
    return int(streams.stream(seed, "ensemble", trial).integers(0, 2**63 - 1))
