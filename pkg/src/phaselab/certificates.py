"""Monte Carlo certificates for stability, injectivity, embedding and chaos.

Each certificate samples elements (or pairs) from a constraint set and
reduces a per-sample ratio to a single statistic:

* stability: min over pairs of ||A_ell(u) - A_ell(v)||_q / (m^(1/q) d_ell);
* injectivity: min over unit-Frobenius difference directions X of
  ||A(X)||_q / m^(1/q);
* embedding: min and max over pairs of ||L_p(u u^* - v v^*)||_1 / d2^p for a
  lifting exponent p;
* small ball: min over directions X of the tail probability
  P(|phi^* X phi| >= xi);
* Rademacher supremum and chaos supremum: sampled-maximum lower
  approximations of expected suprema of signed quadratic forms.

True suprema over continuous sets are replaced by maxima over finite sampled
subsets, so every "sup"-flavored statistic is a lower approximation.  All
sampling derives from per-trial streams keyed by the certificate seed, so a
rerun with the same seed is bit-identical and a rerun with more trials
replays the original trials first.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

from . import streams
from .ensembles import EnsembleSpec, measurement_rows, sample_vectors
from .exceptions import ConfigError, DegenerateSet
from .geometry import (
    FiniteSet,
    MATRIX_SETS,
    dist_for,
    matrix_budget,
    nuclear_ratio_sq,
    sample_cone_sphere,
    sample_difference_sphere,
)
from .solvers import lq_norm
from .validation import check_ell, check_positive_int, check_q

STABILITY_LOWER = "stability_lower"
INJECTIVITY_LOWER = "injectivity_lower"
EMBED_LOWER = "embed_lower"
EMBED_UPPER = "embed_upper"
SMALL_BALL_Q = "small_ball_q"
RADEMACHER_R = "rademacher_r"
CHAOS_S = "chaos_s"

_DEGENERATE_DISTANCE = 1e-10
_MAX_PAIR_RESAMPLES = 100
_RADIUS_LOG10_RANGE = (-1.0, 1.0)  # radii log-uniform in [0.1, 10]

S_PLAIN = "S"
S_EMPIRICAL = "Sbar"
S_RADEMACHER = "Stilde"


@dataclasses.dataclass(frozen=True)
class CertificateEstimate:
    """A Monte Carlo statistic with its sampling metadata.

    ``quantiles`` holds the nearest-rank 1%, 50% and 99% quantiles of the
    per-trial values that produced the statistic.
    """

    kind: str
    statistic: float
    trials: int
    seed: int
    quantiles: tuple[float, float, float]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "statistic": self.statistic,
            "trials": self.trials,
            "seed": self.seed,
            "quantiles": list(self.quantiles),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def nearest_rank_quantiles(values) -> tuple[float, float, float]:
    ordered = np.sort(np.asarray(values, dtype=np.float64))
    n = ordered.shape[0]

    def pick(p: float) -> float:
        return float(ordered[min(max(math.ceil(p * n), 1), n) - 1])

    return (pick(0.01), pick(0.50), pick(0.99))


def _certificate(kind, values, seed, reduce_fn) -> CertificateEstimate:
    vals = np.asarray(values, dtype=np.float64)
    return CertificateEstimate(
        kind=kind,
        statistic=float(reduce_fn(vals)),
        trials=int(vals.shape[0]),
        seed=int(seed),
        quantiles=nearest_rank_quantiles(vals),
    )


def _draw_set_element(desc, rng, complex_field) -> np.ndarray:
    """A set element for pair sampling: finite sets yield members as stored,
    cone-shaped sets yield a unit direction scaled by a log-uniform radius."""
    if isinstance(desc, FiniteSet):
        return desc.members[int(rng.integers(len(desc)))].copy()
    radius = 10.0 ** rng.uniform(*_RADIUS_LOG10_RANGE)
    return radius * sample_cone_sphere(desc, rng, complex_field)


def measurement_ratio(Phi, u, v, ell: int, q: float) -> float:
    """Single-pair stability ratio ||A_ell(u) - A_ell(v)||_q / (m^(1/q) d_ell)."""
    rows = measurement_rows(Phi)
    ell = check_ell(ell)
    q = check_q(q)
    d = dist_for(ell, u, v)
    if d < _DEGENERATE_DISTANCE:
        raise DegenerateSet("pair is equivalent up to phase")
    au = np.abs(rows.conj() @ np.asarray(u))
    av = np.abs(rows.conj() @ np.asarray(v))
    if ell == 2:
        au, av = au**2, av**2
    return lq_norm(au - av, q) / (rows.shape[0] ** (1.0 / q) * d)


def _sample_pair(desc, rng, complex_field, ell):
    for _ in range(_MAX_PAIR_RESAMPLES):
        u = _draw_set_element(desc, rng, complex_field)
        v = _draw_set_element(desc, rng, complex_field)
        if dist_for(ell, u, v) >= _DEGENERATE_DISTANCE:
            return u, v
    raise DegenerateSet("could not sample a non-equivalent pair from the set")


def stability_constant_lower(Phi, constraint, ell: int, q: float,
                             pairs: int = 1000, seed: int = 0) -> CertificateEstimate:
    """Empirical stability constant: worst pair ratio over sampled pairs."""
    rows = measurement_rows(Phi)
    ell = check_ell(ell)
    q = check_q(q)
    pairs = check_positive_int(pairs, "pairs", minimum=100)
    complex_field = bool(np.iscomplexobj(rows))
    ratios = np.empty(pairs)
    for i in range(pairs):
        rng = streams.stream(seed, "pair", i)
        u, v = _sample_pair(constraint, rng, complex_field, ell)
        ratios[i] = measurement_ratio(rows, u, v, ell, q)
    return _certificate(STABILITY_LOWER, ratios, seed, np.min)


def injectivity_constant_lower(Phi, constraint, q: float,
                               samples: int = 200, seed: int = 0) -> CertificateEstimate:
    """Empirical injectivity constant over unit-Frobenius difference directions."""
    rows = measurement_rows(Phi)
    q = check_q(q)
    samples = check_positive_int(samples, "samples", minimum=100)
    if not isinstance(constraint, MATRIX_SETS):
        raise ConfigError("injectivity certificates need a matrix set descriptor")
    complex_field = bool(np.iscomplexobj(rows))
    scale = rows.shape[0] ** (1.0 / q)
    ratios = np.empty(samples)
    for i in range(samples):
        rng = streams.stream(seed, "sample", i)
        X = sample_difference_sphere(constraint, rng, complex_field)
        prod = rows @ X.T
        vals = np.einsum("ij,ij->i", rows.conj(), prod).real
        ratios[i] = lq_norm(vals, q) / scale
    return _certificate(INJECTIVITY_LOWER, ratios, seed, np.min)


def _lifting_ratio(rows, u, v, p) -> float | None:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    overlap = complex(np.vdot(v, u))
    d2 = math.sqrt(max(nu**4 + nv**4 - 2.0 * abs(overlap) ** 2, 0.0))
    if d2 < _DEGENERATE_DISTANCE:
        return None
    au = np.abs(rows.conj() @ u)
    av = np.abs(rows.conj() @ v)
    lifted = float(np.mean(np.abs(au**2 - av**2) ** p))
    return lifted / d2**p


def embed_bounds(Phi, p: float, set1, set2=None, samples: int = 200,
                 seed: int = 0) -> tuple[CertificateEstimate, CertificateEstimate]:
    """Two-sided embedding certificate for the lifting exponent p.

    Ratios ||L_p(u u^* - v v^*)||_1 / d2(u, v)^p are collected over sampled
    pairs (u from set1, v from set2); ``set2=None`` fixes v = 0, reducing to
    the one-sided magnitude-moment ratio.  Returns (lower, upper) statistics.
    """
    rows = measurement_rows(Phi)
    pf = float(p)
    if not 0.5 <= pf <= 1.0:
        raise ConfigError(f"embedding exponent must lie in [1/2, 1], got {p}")
    samples = check_positive_int(samples, "samples", minimum=100)
    complex_field = bool(np.iscomplexobj(rows))
    zero = np.zeros(rows.shape[1], dtype=np.complex128 if complex_field else np.float64)
    ratios = np.empty(samples)
    for i in range(samples):
        rng = streams.stream(seed, "embed", i)
        value = None
        for _ in range(_MAX_PAIR_RESAMPLES):
            u = _draw_set_element(set1, rng, complex_field)
            v = zero if set2 is None else _draw_set_element(set2, rng, complex_field)
            value = _lifting_ratio(rows, u, v, pf)
            if value is not None:
                break
        if value is None:
            raise DegenerateSet("could not sample a pair with separated lifts")
        ratios[i] = value
    lower = _certificate(EMBED_LOWER, ratios, seed, np.min)
    upper = _certificate(EMBED_UPPER, ratios, seed, np.max)
    return lower, upper


def corollary_checks(Phi, constraint, samples: int = 200, seed: int = 0):
    """Certificates for the three derived magnitude-moment inequalities.

    Returns (one_sided_upper, half_power_lower, full_power_lower):
    the upper statistic of (1/m) sum |<phi_k, u>| / ||u||, and the lower
    statistics of the lifted ratios at exponents 1/2 and 1.
    """
    _, upper = embed_bounds(Phi, 0.5, constraint, None, samples=samples, seed=seed)
    half_lower, _ = embed_bounds(Phi, 0.5, constraint, constraint, samples=samples, seed=seed)
    full_lower, _ = embed_bounds(Phi, 1.0, constraint, constraint, samples=samples, seed=seed)
    return upper, half_lower, full_lower


def small_ball_Q(spec: EnsembleSpec, constraint, xi: float, trials: int = 1000,
                 n_matrices: int = 50, seed: int = 0) -> CertificateEstimate:
    """Marginal tail certificate: min over directions X of P(|phi^* X phi| >= xi).

    Directions are unit-Frobenius samples from the difference cone of the
    matrix set; the probability is estimated per direction from fresh
    measurement vectors drawn from the ensemble's entry law.
    """
    if not 0.0 < xi < 1.0:
        raise ConfigError(f"xi must lie in (0, 1), got {xi}")
    trials = check_positive_int(trials, "trials", minimum=1000)
    n_matrices = check_positive_int(n_matrices, "n_matrices", minimum=50)
    if not isinstance(constraint, MATRIX_SETS):
        raise ConfigError("small-ball certificates need a matrix set descriptor")
    if constraint.n != spec.n:
        raise ConfigError(f"set dimension {constraint.n} != ensemble dimension {spec.n}")
    complex_field = spec.field == "complex"
    probs = np.empty(n_matrices)
    for j in range(n_matrices):
        X = sample_difference_sphere(constraint, streams.stream(seed, "matrix", j),
                                     complex_field)
        phis = sample_vectors(spec, trials, streams.stream(seed, "phi", j))
        vals = np.einsum("ij,ij->i", phis.conj(), phis @ X.T).real
        probs[j] = float(np.mean(np.abs(vals) >= xi))
    return _certificate(SMALL_BALL_Q, probs, seed, np.min)


def _inner_elements(constraint, rng, complex_field, count):
    """Sampled sup-approximation set: unit difference directions for
    descriptors, or the explicit matrices when a list is given."""
    if isinstance(constraint, (list, tuple)):
        return [np.asarray(X) for X in constraint]
    return [sample_difference_sphere(constraint, rng, complex_field)
            for _ in range(count)]


def rademacher_R(spec: EnsembleSpec, constraint, m: int, mc_outer: int = 50,
                 mc_inner: int = 100, seed: int = 0) -> CertificateEstimate:
    """Sampled-sup estimate of the expected Rademacher quadratic supremum.

    For each outer draw of m measurement vectors and signs, the supremum of
    |(1/m) sum_k eps_k phi_k^* X phi_k| is approximated over mc_inner sampled
    directions; the statistic averages the outer maxima and is a lower
    approximation of the true expected supremum.
    """
    m = check_positive_int(m, "m")
    mc_outer = check_positive_int(mc_outer, "mc_outer", minimum=50)
    mc_inner = check_positive_int(mc_inner, "mc_inner", minimum=100)
    complex_field = spec.field == "complex"
    values = np.empty(mc_outer)
    for o in range(mc_outer):
        rng = streams.stream(seed, "outer", o)
        phis = sample_vectors(spec, m, rng)
        signs = rng.integers(0, 2, size=m) * 2.0 - 1.0
        elements = _inner_elements(constraint, streams.stream(seed, "inner", o),
                                   complex_field, mc_inner)
        best = 0.0
        for X in elements:
            vals = np.einsum("ij,ij->i", phis.conj(), phis @ np.asarray(X).T).real
            best = max(best, abs(float(signs @ vals)) / m)
        values[o] = best
    return _certificate(RADEMACHER_R, values, seed, np.mean)


def chaos_S(spec: EnsembleSpec, constraint, m: int, variant: str = S_RADEMACHER,
            trials: int = 50, inner_samples: int = 100,
            seed: int = 0) -> CertificateEstimate:
    """Sampled-sup estimate of a chaos-process supremum.

    Variants: "S" uses one centered quadratic form <phi phi^* - I, X>;
    "Sbar" the centered empirical sum over m draws; "Stilde" the
    Rademacher-signed empirical sum.  The supremum is approximated over
    ``inner_samples`` unit difference directions (or the explicit matrices
    when a list is passed), making the statistic a lower approximation.
    """
    if variant not in (S_PLAIN, S_EMPIRICAL, S_RADEMACHER):
        raise ConfigError(f"unknown chaos variant: {variant!r}")
    m = check_positive_int(m, "m")
    trials = check_positive_int(trials, "trials", minimum=50)
    inner_samples = check_positive_int(inner_samples, "inner_samples", minimum=1)
    complex_field = spec.field == "complex"
    eye = np.eye(spec.n)
    values = np.empty(trials)
    for t in range(trials):
        rng = streams.stream(seed, "trial", t)
        if variant == S_PLAIN:
            phi = sample_vectors(spec, 1, rng)
            Y = (phi.T @ phi.conj()) - eye
        else:
            phis = sample_vectors(spec, m, rng)
            if variant == S_EMPIRICAL:
                Y = phis.T @ phis.conj() - m * eye
            else:
                signs = rng.integers(0, 2, size=m) * 2.0 - 1.0
                Y = (phis * signs[:, None]).T @ phis.conj()
        Y = (Y + Y.conj().T) / 2.0
        elements = _inner_elements(constraint, streams.stream(seed, "inner", t),
                                   complex_field, inner_samples)
        values[t] = max(float(np.sum(Y.conj() * np.asarray(X)).real) for X in elements)
    return _certificate(CHAOS_S, values, seed, np.mean)


@dataclasses.dataclass(frozen=True)
class ChaosBounds:
    """Closed-form upper references for the Rademacher chaos supremum.

    ``with_trace_term`` adds a sqrt(m)-scaled trace supremum to the width
    terms; ``with_nuclear_factor`` instead multiplies the width term by the
    worst nuclear-to-Frobenius ratio of the set.  Unit constants throughout.
    """

    with_trace_term: float
    with_nuclear_factor: float
    nuclear_ratio_sq: float


def compare_chaos_bounds(constraint, m: int) -> ChaosBounds:
    m = check_positive_int(m, "m")
    budget = matrix_budget(constraint)
    gamma2 = math.sqrt(budget.gamma2_sq)
    r0 = nuclear_ratio_sq(constraint)
    with_trace = math.sqrt(m) * gamma2 + budget.gamma1 + math.sqrt(m) * budget.trace_sup
    with_nuclear = math.sqrt(m) * math.sqrt(r0) * gamma2 + budget.gamma1
    return ChaosBounds(with_trace_term=with_trace, with_nuclear_factor=with_nuclear,
                       nuclear_ratio_sq=r0)
