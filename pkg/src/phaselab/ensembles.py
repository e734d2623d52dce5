"""Random measurement ensembles and the measurement operators built on them.

A measurement ensemble is a matrix of m i.i.d. rows with mean-zero,
unit-variance subgaussian entries.  Admissible entry distributions must have
fourth moment strictly above 1: at fourth moment exactly 1 (the symmetric
Bernoulli case) distinct coordinate signals produce identical magnitude
measurements, so recovery is ill-posed.  Complex entries are built from
independent real and imaginary parts of equal variance, which forces a
vanishing second pseudo-moment E[phi^2] = 0.

Four operators act on a sampled ensemble:

* ``amplitude_op``  -- entrywise |<phi_k, x>|
* ``intensity_op``  -- entrywise |<phi_k, x>|^2
* ``rank_one_op``   -- entrywise phi_k^* X phi_k (signed, linear in X)
* ``lifting_op``    -- (1/m) |phi_k^* X phi_k|^p for p in [1/2, 1]

Inner products are conjugate-linear in the first argument: <phi, x> = phi^* x.
"""

from __future__ import annotations

import dataclasses
import json
import math
import struct

import numpy as np

from . import streams
from .exceptions import DimensionMismatch, InvalidDistribution, InvalidExponent
from .validation import as_vector, check_hermitian, check_positive_int

REAL = "real"
COMPLEX = "complex"

GAUSSIAN = "gaussian"
UNIFORM_SYMMETRIC = "uniform_symmetric"

_FOURTH_MOMENT_FLOOR = 1.0 + 1e-6
_UNIFORM_HALF_WIDTH = math.sqrt(3.0)  # uniform on [-sqrt(3), sqrt(3)] has variance 1

_MAGIC = b"PLAB"
_BINARY_VERSION = 1
_HEADER_FORMAT = "<4sIIQQ4x"  # magic, version, field code, n, m; padded to 32 bytes
_FIELD_CODES = {REAL: 0, COMPLEX: 1}
_FIELD_NAMES = {code: name for name, code in _FIELD_CODES.items()}


@dataclasses.dataclass(frozen=True)
class DiscreteSymmetric:
    """Finite symmetric entry distribution, normalized to unit variance.

    ``values``/``probs`` describe the law before normalization; construction
    rescales the support so the variance is exactly 1.  The distribution must
    have mean zero (symmetry) and a post-normalization fourth moment
    strictly above 1.
    """

    values: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        probs = np.asarray(self.probs, dtype=np.float64)
        if values.ndim != 1 or values.shape != probs.shape or values.size == 0:
            raise InvalidDistribution("values and probs must be matching nonempty 1-d sequences")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise InvalidDistribution("probs must be nonnegative and sum to 1")
        mean = float(probs @ values)
        if abs(mean) > 1e-12:
            raise InvalidDistribution(f"distribution must have mean 0, got {mean}")
        var = float(probs @ values**2)
        if var <= 0:
            raise InvalidDistribution("distribution must have positive variance")
        scaled = values / math.sqrt(var)
        object.__setattr__(self, "values", tuple(float(v) for v in scaled))
        object.__setattr__(self, "probs", tuple(float(p) for p in probs))

    @property
    def fourth_moment(self) -> float:
        v = np.asarray(self.values)
        p = np.asarray(self.probs)
        return float(p @ v**4)


def _real_fourth_moment(dist) -> float:
    if dist == GAUSSIAN:
        return 3.0
    if dist == UNIFORM_SYMMETRIC:
        return 9.0 / 5.0
    if isinstance(dist, DiscreteSymmetric):
        return dist.fourth_moment
    raise InvalidDistribution(f"unknown distribution: {dist!r}")


def entry_fourth_moment(dist, field: str) -> float:
    """Analytic fourth absolute moment of one entry in the given field."""
    mu4 = _real_fourth_moment(dist)
    if field == REAL:
        return mu4
    # |phi|^4 = (a^2 + b^2)^2 with a, b independent copies at variance 1/2.
    return (mu4 + 1.0) / 2.0


@dataclasses.dataclass(frozen=True)
class EnsembleSpec:
    """Full description of a measurement ensemble: field, shape, law, seed."""

    field: str
    n: int
    m: int
    dist: object = GAUSSIAN
    seed: int = 0

    def __post_init__(self):
        if self.field not in (REAL, COMPLEX):
            raise InvalidDistribution(f"field must be '{REAL}' or '{COMPLEX}', got {self.field!r}")
        object.__setattr__(self, "n", check_positive_int(self.n, "n"))
        object.__setattr__(self, "m", check_positive_int(self.m, "m"))
        object.__setattr__(self, "seed", int(self.seed))
        mu4 = entry_fourth_moment(self.dist, self.field)
        if mu4 <= _FOURTH_MOMENT_FLOOR:
            raise InvalidDistribution(
                f"entry fourth moment {mu4:.6g} <= {_FOURTH_MOMENT_FLOOR}; magnitude "
                "measurements cannot separate distinct coordinate signals"
            )

    def to_json(self) -> str:
        return json.dumps(spec_to_dict(self))

    @staticmethod
    def from_json(text: str) -> "EnsembleSpec":
        return spec_from_dict(json.loads(text))


def spec_to_dict(spec: EnsembleSpec) -> dict:
    if isinstance(spec.dist, DiscreteSymmetric):
        dist = {"kind": "discrete_symmetric", "values": list(spec.dist.values),
                "probs": list(spec.dist.probs)}
    else:
        dist = {"kind": spec.dist}
    return {"field": spec.field, "n": spec.n, "m": spec.m, "dist": dist, "seed": spec.seed}


def spec_from_dict(obj: dict) -> EnsembleSpec:
    dist_obj = obj["dist"]
    if isinstance(dist_obj, str):
        dist = dist_obj
    else:
        kind = dist_obj["kind"]
        if kind == "discrete_symmetric":
            dist = DiscreteSymmetric(tuple(dist_obj["values"]), tuple(dist_obj["probs"]))
        else:
            dist = kind
    return EnsembleSpec(field=obj["field"], n=int(obj["n"]), m=int(obj["m"]),
                        dist=dist, seed=int(obj["seed"]))


@dataclasses.dataclass(frozen=True)
class MeasurementMatrix:
    """m sampled measurement vectors as rows, plus the generating spec."""

    rows: np.ndarray
    spec: EnsembleSpec | None = None

    def __post_init__(self):
        rows = np.asarray(self.rows)
        if rows.ndim != 2:
            raise DimensionMismatch(f"rows must be 2-d, got shape {rows.shape}")
        rows = np.ascontiguousarray(
            rows, dtype=np.complex128 if np.iscomplexobj(rows) else np.float64
        )
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def m(self) -> int:
        return self.rows.shape[0]

    @property
    def n(self) -> int:
        return self.rows.shape[1]

    @property
    def field(self) -> str:
        return COMPLEX if np.iscomplexobj(self.rows) else REAL


def _draw_real_entries(dist, size, rng: np.random.Generator) -> np.ndarray:
    if dist == GAUSSIAN:
        return rng.standard_normal(size)
    if dist == UNIFORM_SYMMETRIC:
        return rng.uniform(-_UNIFORM_HALF_WIDTH, _UNIFORM_HALF_WIDTH, size)
    if isinstance(dist, DiscreteSymmetric):
        return rng.choice(np.asarray(dist.values), size=size, p=np.asarray(dist.probs))
    raise InvalidDistribution(f"unknown distribution: {dist!r}")


def _draw_entries(dist, field: str, size, rng: np.random.Generator) -> np.ndarray:
    if field == REAL:
        return _draw_real_entries(dist, size, rng)
    re = _draw_real_entries(dist, size, rng)
    im = _draw_real_entries(dist, size, rng)
    return (re + 1j * im) / math.sqrt(2.0)


def sample_ensemble(spec: EnsembleSpec) -> MeasurementMatrix:
    """Sample the m-by-n measurement matrix described by ``spec``.

    Each row draws from its own stream keyed by (seed, row index), so the
    result is bit-identical regardless of evaluation order or thread count.
    """
    dtype = np.float64 if spec.field == REAL else np.complex128
    rows = np.empty((spec.m, spec.n), dtype=dtype)
    for k in range(spec.m):
        rows[k] = _draw_entries(spec.dist, spec.field, spec.n, streams.stream(spec.seed, "row", k))
    return MeasurementMatrix(rows=rows, spec=spec)


def sample_vectors(spec: EnsembleSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` fresh measurement vectors of dimension spec.n from ``rng``.

    Used by Monte Carlo estimators that need vectors from the ensemble's
    entry law without committing to the spec's row count or seed.
    """
    return _draw_entries(spec.dist, spec.field, (count, spec.n), rng)


@dataclasses.dataclass(frozen=True)
class MomentReport:
    """Sample moments of one ensemble entry, with standard errors."""

    mean: complex
    mean_se: float
    var: float
    var_se: float
    fourth_moment: float
    fourth_moment_se: float
    psi2_proxy: float
    trials: int


def estimate_moments(spec: EnsembleSpec, trials: int = 10_000) -> MomentReport:
    """Monte Carlo check of the entry law: mean, variance, fourth moment.

    ``psi2_proxy`` is the largest value of (E|phi|^q)^(1/q) / sqrt(q) over
    q in {2, 4, 6, 8}, a moment-growth proxy for the subgaussian norm scale.
    """
    trials = check_positive_int(trials, "trials", minimum=1000)
    rng = streams.stream(spec.seed, "moments")
    entries = _draw_entries(spec.dist, spec.field, trials, rng)
    absq = np.abs(entries)
    root = math.sqrt(trials)

    mean = complex(entries.mean())
    mean_se = float(np.std(np.abs(entries - mean))) / root
    sq = absq**2
    var = float(sq.mean() - abs(mean) ** 2)
    var_se = float(sq.std()) / root
    fourth = absq**4
    fourth_moment = float(fourth.mean())
    fourth_moment_se = float(fourth.std()) / root
    psi2_proxy = max(
        float(np.mean(absq**q)) ** (1.0 / q) / math.sqrt(q) for q in (2, 4, 6, 8)
    )
    return MomentReport(
        mean=mean if spec.field == COMPLEX else mean.real,
        mean_se=mean_se,
        var=var,
        var_se=var_se,
        fourth_moment=fourth_moment,
        fourth_moment_se=fourth_moment_se,
        psi2_proxy=psi2_proxy,
        trials=trials,
    )


def measurement_rows(Phi) -> np.ndarray:
    """Accept a MeasurementMatrix or a plain (m, n) array of row vectors."""
    rows = Phi.rows if isinstance(Phi, MeasurementMatrix) else np.asarray(Phi)
    if rows.ndim != 2:
        raise DimensionMismatch(f"measurement rows must be 2-d, got shape {rows.shape}")
    return rows


def inner_products(Phi, x) -> np.ndarray:
    """<phi_k, x> = phi_k^* x for every row."""
    rows = measurement_rows(Phi)
    vec = as_vector(x, n=rows.shape[1])
    return rows.conj() @ vec


def amplitude_op(Phi, x) -> np.ndarray:
    """Magnitude measurements |<phi_k, x>|."""
    return np.abs(inner_products(Phi, x))


def intensity_op(Phi, x) -> np.ndarray:
    """Squared-magnitude measurements |<phi_k, x>|^2."""
    return amplitude_op(Phi, x) ** 2


def rank_one_op(Phi, X) -> np.ndarray:
    """Signed quadratic measurements phi_k^* X phi_k of a symmetric matrix."""
    rows = measurement_rows(Phi)
    mat = check_hermitian(X, n=rows.shape[1])
    # phi^* X phi = sum_i conj(phi_i) (X phi)_i, assembled with two GEMMs.
    prod = rows @ mat.T
    vals = np.einsum("ij,ij->i", rows.conj(), prod)
    return np.ascontiguousarray(vals.real)


def lifting_op(Phi, X, p: float = 1.0) -> np.ndarray:
    """Normalized magnitude measurements (1/m) |phi_k^* X phi_k|^p."""
    pf = float(p)
    if not 0.5 <= pf <= 1.0:
        raise InvalidExponent(f"exponent p must lie in [1/2, 1], got {p}")
    vals = np.abs(rank_one_op(Phi, X))
    return vals**pf / vals.shape[0]


def save_measurements(path, mat: MeasurementMatrix) -> None:
    """Write rows to a flat binary file.

    Layout: 32-byte header (magic, version, field code, n, m) followed by
    row-major little-endian float64 entries; complex entries are stored as
    adjacent real/imag pairs.
    """
    rows = mat.rows
    code = _FIELD_CODES[mat.field]
    header = struct.pack(_HEADER_FORMAT, _MAGIC, _BINARY_VERSION, code, mat.n, mat.m)
    body = np.ascontiguousarray(rows, dtype="<c16" if code else "<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body)


def load_measurements(path) -> MeasurementMatrix:
    """Read a matrix written by :func:`save_measurements` (spec is not stored)."""
    header_size = struct.calcsize(_HEADER_FORMAT)
    with open(path, "rb") as fh:
        header = fh.read(header_size)
        body = fh.read()
    if len(header) != header_size:
        raise ValueError("truncated header")
    magic, version, code, n, m = struct.unpack(_HEADER_FORMAT, header)
    if magic != _MAGIC:
        raise ValueError(f"bad magic {magic!r}, expected {_MAGIC!r}")
    if version != _BINARY_VERSION:
        raise ValueError(f"unsupported version {version}")
    if code not in _FIELD_NAMES:
        raise ValueError(f"unknown field code {code}")
    dtype = "<c16" if code else "<f8"
    expected = m * n * np.dtype(dtype).itemsize
    if len(body) != expected:
        raise ValueError(f"body has {len(body)} bytes, expected {expected}")
    rows = np.frombuffer(body, dtype=dtype).reshape(m, n)
    return MeasurementMatrix(rows=rows.astype(np.complex128 if code else np.float64))
