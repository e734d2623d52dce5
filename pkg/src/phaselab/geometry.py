"""Constraint sets, phase-invariant metrics, projections and sampling.

Vector constraint sets: the full space, s-sparse vectors, or an explicit
finite collection.  Matrix constraint sets: all symmetric matrices, rank-R
symmetric matrices, or jointly row/column-sparse low-rank matrices.

Two metrics quotient out the global phase ambiguity of magnitude
measurements: the aligned Euclidean distance

    dist_d1(u, v) = min over |c| = 1 of ||u - c v||_2

and the lifted Frobenius distance

    dist_d2(u, v) = ||u u^* - v v^*||_F.

Each descriptor also carries closed-form complexity budgets (unit constants)
used to size measurement counts in experiments.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

from .exceptions import DegenerateSample, DimensionMismatch, EigenFailure
from .validation import as_vector, check_hermitian, check_positive_int

_DEGENERATE_NORM = 1e-12
_MAX_RESAMPLES = 100
_SPARSE_LOW_RANK_ROUNDS = 3


# ---------------------------------------------------------------------------
# Descriptors
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class FullSet:
    """All of R^n or C^n."""

    n: int

    def __post_init__(self):
        object.__setattr__(self, "n", check_positive_int(self.n, "n"))


@dataclasses.dataclass(frozen=True)
class SparseSet:
    """Vectors with at most s nonzero entries."""

    n: int
    s: int

    def __post_init__(self):
        object.__setattr__(self, "n", check_positive_int(self.n, "n"))
        object.__setattr__(self, "s", check_positive_int(self.s, "s"))
        if self.s > self.n:
            raise DimensionMismatch(f"s = {self.s} exceeds n = {self.n}")


@dataclasses.dataclass(frozen=True)
class FiniteSet:
    """An explicit nonempty list of candidate vectors, all of one dimension."""

    members: tuple

    def __post_init__(self):
        members = tuple(as_vector(v, name="member") for v in self.members)
        if not members:
            raise DimensionMismatch("finite set must be nonempty")
        n = members[0].shape[0]
        for v in members:
            if v.shape[0] != n:
                raise DimensionMismatch("finite set members must share one dimension")
            v.setflags(write=False)
        object.__setattr__(self, "members", members)

    @property
    def n(self) -> int:
        return self.members[0].shape[0]

    def __len__(self) -> int:
        return len(self.members)


@dataclasses.dataclass(frozen=True)
class FullSymmetricSet:
    """All symmetric (Hermitian) n-by-n matrices."""

    n: int

    def __post_init__(self):
        object.__setattr__(self, "n", check_positive_int(self.n, "n"))


@dataclasses.dataclass(frozen=True)
class LowRankSet:
    """Symmetric matrices of rank at most R."""

    n: int
    rank: int

    def __post_init__(self):
        object.__setattr__(self, "n", check_positive_int(self.n, "n"))
        object.__setattr__(self, "rank", check_positive_int(self.rank, "rank"))
        if self.rank > self.n:
            raise DimensionMismatch(f"rank = {self.rank} exceeds n = {self.n}")


@dataclasses.dataclass(frozen=True)
class SparseLowRankSet:
    """Symmetric matrices of rank <= R supported on at most s rows/columns."""

    n: int
    rank: int
    s: int

    def __post_init__(self):
        object.__setattr__(self, "n", check_positive_int(self.n, "n"))
        object.__setattr__(self, "rank", check_positive_int(self.rank, "rank"))
        object.__setattr__(self, "s", check_positive_int(self.s, "s"))
        if self.s > self.n:
            raise DimensionMismatch(f"s = {self.s} exceeds n = {self.n}")
        if self.rank > self.s:
            raise DimensionMismatch(f"rank = {self.rank} exceeds support size s = {self.s}")


VECTOR_SETS = (FullSet, SparseSet, FiniteSet)
MATRIX_SETS = (FullSymmetricSet, LowRankSet, SparseLowRankSet)


def descriptor_to_dict(desc) -> dict:
    if isinstance(desc, FullSet):
        return {"kind": "full", "n": desc.n}
    if isinstance(desc, SparseSet):
        return {"kind": "sparse", "n": desc.n, "s": desc.s}
    if isinstance(desc, FiniteSet):
        members = []
        for v in desc.members:
            if np.iscomplexobj(v):
                members.append({"re": v.real.tolist(), "im": v.imag.tolist()})
            else:
                members.append(v.tolist())
        return {"kind": "finite", "members": members}
    if isinstance(desc, FullSymmetricSet):
        return {"kind": "full_symmetric", "n": desc.n}
    if isinstance(desc, LowRankSet):
        return {"kind": "low_rank", "n": desc.n, "rank": desc.rank}
    if isinstance(desc, SparseLowRankSet):
        return {"kind": "sparse_low_rank", "n": desc.n, "rank": desc.rank, "s": desc.s}
    raise TypeError(f"not a set descriptor: {desc!r}")


def descriptor_from_dict(obj: dict):
    kind = obj["kind"]
    if kind == "full":
        return FullSet(int(obj["n"]))
    if kind == "sparse":
        return SparseSet(int(obj["n"]), int(obj["s"]))
    if kind == "finite":
        members = []
        for item in obj["members"]:
            if isinstance(item, dict):
                members.append(np.asarray(item["re"]) + 1j * np.asarray(item["im"]))
            else:
                members.append(np.asarray(item, dtype=np.float64))
        return FiniteSet(tuple(members))
    if kind == "full_symmetric":
        return FullSymmetricSet(int(obj["n"]))
    if kind == "low_rank":
        return LowRankSet(int(obj["n"]), int(obj["rank"]))
    if kind == "sparse_low_rank":
        return SparseLowRankSet(int(obj["n"]), int(obj["rank"]), int(obj["s"]))
    raise ValueError(f"unknown set kind: {kind!r}")


def descriptor_to_json(desc) -> str:
    return json.dumps(descriptor_to_dict(desc))


def descriptor_from_json(text: str):
    return descriptor_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def phase_of(z) -> complex | float:
    """Unimodular phase of a scalar; the zero scalar maps to 1."""
    if np.iscomplexobj(z):
        a = abs(z)
        return 1.0 + 0.0j if a == 0 else complex(z) / a
    return 1.0 if z >= 0 else -1.0


@dataclasses.dataclass(frozen=True)
class PhaseDistancePair:
    """Both phase-invariant distances of a pair, plus the aligning phase."""

    d1: float
    d2: float
    aligner: complex


def phase_distances(u, v) -> PhaseDistancePair:
    uu = as_vector(u, name="u")
    vv = as_vector(v, n=uu.shape[0], name="v")
    nu = float(np.linalg.norm(uu))
    nv = float(np.linalg.norm(vv))
    overlap = complex(np.vdot(vv, uu))  # v^* u
    d1_sq = nu**2 + nv**2 - 2.0 * abs(overlap)
    d1 = math.sqrt(max(d1_sq, 0.0))
    d2_sq = nu**4 + nv**4 - 2.0 * abs(overlap) ** 2
    d2 = math.sqrt(max(d2_sq, 0.0))
    return PhaseDistancePair(d1=d1, d2=d2, aligner=phase_of(overlap))


def dist_d1(u, v) -> float:
    """min over |c| = 1 of ||u - c v||_2 (c is real-signed for real inputs)."""
    return phase_distances(u, v).d1


def dist_d2(u, v) -> float:
    """||u u^* - v v^*||_F via the closed form in norms and overlap."""
    return phase_distances(u, v).d2


def dist_for(ell: int, u, v) -> float:
    return dist_d1(u, v) if ell == 1 else dist_d2(u, v)


# ---------------------------------------------------------------------------
# Projections
# ---------------------------------------------------------------------------

def project(desc, x) -> np.ndarray:
    """Project a vector onto the descriptor's set.

    Full: identity.  Sparse: keep the s largest-magnitude entries.  Finite:
    the nearest member under dist_d1, ties broken by lowest index.
    """
    if isinstance(desc, FullSet):
        return as_vector(x, n=desc.n)
    if isinstance(desc, SparseSet):
        vec = as_vector(x, n=desc.n).copy()
        if desc.s < desc.n:
            drop = np.argpartition(np.abs(vec), desc.n - desc.s)[: desc.n - desc.s]
            vec[drop] = 0
        return vec
    if isinstance(desc, FiniteSet):
        vec = as_vector(x, n=desc.n)
        dists = [dist_d1(vec, member) for member in desc.members]
        return desc.members[int(np.argmin(dists))].copy()
    raise TypeError(f"not a vector set descriptor: {desc!r}")


def _rank_truncate(X: np.ndarray, rank: int) -> np.ndarray:
    try:
        w, V = np.linalg.eigh(X)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    keep = np.argsort(np.abs(w))[::-1][:rank]
    Vk = V[:, keep]
    out = (Vk * w[keep]) @ Vk.conj().T
    return (out + out.conj().T) / 2.0


def _support_truncate(X: np.ndarray, s: int) -> tuple[np.ndarray, np.ndarray]:
    row_norms = np.linalg.norm(X, axis=1)
    support = np.sort(np.argsort(row_norms)[::-1][:s])
    out = np.zeros_like(X)
    grid = np.ix_(support, support)
    out[grid] = X[grid]
    return out, support


def project_matrix(desc, X) -> np.ndarray:
    """Project a matrix onto the descriptor's set.

    The joint sparse/low-rank case alternates support selection (largest row
    norms) with rank truncation for a fixed number of rounds; it lands in the
    set but is not guaranteed to be the metric projection.
    """
    if isinstance(desc, FullSymmetricSet):
        mat = check_hermitian(X, n=desc.n)
        return (mat + mat.conj().T) / 2.0
    if isinstance(desc, LowRankSet):
        mat = check_hermitian(X, n=desc.n)
        return _rank_truncate((mat + mat.conj().T) / 2.0, desc.rank)
    if isinstance(desc, SparseLowRankSet):
        mat = check_hermitian(X, n=desc.n)
        cur = (mat + mat.conj().T) / 2.0
        for _ in range(_SPARSE_LOW_RANK_ROUNDS):
            cur, _support = _support_truncate(cur, desc.s)
            cur = _rank_truncate(cur, desc.rank)
        return cur
    raise TypeError(f"not a matrix set descriptor: {desc!r}")


# ---------------------------------------------------------------------------
# Complexity budgets (unit constants)
# ---------------------------------------------------------------------------

def gamma2_budget(desc) -> float:
    """Closed-form width budget of the normalized set, absolute constants set to 1.

    Full(n) -> sqrt(n); Sparse(n, s) -> sqrt(s log(e n / s));
    Finite(T) -> sqrt(log |T|).
    """
    if isinstance(desc, FullSet):
        return math.sqrt(desc.n)
    if isinstance(desc, SparseSet):
        return math.sqrt(desc.s * math.log(math.e * desc.n / desc.s))
    if isinstance(desc, FiniteSet):
        return math.sqrt(math.log(len(desc)))
    raise TypeError(f"not a vector set descriptor: {desc!r}")


@dataclasses.dataclass(frozen=True)
class MatrixBudget:
    """Width/operator-norm/trace budgets and the implied measurement count."""

    gamma2_sq: float
    gamma1: float
    trace_sup: float

    @property
    def m_budget(self) -> float:
        return self.gamma2_sq + self.gamma1 + self.trace_sup**2


def matrix_budget(desc) -> MatrixBudget:
    """Unit-constant budgets for the matrix descriptors.

    LowRank(n, R): gamma2_sq = gamma1 = R n, trace_sup = sqrt(2R).
    SparseLowRank(n, R, s): gamma2_sq = gamma1 = R s log(e n / s),
    trace_sup = sqrt(2R).  FullSymmetric(n): the rank-n case with the exact
    trace bound sqrt(n).
    """
    if isinstance(desc, LowRankSet):
        base = float(desc.rank * desc.n)
        return MatrixBudget(gamma2_sq=base, gamma1=base, trace_sup=math.sqrt(2.0 * desc.rank))
    if isinstance(desc, SparseLowRankSet):
        base = desc.rank * desc.s * math.log(math.e * desc.n / desc.s)
        return MatrixBudget(gamma2_sq=base, gamma1=base, trace_sup=math.sqrt(2.0 * desc.rank))
    if isinstance(desc, FullSymmetricSet):
        base = float(desc.n * desc.n)
        return MatrixBudget(gamma2_sq=base, gamma1=base, trace_sup=math.sqrt(desc.n))
    raise TypeError(f"not a matrix set descriptor: {desc!r}")


def nuclear_ratio_sq(desc) -> float:
    """Squared worst-case nuclear-to-Frobenius ratio over normalized differences."""
    if isinstance(desc, (LowRankSet, SparseLowRankSet)):
        return 2.0 * desc.rank
    if isinstance(desc, FullSymmetricSet):
        return float(desc.n)
    raise TypeError(f"not a matrix set descriptor: {desc!r}")


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------

def _unit_vector(n: int, rng: np.random.Generator, complex_field: bool) -> np.ndarray:
    v = rng.standard_normal(n)
    if complex_field:
        v = v + 1j * rng.standard_normal(n)
    norm = np.linalg.norm(v)
    return v / norm if norm > 0 else v


def _member(desc, rng: np.random.Generator, complex_field: bool) -> np.ndarray:
    """One raw (unnormalized) element of the set."""
    if isinstance(desc, FullSet):
        v = rng.standard_normal(desc.n)
        return v + 1j * rng.standard_normal(desc.n) if complex_field else v
    if isinstance(desc, SparseSet):
        v = np.zeros(desc.n, dtype=np.complex128 if complex_field else np.float64)
        support = rng.choice(desc.n, size=desc.s, replace=False)
        vals = rng.standard_normal(desc.s)
        if complex_field:
            vals = vals + 1j * rng.standard_normal(desc.s)
        v[support] = vals
        return v
    if isinstance(desc, FiniteSet):
        return desc.members[int(rng.integers(len(desc)))].copy()
    if isinstance(desc, FullSymmetricSet):
        A = rng.standard_normal((desc.n, desc.n))
        if complex_field:
            A = A + 1j * rng.standard_normal((desc.n, desc.n))
        return (A + A.conj().T) / 2.0
    if isinstance(desc, LowRankSet):
        return _low_rank_element(desc.n, desc.rank, None, rng, complex_field)
    if isinstance(desc, SparseLowRankSet):
        support = np.sort(rng.choice(desc.n, size=desc.s, replace=False))
        return _low_rank_element(desc.n, desc.rank, support, rng, complex_field)
    raise TypeError(f"not a set descriptor: {desc!r}")


def _low_rank_element(n, rank, support, rng, complex_field) -> np.ndarray:
    dim = n if support is None else len(support)
    G = rng.standard_normal((dim, rank))
    if complex_field:
        G = G + 1j * rng.standard_normal((dim, rank))
    lam = rng.standard_normal(rank)
    core = (G * lam) @ G.conj().T
    core = (core + core.conj().T) / 2.0
    if support is None:
        return core
    out = np.zeros((n, n), dtype=core.dtype)
    out[np.ix_(support, support)] = core
    return out


def _set_norm(x: np.ndarray) -> float:
    return float(np.linalg.norm(x))  # Frobenius for matrices, l2 for vectors


def sample_cone_sphere(desc, rng: np.random.Generator, complex_field: bool = False) -> np.ndarray:
    """Unit-norm element of the set's cone (l2 sphere or Frobenius sphere)."""
    for _ in range(_MAX_RESAMPLES):
        x = _member(desc, rng, complex_field)
        norm = _set_norm(x)
        if norm > _DEGENERATE_NORM:
            return x / norm
    raise DegenerateSample("set sampler produced only near-zero elements")


def sample_difference_sphere(desc, rng: np.random.Generator,
                             complex_field: bool = False) -> np.ndarray:
    """Unit-norm normalized difference of two independent set members."""
    for _ in range(_MAX_RESAMPLES):
        diff = _member(desc, rng, complex_field) - _member(desc, rng, complex_field)
        norm = _set_norm(diff)
        if norm > _DEGENERATE_NORM:
            return diff / norm
    raise DegenerateSample("difference sampler produced only near-zero elements")
