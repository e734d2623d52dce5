"""Experiment harness: JSON configs, runners, and deterministic CSV output.

A config is a single JSON document with a mandatory seed; runs never fall
back to wall-clock seeding.  Given the same config, the CSV body and JSON
summary are byte-identical across runs and thread counts; timestamps and
host details go to a separate metadata file.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import streams
from .version import __version__ as _pkg_version
from .adversarial import sharpness_experiment
from .certificates import (
    chaos_S,
    compare_chaos_bounds,
    embed_bounds,
    injectivity_constant_lower,
    rademacher_R,
    small_ball_Q,
    stability_constant_lower,
)
from .ensembles import (
    EnsembleSpec,
    amplitude_op,
    intensity_op,
    rank_one_op,
    sample_ensemble,
    spec_from_dict,
    spec_to_dict,
)
from .exceptions import ConfigError, PhaseLabError
from .geometry import (
    MATRIX_SETS,
    VECTOR_SETS,
    descriptor_from_dict,
    descriptor_to_dict,
    gamma2_budget,
    matrix_budget,
    sample_cone_sphere,
)
from .solvers import SolverConfig, solve_matrix, solve_phase

KINDS = ("recover", "stability", "injectivity", "embed", "smallball", "chaos",
         "adversarial", "sweep")

NOISE_NONE = {"kind": "none"}


def _parse_set(obj: dict):
    """Set descriptors from JSON; "signed_identity" expands to the explicit
    two-element matrix collection {+I/sqrt(n), -I/sqrt(n)} used by chaos runs."""
    if obj.get("kind") == "signed_identity":
        n = int(obj["n"])
        eye = np.eye(n) / math.sqrt(n)
        return [eye, -eye]
    return descriptor_from_dict(obj)


def _descriptor_label(constraint) -> str:
    if constraint is None:
        return ""
    if isinstance(constraint, (list, tuple)):
        return json.dumps({"kind": "explicit", "count": len(constraint)})
    return json.dumps(descriptor_to_dict(constraint), sort_keys=True)


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; see ``from_dict`` for the schema."""

    kind: str
    seed: int
    ensemble: EnsembleSpec
    output: str
    constraint: object = None
    constraint2: object = None
    solver: SolverConfig | None = None
    q: float = 2.0
    ell: int = 2
    p: float = 1.0
    xi: float = 0.5
    variant: str = "Stilde"
    trials: int = 100
    inner_samples: int = 100
    mc_outer: int = 50
    mc_inner: int = 100
    n_matrices: int = 50
    noise: dict = dataclasses.field(default_factory=lambda: dict(NOISE_NONE))
    oversample_factors: tuple[float, ...] = ()
    success_threshold: float = 1e-2
    mode: str = "phase"

    @staticmethod
    def from_dict(obj: dict) -> "ExperimentConfig":
        try:
            kind = obj["kind"]
            if kind not in KINDS:
                raise ConfigError(f"unknown experiment kind: {kind!r}")
            if "seed" not in obj:
                raise ConfigError("config must carry an explicit seed")
            ensemble = spec_from_dict(obj["ensemble"])
            constraint = _parse_set(obj["set"]) if "set" in obj else None
            constraint2 = _parse_set(obj["set2"]) if "set2" in obj else None
            solver = SolverConfig(**obj["solver"]) if "solver" in obj else None
            cfg = ExperimentConfig(
                kind=kind,
                seed=int(obj["seed"]),
                ensemble=ensemble,
                output=str(obj.get("output", kind)),
                constraint=constraint,
                constraint2=constraint2,
                solver=solver,
                q=float(obj.get("q", 2.0)),
                ell=int(obj.get("ell", 2)),
                p=float(obj.get("p", 1.0)),
                xi=float(obj.get("xi", 0.5)),
                variant=str(obj.get("variant", "Stilde")),
                trials=int(obj.get("trials", 100)),
                inner_samples=int(obj.get("inner_samples", 100)),
                mc_outer=int(obj.get("mc_outer", 50)),
                mc_inner=int(obj.get("mc_inner", 100)),
                n_matrices=int(obj.get("n_matrices", 50)),
                noise=dict(obj.get("noise", NOISE_NONE)),
                oversample_factors=tuple(obj.get("oversample_factors", ())),
                success_threshold=float(obj.get("success_threshold", 1e-2)),
                mode=str(obj.get("mode", "phase")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid config: {exc}") from exc
        cfg._validate()
        return cfg

    @staticmethod
    def from_json(text: str) -> "ExperimentConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        return ExperimentConfig.from_dict(obj)

    def _validate(self):
        needs_set = {"recover", "stability", "injectivity", "embed", "smallball",
                     "chaos", "sweep"}
        if self.kind in needs_set and self.constraint is None:
            raise ConfigError(f"kind {self.kind!r} requires a 'set' descriptor")
        if self.kind in ("recover", "sweep") and self.solver is None:
            raise ConfigError(f"kind {self.kind!r} requires a 'solver' section")
        if self.kind == "sweep" and not self.oversample_factors:
            raise ConfigError("sweep requires nonempty 'oversample_factors'")
        if self.kind in ("injectivity", "smallball") and not isinstance(
                self.constraint, MATRIX_SETS):
            raise ConfigError(f"kind {self.kind!r} requires a matrix set")
        if self.kind == "adversarial" and self.mode not in ("phase", "matrix"):
            raise ConfigError("adversarial mode must be 'phase' or 'matrix'")


def _format_value(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def write_csv(path, header: list[str], rows: list[dict]) -> None:
    """RFC-4180 CSV with '.' decimals and 17 significant digits for floats."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_value(row[col]) for col in header])


def _map_indexed(fn, count: int, threads: int) -> list:
    """Order-preserving map over range(count), optionally on a thread pool."""
    if threads <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


# ---------------------------------------------------------------------------
# Recovery runners
# ---------------------------------------------------------------------------

def _apply_noise(b: np.ndarray, noise: dict, rng: np.random.Generator) -> np.ndarray:
    kind = noise.get("kind", "none")
    if kind == "none":
        return b
    if kind == "gaussian":
        sigma = float(noise["sigma"])
        rms = float(np.sqrt(np.mean(b**2))) or 1.0
        return b + sigma * rms * rng.standard_normal(b.shape[0])
    if kind == "outliers":
        fraction = float(noise["fraction"])
        scale = float(noise.get("scale", 10.0))
        count = int(round(fraction * b.shape[0]))
        out = b.copy()
        if count > 0:
            idx = rng.choice(b.shape[0], size=count, replace=False)
            rms = float(np.sqrt(np.mean(b**2))) or 1.0
            out[idx] += scale * rms * rng.standard_normal(count)
        return out
    raise ConfigError(f"unknown noise kind: {kind!r}")


def _ground_truth(constraint, rng, complex_field):
    return sample_cone_sphere(constraint, rng, complex_field)


def _recover_one(cfg: ExperimentConfig, trial: int, rows_m: int,
                 base_rows: np.ndarray | None = None) -> dict:
    """One recovery trial: fresh truth + measurements, solve, report errors."""
    if base_rows is None:
        spec = dataclasses.replace(cfg.ensemble, m=rows_m,
                                   seed=_derived_seed(cfg.seed, "ensemble", trial))
        rows = sample_ensemble(spec).rows
    else:
        rows = base_rows[:rows_m]
    rng = streams.stream(cfg.seed, "truth", trial)
    complex_field = cfg.ensemble.field == "complex"
    matrix_mode = isinstance(cfg.constraint, MATRIX_SETS)
    truth = _ground_truth(cfg.constraint, rng, complex_field)
    if matrix_mode:
        b_clean = rank_one_op(rows, truth)
    else:
        op = amplitude_op if cfg.ell == 1 else intensity_op
        b_clean = op(rows, truth)
    b = _apply_noise(b_clean, cfg.noise, streams.stream(cfg.seed, "noise", trial))
    solver = dataclasses.replace(cfg.solver, q=cfg.q)
    if matrix_mode:
        report = solve_matrix(rows, b, cfg.constraint, solver,
                              seed=_derived_seed(cfg.seed, "solver", trial), X_true=truth)
        rel_error = report.frobenius_error  # truth has unit Frobenius norm
    else:
        report = solve_phase(cfg.ell, rows, b, cfg.constraint, solver,
                             seed=_derived_seed(cfg.seed, "solver", trial), x_true=truth)
        rel_error = report.d2_error  # truth has unit l2 norm, so ||truth truth^*||_F = 1
    return {
        "trial": trial,
        "m": rows_m,
        "n": cfg.ensemble.n,
        "q": cfg.q,
        "ell_or_matrix": "matrix" if matrix_mode else cfg.ell,
        "objective": report.objective_final,
        "rel_error": float(rel_error),
        "success": int(rel_error <= cfg.success_threshold),
        "restart_index": report.restart_index,
        "iterations": report.iterations_used,
    }


def _derived_seed(seed: int, label: str, index: int) -> int:
    return int(streams.stream(seed, label, index).integers(0, 2**63 - 1))


_RECOVER_HEADER = ["trial", "m", "n", "q", "ell_or_matrix", "objective",
                   "rel_error", "success", "restart_index", "iterations"]


def run_recover(cfg: ExperimentConfig, threads: int = 1):
    rows = _map_indexed(lambda t: _recover_one(cfg, t, cfg.ensemble.m),
                        cfg.trials, threads)
    errors = np.array([r["rel_error"] for r in rows])
    summary = {
        "kind": "recover",
        "trials": cfg.trials,
        "success_rate": float(np.mean([r["success"] for r in rows])),
        "median_rel_error": float(np.median(errors)),
        "success_threshold": cfg.success_threshold,
    }
    return _RECOVER_HEADER, rows, summary


def _budget_for(constraint) -> float:
    if isinstance(constraint, VECTOR_SETS):
        return gamma2_budget(constraint) ** 2
    return matrix_budget(constraint).m_budget


def run_sweep(cfg: ExperimentConfig, threads: int = 1):
    """Oversampling sweep; each trial reuses one base ensemble, and each
    sweep point reads a prefix of its rows, so success is nested in m."""
    budget = _budget_for(cfg.constraint)
    factors = sorted(cfg.oversample_factors)
    ms = [max(1, int(math.ceil(f * budget))) for f in factors]
    m_max = ms[-1]

    def one_trial(trial: int) -> list[dict]:
        spec = dataclasses.replace(cfg.ensemble, m=m_max,
                                   seed=_derived_seed(cfg.seed, "ensemble", trial))
        base = sample_ensemble(spec).rows
        out = []
        for factor, rows_m in zip(factors, ms):
            row = _recover_one(cfg, trial, rows_m, base_rows=base)
            row["oversample"] = factor
            out.append(row)
        return out

    nested = _map_indexed(one_trial, cfg.trials, threads)
    rows = [row for per_trial in nested for row in per_trial]
    header = ["oversample"] + _RECOVER_HEADER
    rates = {}
    for factor in factors:
        here = [r["success"] for r in rows if r["oversample"] == factor]
        rates[factor] = float(np.mean(here))
    ordered = [rates[f] for f in factors]
    summary = {
        "kind": "sweep",
        "budget": budget,
        "oversample_factors": list(factors),
        "m_values": ms,
        "success_rates": ordered,
        "monotone_nondecreasing": bool(
            all(a <= b + 1e-12 for a, b in zip(ordered, ordered[1:]))),
        "trials_per_point": cfg.trials,
    }
    return header, rows, summary


# ---------------------------------------------------------------------------
# Certificate runners
# ---------------------------------------------------------------------------

_CERT_HEADER = ["experiment", "descriptor", "m", "q", "ell_or_p", "statistic",
                "q01", "median", "q99", "trials", "seed"]


def _cert_row(kind, descriptor, m, q, ell_or_p, cert) -> dict:
    return {
        "experiment": kind,
        "descriptor": _descriptor_label(descriptor),
        "m": m,
        "q": q,
        "ell_or_p": ell_or_p,
        "statistic": cert.statistic,
        "q01": cert.quantiles[0],
        "median": cert.quantiles[1],
        "q99": cert.quantiles[2],
        "trials": cert.trials,
        "seed": cert.seed,
    }


def run_stability(cfg: ExperimentConfig, threads: int = 1):
    Phi = sample_ensemble(cfg.ensemble)
    cert = stability_constant_lower(Phi, cfg.constraint, cfg.ell, cfg.q,
                                    pairs=cfg.trials, seed=cfg.seed)
    row = _cert_row("stability", cfg.constraint, cfg.ensemble.m, cfg.q, cfg.ell, cert)
    return _CERT_HEADER, [row], {"kind": "stability", **cert.to_dict()}


def run_injectivity(cfg: ExperimentConfig, threads: int = 1):
    Phi = sample_ensemble(cfg.ensemble)
    cert = injectivity_constant_lower(Phi, cfg.constraint, cfg.q,
                                      samples=cfg.trials, seed=cfg.seed)
    row = _cert_row("injectivity", cfg.constraint, cfg.ensemble.m, cfg.q, "", cert)
    return _CERT_HEADER, [row], {"kind": "injectivity", **cert.to_dict()}


def run_embed(cfg: ExperimentConfig, threads: int = 1):
    Phi = sample_ensemble(cfg.ensemble)
    lower, upper = embed_bounds(Phi, cfg.p, cfg.constraint, cfg.constraint2,
                                samples=cfg.trials, seed=cfg.seed)
    rows = [
        _cert_row("embed_lower", cfg.constraint, cfg.ensemble.m, cfg.q, cfg.p, lower),
        _cert_row("embed_upper", cfg.constraint, cfg.ensemble.m, cfg.q, cfg.p, upper),
    ]
    summary = {"kind": "embed", "lower": lower.to_dict(), "upper": upper.to_dict()}
    return _CERT_HEADER, rows, summary


def run_smallball(cfg: ExperimentConfig, threads: int = 1):
    cert = small_ball_Q(cfg.ensemble, cfg.constraint, cfg.xi, trials=cfg.trials,
                        n_matrices=cfg.n_matrices, seed=cfg.seed)
    row = _cert_row("smallball", cfg.constraint, cfg.ensemble.m, cfg.q, cfg.xi, cert)
    return _CERT_HEADER, [row], {"kind": "smallball", **cert.to_dict()}


def run_chaos(cfg: ExperimentConfig, threads: int = 1):
    cert = chaos_S(cfg.ensemble, cfg.constraint, cfg.ensemble.m, variant=cfg.variant,
                   trials=cfg.trials, inner_samples=cfg.inner_samples, seed=cfg.seed)
    row = _cert_row("chaos_" + cfg.variant, cfg.constraint, cfg.ensemble.m,
                    cfg.q, cfg.variant, cert)
    summary = {"kind": "chaos", "variant": cfg.variant, **cert.to_dict()}
    if not isinstance(cfg.constraint, (list, tuple)):
        bounds = compare_chaos_bounds(cfg.constraint, cfg.ensemble.m)
        summary.update(bound_with_trace_term=bounds.with_trace_term,
                       bound_with_nuclear_factor=bounds.with_nuclear_factor,
                       nuclear_ratio_sq=bounds.nuclear_ratio_sq)
    return _CERT_HEADER, [row], summary


_ADVERSARIAL_HEADER = ["trial", "seed", "n", "m", "q", "ell_or_matrix",
                       "d_error", "z_norm_q", "ratio", "residual_q"]


def run_adversarial(cfg: ExperimentConfig, threads: int = 1):
    rows, summary = sharpness_experiment(cfg.ensemble, cfg.mode, cfg.q,
                                         trials=cfg.trials, ell=cfg.ell,
                                         seed=cfg.seed)
    return _ADVERSARIAL_HEADER, rows, {"kind": "adversarial", **summary}


_RUNNERS = {
    "recover": run_recover,
    "sweep": run_sweep,
    "stability": run_stability,
    "injectivity": run_injectivity,
    "embed": run_embed,
    "smallball": run_smallball,
    "chaos": run_chaos,
    "adversarial": run_adversarial,
}


def run(config: ExperimentConfig, out_dir, threads: int = 1) -> dict:
    """Execute one experiment and write <output>.csv / _summary.json / _meta.json.

    Returns the summary dict.  Raises ConfigError for bad configs and
    PhaseLabError subclasses for runtime failures.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    header, rows, summary = _RUNNERS[config.kind](config, threads=threads)
    write_csv(out / f"{config.output}.csv", header, rows)
    summary_full = {
        "config_kind": config.kind,
        "seed": config.seed,
        "ensemble": spec_to_dict(config.ensemble),
        **summary,
    }
    with open(out / f"{config.output}_summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary_full, fh, indent=2, sort_keys=True)
        fh.write("\n")
    meta = {
        "wall_seconds": time.time() - started,
        "started_unix": started,
        "threads": threads,
        "phaselab_version": _pkg_version,
    }
    with open(out / f"{config.output}_meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary_full
