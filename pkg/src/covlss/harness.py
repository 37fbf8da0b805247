"""Experiment orchestration: config, deterministic parallel replication, reports.

Replication index, not worker, owns the RNG stream, so outputs are
byte-identical for any worker count.  Workers are taken from the
``COVLSS_WORKERS`` environment variable unless set explicitly; the
default is a single in-process loop.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import VERSION_STRING
from .enumeration import (
    EnumerationGuardError,
    FiniteMomentReport,
    IdentityReport,
    verify_finite_n_moments,
    verify_fourth_moment,
    verify_quadratic_covariance,
    verify_triple_product,
)
from .inference import QQReport, check_covariance, qq_report, whiten
from .innovations import parse_dist, rademacher, two_point
from .lss import ReplicationResult, SampleConfig, run_replication
from .moments import MomentSet, moment_set
from .population import PopulationModel, SpectrumSpec, assemble_model, build_model
from .seeding import ROTATION_STREAM, SPECTRUM_STREAM, derive_seed
from .symmat import SymMatrix

WORKERS_ENV_VAR = "COVLSS_WORKERS"
VERIFY_THRESHOLD = 1e-9

_FORMATS = ("csv", "json", "both")


class ConfigError(ValueError):
    """An experiment configuration field is missing or malformed."""


@dataclass
class ExperimentConfig:
    p: int
    n: int
    alpha: float = 0.0
    beta: float = 0.0
    dist: str = "normal"
    reps: int = 10000
    master_seed: int = 0
    centered: bool = False
    max_power: int = 2
    diagonal_only: bool = False
    output_dir: str = "out"
    fmt: str = "both"
    grid_size: int = 199
    workers: int | None = None

    def validate(self) -> None:
        if self.p < 1:
            raise ConfigError(f"p must be a positive integer, got {self.p}")
        if self.n < 2:
            raise ConfigError(f"n must be at least 2, got {self.n}")
        if self.alpha < 0:
            raise ConfigError(f"alpha must be >= 0, got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must lie in [0, 1], got {self.beta}")
        if self.reps < 1:
            raise ConfigError(f"reps must be a positive integer, got {self.reps}")
        if not 1 <= self.max_power <= 4:
            raise ConfigError(f"max_power must be in 1..4, got {self.max_power}")
        if self.fmt not in _FORMATS:
            raise ConfigError(f"format must be one of {_FORMATS}, got {self.fmt!r}")
        if self.grid_size < 2:
            raise ConfigError(f"grid_size must be at least 2, got {self.grid_size}")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers must be a positive integer, got {self.workers}")
        parse_dist(self.dist)  # raises ValueError on a bad selector

    def digest(self) -> str:
        """Digest of every field that affects the statistical output."""
        payload = {
            "p": self.p,
            "n": self.n,
            "alpha": self.alpha,
            "beta": self.beta,
            "dist": self.dist,
            "reps": self.reps,
            "master_seed": self.master_seed,
            "centered": self.centered,
            "max_power": self.max_power,
            "diagonal_only": self.diagonal_only,
            "grid_size": self.grid_size,
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def resolve_workers(cfg_workers: int | None) -> int:
    if cfg_workers is not None:
        return cfg_workers
    env = os.environ.get(WORKERS_ENV_VAR, "").strip()
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise ConfigError(f"{WORKERS_ENV_VAR} must be an integer, got {env!r}") from exc
        if value < 1:
            raise ConfigError(f"{WORKERS_ENV_VAR} must be >= 1, got {value}")
        return value
    return 1


def build_experiment_model(cfg: ExperimentConfig) -> PopulationModel:
    """The population model implied by a config, frozen by the master seed."""
    rng = np.random.default_rng(derive_seed(cfg.master_seed, SPECTRUM_STREAM))
    r = rng.random(cfg.p)
    while np.any(r == 0.0):  # Uniform(0,1) draws must stay in the open interval
        r[r == 0.0] = rng.random(int(np.sum(r == 0.0)))
    spec = SpectrumSpec(
        p=cfg.p,
        n=cfg.n,
        alpha=cfg.alpha,
        beta=cfg.beta,
        r_values=r,
        diagonal_only=cfg.diagonal_only,
    )
    return build_model(spec, derive_seed(cfg.master_seed, ROTATION_STREAM))


def _replicate_block(args) -> list[ReplicationResult]:
    model, dist_selector, n, master_seed, max_power, centered, start, stop = args
    dist = parse_dist(dist_selector)
    out = []
    for rep in range(start, stop):
        cfg = SampleConfig(
            model=model,
            dist=dist,
            n=n,
            replication_index=rep,
            master_seed=master_seed,
            max_power=max_power,
            centered=centered,
        )
        out.append(run_replication(cfg))
    return out


def run_replications(
    model: PopulationModel, cfg: ExperimentConfig, workers: int
) -> list[ReplicationResult]:
    """All replications, in replication-index order regardless of scheduling."""
    base = (model, cfg.dist, cfg.n, cfg.master_seed, cfg.max_power, cfg.centered)
    if workers <= 1:
        return _replicate_block(base + (0, cfg.reps))
    block = max(1, -(-cfg.reps // (workers * 4)))
    jobs = [
        base + (start, min(start + block, cfg.reps))
        for start in range(0, cfg.reps, block)
    ]
    results: list[ReplicationResult] = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for chunk in pool.map(_replicate_block, jobs):
            results.extend(chunk)
    results.sort(key=lambda r: r.replication_index)
    return results


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    moments: MomentSet
    qq: QQReport
    qq_centered: QQReport | None
    files: list[str]


def _fmt17(v: float) -> str:
    return f"{v:.17g}"


def _write_qq_csv(path: Path, report: QQReport) -> None:
    lines = ["prob,q_theoretical,q_empirical"]
    for p, qt, qe in zip(report.probs, report.q_theoretical, report.q_empirical):
        lines.append(f"{_fmt17(p)},{_fmt17(qt)},{_fmt17(qe)}")
    path.write_text("\n".join(lines) + "\n")


def _qq_arrays(report: QQReport) -> dict:
    return {
        "prob": [float(v) for v in report.probs],
        "q_theoretical": [float(v) for v in report.q_theoretical],
        "q_empirical": [float(v) for v in report.q_empirical],
    }


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Build the model once, replicate, whiten, and write the reports.

    Raises :class:`ConfigError` on bad input and
    :class:`DegenerateCovarianceError` when the (dist, spectrum)
    combination yields a singular covariance of (T1, T2).
    """
    cfg.validate()
    workers = resolve_workers(cfg.workers)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    model = build_experiment_model(cfg)
    dist = parse_dist(cfg.dist)
    ms = moment_set(model.traces, cfg.n, dist.profile.nu4, centered=cfg.centered)
    check_covariance(
        ms,
        context=f"dist={cfg.dist}, spectrum p={cfg.p} alpha={cfg.alpha} "
        f"beta={cfg.beta} diagonal_only={cfg.diagonal_only}",
    )

    results = run_replications(model, cfg, workers)
    digest = cfg.digest()
    ts = np.array([whiten(r.t[0], r.t[1], ms).ts for r in results])
    qq = qq_report(ts, "chi2_df2", cfg.grid_size, config_digest=digest)

    qq_centered = None
    notes: list[str] = []
    if cfg.centered:
        centered_ms = ms.centered_view()
        ts0 = np.array(
            [whiten(r.t_centered[0], r.t_centered[1], centered_ms).ts for r in results]
        )
        qq_centered = qq_report(ts0, "chi2_df2", cfg.grid_size, config_digest=digest)
        notes.append(
            "centered mean convention: E T1^0 = (1 - 1/n) tr(Sigma) for the "
            "divisor-n centered sample covariance, validated by enumeration"
        )

    files: list[str] = []
    write_csv = cfg.fmt in ("csv", "both")
    embed_json = cfg.fmt in ("json", "both")
    if write_csv:
        qq_path = out_dir / "qq.csv"
        _write_qq_csv(qq_path, qq)
        files.append(str(qq_path))
        if qq_centered is not None:
            qqc_path = out_dir / "qq_centered.csv"
            _write_qq_csv(qqc_path, qq_centered)
            files.append(str(qqc_path))

    config_out = dataclasses.asdict(cfg)
    config_out["format"] = config_out.pop("fmt")
    config_out["workers"] = workers
    summary = {
        "version": VERSION_STRING,
        "config": config_out,
        "config_digest": digest,
        "reps": cfg.reps,
        "ks": qq.ks,
        "moments": ms.as_dict(),
        "model": {
            "p": model.p,
            "top_eigenvalue": float(model.eigenvalues[0]),
            "traces": model.traces.as_dict(),
        },
        "centered": None if qq_centered is None else {"ks": qq_centered.ks},
        "notes": notes,
    }
    if embed_json:
        summary["qq"] = _qq_arrays(qq)
        if qq_centered is not None:
            summary["qq_centered"] = _qq_arrays(qq_centered)
    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    files.append(str(summary_path))

    return ExperimentResult(
        config=cfg, moments=ms, qq=qq, qq_centered=qq_centered, files=files
    )


# --- verification suite -----------------------------------------------------


@dataclass(frozen=True)
class VerificationSummary:
    cases: list[dict]
    max_abs_err: dict[str, float]
    threshold: float
    ok: bool
    files: list[str]


def _random_symmetric(rng: np.random.Generator, dim: int) -> SymMatrix:
    a = rng.uniform(-1.0, 1.0, size=(dim, dim))
    return SymMatrix(0.5 * (a + a.T))


def _verification_dists():
    # two-point members carry mu3 != 0, which the triple-product identity needs
    return [rademacher(), two_point(0.2), two_point(0.35)]


def _finite_moment_grid() -> list[tuple[PopulationModel, int]]:
    theta = np.pi / 4
    rot = np.array(
        [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
    )
    models = []
    for p, n in ((1, 2), (2, 2), (2, 3)):
        if p == 1:
            models.append((assemble_model([1.0]), n))
            models.append((assemble_model([2.0]), n))
        else:
            models.append((assemble_model([1.0, 1.0]), n))
            models.append((assemble_model([2.0, 1.0]), n))
            models.append((assemble_model([2.0, 1.0], rot), n))
    return models


def run_verification_suite(
    max_dim: int, cases: int, seed: int, output_dir: str | None = None
) -> VerificationSummary:
    """Randomized identity checks plus the fixed finite-n moment grid.

    ``cases`` random (matrix, distribution) draws are checked per
    identity at dimensions 1..max_dim; a report row is emitted per check
    and the suite passes only if every exact comparison stays within
    ``VERIFY_THRESHOLD``.
    """
    if max_dim > 4:
        raise EnumerationGuardError(f"max_dim is capped at 4, got {max_dim}")
    if max_dim < 1:
        raise ConfigError(f"max_dim must be at least 1, got {max_dim}")
    if cases < 1:
        raise ConfigError(f"cases must be at least 1, got {cases}")

    rng = np.random.default_rng(seed)
    dists = _verification_dists()
    reports: list[IdentityReport | FiniteMomentReport] = []
    for i in range(cases):
        dim = int(rng.integers(1, max_dim + 1))
        a = _random_symmetric(rng, dim)
        b = _random_symmetric(rng, dim)
        dist = dists[i % len(dists)]
        reports.append(verify_quadratic_covariance(a, b, dist))
        reports.append(verify_fourth_moment(a, dist))
        reports.append(verify_triple_product(a, b, dist))
    for model, n in _finite_moment_grid():
        for dist in (rademacher(), two_point(0.2)):
            reports.append(verify_finite_n_moments(model, n, dist))

    max_err: dict[str, float] = {}
    for r in reports:
        row = r.as_dict()
        max_err[row["lemma"]] = max(max_err.get(row["lemma"], 0.0), row["abs_err"])
    ok = all(v <= VERIFY_THRESHOLD for v in max_err.values())

    files: list[str] = []
    if output_dir is not None:
        out_dir = Path(output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        payload = {
            "version": VERSION_STRING,
            "threshold": VERIFY_THRESHOLD,
            "max_abs_err": max_err,
            "ok": ok,
            "cases": [r.as_dict() for r in reports],
        }
        path = out_dir / "verify.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        files.append(str(path))

    return VerificationSummary(
        cases=[r.as_dict() for r in reports],
        max_abs_err=max_err,
        threshold=VERIFY_THRESHOLD,
        ok=ok,
        files=files,
    )
