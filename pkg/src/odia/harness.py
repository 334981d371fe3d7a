"""Experiment orchestration: configs, seeded sweeps, aggregation, emission.

Configs are flat ``key = value`` text with dotted sections, for example::

    network.K = 3
    network.M = 4
    network.L = 2
    network.N = 20
    network.S = 2
    network.snr_db = 20
    algorithms = odia, se_odia, min_inr, max_snr
    sweep.variable = snr_db
    sweep.grid = -5, 0, 5, 10, 15, 20, 25, 30
    trials = 2000
    master_seed = 1

Any key can be overridden by an environment variable named ``ODIA_`` plus
the key upper-cased with dots replaced by underscores (``ODIA_NETWORK_K``).
Results are byte-reproducible for a given config and master seed, for any
worker count: per-trial seeds depend only on (master seed, grid value,
trial index) and reduction happens in fixed trial order.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .channel import NetworkConfig, NetworkRealization, db_to_linear, generate_realization
from .codebook import Codebook, grassmannian_codebook, load_codebook, random_codebook
from .errors import ConfigError, NumericalFailure, SingularMatrixError
from .metrics import TrialMetrics, trial_metrics
from .numerics import DEFAULT_CONDITION_CAP, Rng, mix64
from .precoder import partial_zero_forcing_precoder, quantized_precoder, zero_forcing_precoder
from .receiver import CellReports, cell_reports
from .scheduler import (
    OUTAGE_POLICIES,
    ScheduleDecision,
    SeOdiaParams,
    max_snr_reports,
    schedule_max_snr,
    schedule_min_inr,
    schedule_odia,
    schedule_se_odia,
)

ALGORITHMS = ("odia", "se_odia", "odia_lf", "max_snr", "min_inr")
SWEEP_VARIABLES = ("snr_db", "n_users", "n_feedback_bits", "eta_I", "eta_D", "alpha")
ENV_PREFIX = "ODIA_"
MAX_RESAMPLES = 20

CSV_COLUMNS = (
    "sweep_var", "value", "algorithm",
    "mean_sum_rate", "se_sum_rate",
    "mean_sum_interference", "se_sum_interference",
    "outage_rate", "trials", "seed",
)


@dataclass(frozen=True)
class FeedbackConfig:
    """Codebook setup for limited-feedback operation."""

    kind: str = "random"            # random | grassmannian | file
    bits: Optional[int] = None      # codebook size 2**bits
    size: Optional[int] = None      # explicit size, overrides bits
    path: Optional[str] = None      # codebook file for kind=file
    gain_exponent: int = 2          # channel magnitude fed to reconstruction
    redraw_per_trial: bool = True   # fresh random codebook each trial
    iterations: int = 500           # packing refinement iterations

    def resolved_size(self) -> int:
        if self.size is not None:
            return int(self.size)
        if self.bits is not None:
            return 2 ** int(self.bits)
        raise ConfigError("limited feedback needs feedback.bits, feedback.size, or a file path")


@dataclass(frozen=True)
class SeOdiaSpec:
    """Raw semiorthogonal-selection settings; resolved per operating point."""

    preset: str = "fixed"           # fixed | odia_compat | theorem
    eta_I: float = 1.0
    eta_D: float = 1.0
    alpha: float = 0.8
    epsilon_D: float = 0.5
    epsilon_I: float = 1.0

    def resolve(self, snr: float) -> SeOdiaParams:
        if self.preset == "fixed":
            return SeOdiaParams(eta_I=self.eta_I, eta_D=self.eta_D, alpha=self.alpha)
        if self.preset == "odia_compat":
            return SeOdiaParams.odia_compat()
        if self.preset == "theorem":
            return SeOdiaParams.theorem_schedule(
                self.epsilon_D, self.epsilon_I, snr, alpha=self.alpha
            )
        raise ConfigError(f"unknown se_odia preset {self.preset!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    K: int = 3
    M: int = 4
    L: int = 2
    N: int = 20
    S: int = 2
    snr_db: float = 20.0
    algorithms: Tuple[str, ...] = ("odia",)
    sweep_variable: str = "snr_db"
    grid: Tuple[float, ...] = (20.0,)
    trials: int = 2000
    master_seed: int = 1
    feedback: FeedbackConfig = field(default_factory=FeedbackConfig)
    se_odia: SeOdiaSpec = field(default_factory=SeOdiaSpec)
    outage_policy: str = "fallback-min-eta"
    condition_cap: float = DEFAULT_CONDITION_CAP
    gridsearch_eta_I: Tuple[float, ...] = ()
    gridsearch_eta_D: Tuple[float, ...] = ()
    gridsearch_alpha: Tuple[float, ...] = ()

    def __post_init__(self):
        if not self.algorithms:
            raise ConfigError("need at least one algorithm")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {algo!r} (choices: {ALGORITHMS})")
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ConfigError(
                f"unknown sweep variable {self.sweep_variable!r} (choices: {SWEEP_VARIABLES})"
            )
        if not self.grid:
            raise ConfigError("sweep grid must be nonempty")
        diffs = np.diff(np.asarray(self.grid, dtype=float))
        if diffs.size and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ConfigError("sweep grid must be strictly monotone")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.outage_policy not in OUTAGE_POLICIES:
            raise ConfigError(f"unknown outage policy {self.outage_policy!r}")
        if "odia_lf" in self.algorithms and self.feedback.path is None:
            self.feedback.resolved_size()  # raises ConfigError when unresolvable
        self.base_network()  # validates the network block

    def base_network(self) -> NetworkConfig:
        return NetworkConfig(self.K, self.M, self.L, self.N, self.S, db_to_linear(self.snr_db))

    def canonical_text(self) -> str:
        lines = [
            f"network.K = {self.K}",
            f"network.M = {self.M}",
            f"network.L = {self.L}",
            f"network.N = {self.N}",
            f"network.S = {self.S}",
            f"network.snr_db = {self.snr_db!r}",
            f"algorithms = {', '.join(self.algorithms)}",
            f"sweep.variable = {self.sweep_variable}",
            f"sweep.grid = {', '.join(repr(v) for v in self.grid)}",
            f"trials = {self.trials}",
            f"master_seed = {self.master_seed}",
            f"feedback.kind = {self.feedback.kind}",
            f"feedback.bits = {self.feedback.bits}",
            f"feedback.size = {self.feedback.size}",
            f"feedback.path = {self.feedback.path}",
            f"feedback.gain_exponent = {self.feedback.gain_exponent}",
            f"feedback.redraw_per_trial = {self.feedback.redraw_per_trial}",
            f"feedback.iterations = {self.feedback.iterations}",
            f"se_odia.preset = {self.se_odia.preset}",
            f"se_odia.eta_I = {self.se_odia.eta_I!r}",
            f"se_odia.eta_D = {self.se_odia.eta_D!r}",
            f"se_odia.alpha = {self.se_odia.alpha!r}",
            f"se_odia.epsilon_D = {self.se_odia.epsilon_D!r}",
            f"se_odia.epsilon_I = {self.se_odia.epsilon_I!r}",
            f"outage_policy = {self.outage_policy}",
            f"condition_cap = {self.condition_cap!r}",
        ]
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode("ascii")).hexdigest()[:16]


# --------------------------------------------------------------------------
# Config parsing

def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {raw!r}")


def _parse_float_list(raw: str) -> Tuple[float, ...]:
    items = [p.strip() for p in raw.split(",") if p.strip()]
    try:
        return tuple(float(p) for p in items)
    except ValueError as exc:
        raise ConfigError(f"bad numeric list {raw!r}: {exc}") from None


def _parse_str_list(raw: str) -> Tuple[str, ...]:
    return tuple(p.strip() for p in raw.split(",") if p.strip())


_KEY_PARSERS = {
    "network.k": ("K", int),
    "network.m": ("M", int),
    "network.l": ("L", int),
    "network.n": ("N", int),
    "network.s": ("S", int),
    "network.snr_db": ("snr_db", float),
    "algorithms": ("algorithms", _parse_str_list),
    "algorithm": ("algorithms", _parse_str_list),
    "sweep.variable": ("sweep_variable", str),
    "sweep.grid": ("grid", _parse_float_list),
    "trials": ("trials", int),
    "master_seed": ("master_seed", int),
    "feedback.kind": (("feedback", "kind"), str),
    "feedback.bits": (("feedback", "bits"), int),
    "feedback.size": (("feedback", "size"), int),
    "feedback.path": (("feedback", "path"), str),
    "feedback.gain_exponent": (("feedback", "gain_exponent"), int),
    "feedback.redraw_per_trial": (("feedback", "redraw_per_trial"), _parse_bool),
    "feedback.iterations": (("feedback", "iterations"), int),
    "se_odia.preset": (("se_odia", "preset"), str),
    "se_odia.eta_i": (("se_odia", "eta_I"), float),
    "se_odia.eta_d": (("se_odia", "eta_D"), float),
    "se_odia.alpha": (("se_odia", "alpha"), float),
    "se_odia.epsilon_d": (("se_odia", "epsilon_D"), float),
    "se_odia.epsilon_i": (("se_odia", "epsilon_I"), float),
    "outage_policy": ("outage_policy", str),
    "condition_cap": ("condition_cap", float),
    "gridsearch.eta_i": ("gridsearch_eta_I", _parse_float_list),
    "gridsearch.eta_d": ("gridsearch_eta_D", _parse_float_list),
    "gridsearch.alpha": ("gridsearch_alpha", _parse_float_list),
}


def _env_overrides() -> Dict[str, str]:
    overrides = {}
    by_env_name = {key.replace(".", "_").upper(): key for key in _KEY_PARSERS}
    for name, value in os.environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        key = by_env_name.get(name[len(ENV_PREFIX):].upper())
        if key is not None:
            overrides[key] = value
    return overrides


def parse_config(text: str, apply_env: bool = True) -> ExperimentConfig:
    """Parse flat key=value text (``#`` starts a comment)."""
    raw: Dict[str, str] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {line!r}")
        key, value = stripped.split("=", 1)
        key = key.strip().lower()
        if key not in _KEY_PARSERS:
            raise ConfigError(f"line {line_no}: unknown config key {key.strip()!r}")
        raw[key] = value.strip()
    if apply_env:
        raw.update(_env_overrides())

    top: Dict[str, object] = {}
    feedback: Dict[str, object] = {}
    se: Dict[str, object] = {}
    for key, raw_value in raw.items():
        target, parser = _KEY_PARSERS[key]
        try:
            value = parser(raw_value)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {raw_value!r} ({exc})") from None
        if isinstance(target, tuple):
            section, attr = target
            (feedback if section == "feedback" else se)[attr] = value
        else:
            top[target] = value
    return ExperimentConfig(
        feedback=FeedbackConfig(**feedback),
        se_odia=SeOdiaSpec(**se),
        **top,
    )


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def preset_names() -> Tuple[str, ...]:
    files = resources.files("odia").joinpath("presets")
    return tuple(sorted(p.name[:-4] for p in files.iterdir() if p.name.endswith(".cfg")))


def load_preset(name: str) -> ExperimentConfig:
    ref = resources.files("odia").joinpath("presets").joinpath(f"{name}.cfg")
    if not ref.is_file():
        raise ConfigError(f"unknown preset {name!r} (available: {', '.join(preset_names())})")
    return parse_config(ref.read_text(encoding="utf-8"))


# --------------------------------------------------------------------------
# Point resolution and the per-trial pipeline

@dataclass(frozen=True)
class PointSetup:
    """One grid point, fully resolved."""

    network: NetworkConfig
    algorithms: Tuple[str, ...]
    feedback: FeedbackConfig
    se_params: SeOdiaParams
    outage_policy: str
    condition_cap: float
    fixed_codebook: Optional[Codebook] = None


def resolve_point(cfg: ExperimentConfig, value: float) -> PointSetup:
    net = cfg.base_network()
    feedback = cfg.feedback
    se_spec = cfg.se_odia
    var = cfg.sweep_variable
    if var == "snr_db":
        net = net.with_snr(db_to_linear(value))
    elif var == "n_users":
        net = net.with_users(int(round(value)))
    elif var == "n_feedback_bits":
        feedback = replace(feedback, bits=int(round(value)), size=None)
    elif var == "eta_I":
        se_spec = replace(se_spec, preset="fixed", eta_I=float(value))
    elif var == "eta_D":
        se_spec = replace(se_spec, preset="fixed", eta_D=float(value))
    elif var == "alpha":
        se_spec = replace(se_spec, preset="fixed", alpha=float(value))
    else:
        raise ConfigError(f"unknown sweep variable {var!r}")

    fixed_cb = None
    if any(a == "odia_lf" for a in cfg.algorithms):
        if feedback.kind == "file":
            if feedback.path is None:
                raise ConfigError("feedback.kind=file needs feedback.path")
            fixed_cb = load_codebook(feedback.path)
            if fixed_cb.dimension != net.S:
                raise ConfigError(
                    f"codebook dimension {fixed_cb.dimension} does not match S={net.S}"
                )
        elif feedback.kind == "grassmannian":
            size = feedback.resolved_size()
            seed = mix64(cfg.master_seed, 0xC0DEB00C, size, net.S)
            fixed_cb, _ = grassmannian_codebook(
                Rng(seed), net.S, size, iterations=feedback.iterations
            )
        elif feedback.kind == "random":
            if not feedback.redraw_per_trial:
                size = feedback.resolved_size()
                seed = mix64(cfg.master_seed, 0xC0DEB00C, size, net.S)
                fixed_cb = random_codebook(Rng(seed), net.S, size)
        else:
            raise ConfigError(f"unknown feedback kind {feedback.kind!r}")

    return PointSetup(
        network=net,
        algorithms=cfg.algorithms,
        feedback=feedback,
        se_params=se_spec.resolve(net.snr),
        outage_policy=cfg.outage_policy,
        condition_cap=cfg.condition_cap,
        fixed_codebook=fixed_cb,
    )


@dataclass(frozen=True)
class TrialSummary:
    sum_rate: float
    sum_interference: float
    outage_count: int
    resamples: int


def _silent_precoder(streams: int, cell: int):
    from .precoder import PrecoderSet

    return PrecoderSet(
        cell=cell,
        matrix=np.zeros((streams, 0), dtype=np.complex128),
        gains=np.zeros(0),
        basis=np.zeros((0, streams), dtype=np.complex128),
    )


def _exact_precoder(reports: CellReports, decision: ScheduleDecision, cap: float):
    rows = [reports.effective[j] for j in decision.selected]
    if not rows:
        return _silent_precoder(reports.effective.shape[1], decision.cell)
    if len(rows) == reports.effective.shape[1]:
        return zero_forcing_precoder(rows, cell=decision.cell, condition_cap=cap)
    return partial_zero_forcing_precoder(rows, cell=decision.cell, condition_cap=cap)


def _run_algorithm(
    algo: str,
    real: NetworkRealization,
    setup: PointSetup,
    rng: Rng,
    codebook: Optional[Codebook],
) -> TrialMetrics:
    cfg = real.config
    cap = setup.condition_cap
    decisions: List[ScheduleDecision] = []
    precoders = []
    reports: List[CellReports] = []

    for i in range(cfg.K):
        if algo == "odia":
            reps = cell_reports(real, i)
            dec = schedule_odia(reps)
            pre = _exact_precoder(reps, dec, cap)
        elif algo == "odia_lf":
            reps = cell_reports(real, i, codebook)
            dec = schedule_odia(reps)
            selected_q = [reps.report(j).effective_channel for j in dec.selected]
            pre = quantized_precoder(
                selected_q, codebook, cell=i,
                gain_exponent=setup.feedback.gain_exponent, condition_cap=cap,
            )
        elif algo == "se_odia":
            reps = cell_reports(real, i)
            dec = schedule_se_odia(
                reps, setup.se_params, rng.derive(0x5E0D1A, i),
                outage_policy=setup.outage_policy,
            )
            pre = _exact_precoder(reps, dec, cap)
        elif algo == "max_snr":
            reps = max_snr_reports(real, i)
            dec = schedule_max_snr(real, i, reports=reps)
            pre = _exact_precoder(reps, dec, cap)
        elif algo == "min_inr":
            dec, reps = schedule_min_inr(real, i)
            pre = _exact_precoder(reps, dec, cap)
        else:
            raise ConfigError(f"unknown algorithm {algo!r}")
        decisions.append(dec)
        precoders.append(pre)
        reports.append(reps)

    return trial_metrics(real, decisions, precoders, reports)


def run_trial(setup: PointSetup, seed: int) -> Dict[str, TrialSummary]:
    """One Monte Carlo trial: every configured algorithm on a shared block.

    A near-singular precoder basis triggers a resample of the whole block
    for the affected algorithm (bounded by MAX_RESAMPLES); the realization
    cache keeps all algorithms on the same draw in the normal case.
    """
    base = Rng(seed)
    realizations: Dict[int, NetworkRealization] = {}

    def realization(attempt: int) -> NetworkRealization:
        if attempt not in realizations:
            realizations[attempt] = generate_realization(
                setup.network, base.derive(0xB10C, attempt)
            )
        return realizations[attempt]

    needs_cb = any(a == "odia_lf" for a in setup.algorithms)
    codebook = setup.fixed_codebook
    if needs_cb and codebook is None:
        codebook = random_codebook(
            base.derive(0xFEEDBACC), setup.network.S, setup.feedback.resolved_size()
        )

    results: Dict[str, TrialSummary] = {}
    for algo in setup.algorithms:
        attempt = 0
        while True:
            try:
                tm = _run_algorithm(
                    algo, realization(attempt), setup, base.derive(0xA160, attempt), codebook
                )
                break
            except SingularMatrixError:
                attempt += 1
                if attempt > MAX_RESAMPLES:
                    raise NumericalFailure(
                        f"{algo}: {MAX_RESAMPLES} consecutive singular precoder draws"
                    ) from None
        results[algo] = TrialSummary(
            sum_rate=tm.sum_rate,
            sum_interference=tm.sum_interference,
            outage_count=tm.outage_count,
            resamples=attempt,
        )
    return results


def _point_value_key(value: float) -> int:
    return int(np.float64(value).view(np.uint64))


def trial_seed(master_seed: int, value: float, trial: int) -> int:
    return mix64(master_seed, _point_value_key(value), trial)


def _trial_task(args):
    setup, seed = args
    return run_trial(setup, seed)


def run_point_samples(
    cfg: ExperimentConfig,
    value: float,
    trials: Optional[int] = None,
    workers: int = 1,
    setup: Optional[PointSetup] = None,
) -> Dict[str, Dict[str, np.ndarray]]:
    """Per-trial samples for one grid point, keyed by algorithm."""
    if setup is None:
        setup = resolve_point(cfg, value)
    n = trials if trials is not None else cfg.trials
    seeds = [trial_seed(cfg.master_seed, value, t) for t in range(n)]
    tasks = [(setup, s) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_trial_task, tasks, chunksize=max(1, n // (workers * 4))))
    else:
        outcomes = [run_trial(setup, s) for s in seeds]

    samples: Dict[str, Dict[str, np.ndarray]] = {}
    for algo in cfg.algorithms:
        samples[algo] = {
            "sum_rate": np.array([o[algo].sum_rate for o in outcomes]),
            "sum_interference": np.array([o[algo].sum_interference for o in outcomes]),
            "outage_count": np.array([o[algo].outage_count for o in outcomes]),
            "resamples": np.array([o[algo].resamples for o in outcomes]),
        }
    return samples


# --------------------------------------------------------------------------
# Sweeps and aggregation

@dataclass(frozen=True)
class AlgorithmStats:
    algorithm: str
    mean_sum_rate: float
    se_sum_rate: float
    mean_sum_interference: float
    se_sum_interference: float
    outage_rate: float
    trials: int


@dataclass(frozen=True)
class PointResult:
    value: float
    stats: Tuple[AlgorithmStats, ...]


@dataclass(frozen=True)
class SweepResult:
    sweep_variable: str
    points: Tuple[PointResult, ...]
    master_seed: int
    config_hash: str
    version: str
    resample_counts: Tuple[int, ...] = ()  # row-aligned (point-major) totals


def _standard_error(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1) / np.sqrt(values.size))


def run_sweep(cfg: ExperimentConfig, workers: int = 1) -> SweepResult:
    """Run every grid point and aggregate per-algorithm statistics."""
    points: List[PointResult] = []
    resamples: List[int] = []
    for value in cfg.grid:
        setup = resolve_point(cfg, value)
        samples = run_point_samples(cfg, value, workers=workers, setup=setup)
        slots = setup.network.K * setup.network.S
        stats = []
        for algo in cfg.algorithms:
            s = samples[algo]
            stats.append(
                AlgorithmStats(
                    algorithm=algo,
                    mean_sum_rate=float(np.mean(s["sum_rate"])),
                    se_sum_rate=_standard_error(s["sum_rate"]),
                    mean_sum_interference=float(np.mean(s["sum_interference"])),
                    se_sum_interference=_standard_error(s["sum_interference"]),
                    outage_rate=float(np.sum(s["outage_count"]) / (cfg.trials * slots)),
                    trials=cfg.trials,
                )
            )
            resamples.append(int(np.sum(s["resamples"])))
        points.append(PointResult(value=float(value), stats=tuple(stats)))
    return SweepResult(
        sweep_variable=cfg.sweep_variable,
        points=tuple(points),
        master_seed=cfg.master_seed,
        config_hash=cfg.config_hash(),
        version=__version__,
        resample_counts=tuple(resamples),
    )


# --------------------------------------------------------------------------
# Parameter grid search

@dataclass(frozen=True)
class GridSearchRow:
    eta_I: float
    eta_D: float
    alpha: float
    mean_sum_rate: float
    se_sum_rate: float


@dataclass(frozen=True)
class GridSearchResult:
    best: SeOdiaParams
    best_mean_sum_rate: float
    table: Tuple[GridSearchRow, ...]
    trials: int
    master_seed: int


def grid_search_se_odia(
    cfg: ExperimentConfig,
    eta_I_grid: Optional[Sequence[float]] = None,
    eta_D_grid: Optional[Sequence[float]] = None,
    alpha_grid: Optional[Sequence[float]] = None,
    workers: int = 1,
) -> GridSearchResult:
    """Mean sum-rate of semiorthogonal selection for every threshold triple.

    All triples share the same per-trial seeds (common random numbers), so
    the argmax is a paired comparison.  Ties go to the first triple in
    (eta_I, eta_D, alpha) iteration order.
    """
    eta_I_grid = tuple(eta_I_grid if eta_I_grid is not None else cfg.gridsearch_eta_I)
    eta_D_grid = tuple(eta_D_grid if eta_D_grid is not None else cfg.gridsearch_eta_D)
    alpha_grid = tuple(alpha_grid if alpha_grid is not None else cfg.gridsearch_alpha)
    if not (eta_I_grid and eta_D_grid and alpha_grid):
        raise ConfigError("grid search needs nonempty eta_I, eta_D, and alpha grids")

    net = cfg.base_network()
    seeds = [mix64(cfg.master_seed, 0x9059, t) for t in range(cfg.trials)]
    rows: List[GridSearchRow] = []
    best_row = None
    best_params = None
    for eta_i in eta_I_grid:
        for eta_d in eta_D_grid:
            for alpha in alpha_grid:
                params = SeOdiaParams(eta_I=eta_i, eta_D=eta_d, alpha=alpha)
                setup = PointSetup(
                    network=net,
                    algorithms=("se_odia",),
                    feedback=cfg.feedback,
                    se_params=params,
                    outage_policy=cfg.outage_policy,
                    condition_cap=cfg.condition_cap,
                )
                tasks = [(setup, s) for s in seeds]
                if workers > 1:
                    with ProcessPoolExecutor(max_workers=workers) as pool:
                        outcomes = list(pool.map(_trial_task, tasks, chunksize=16))
                else:
                    outcomes = [run_trial(setup, s) for s in seeds]
                rates = np.array([o["se_odia"].sum_rate for o in outcomes])
                row = GridSearchRow(
                    eta_I=float(eta_i),
                    eta_D=float(eta_d),
                    alpha=float(alpha),
                    mean_sum_rate=float(np.mean(rates)),
                    se_sum_rate=_standard_error(rates),
                )
                rows.append(row)
                if best_row is None or row.mean_sum_rate > best_row.mean_sum_rate:
                    best_row = row
                    best_params = params
    return GridSearchResult(
        best=best_params,
        best_mean_sum_rate=best_row.mean_sum_rate,
        table=tuple(rows),
        trials=cfg.trials,
        master_seed=cfg.master_seed,
    )


# --------------------------------------------------------------------------
# Emission

def sweep_rows(result: SweepResult):
    """Rows in CSV column order."""
    rows = []
    for point in result.points:
        for st in point.stats:
            rows.append({
                "sweep_var": result.sweep_variable,
                "value": point.value,
                "algorithm": st.algorithm,
                "mean_sum_rate": st.mean_sum_rate,
                "se_sum_rate": st.se_sum_rate,
                "mean_sum_interference": st.mean_sum_interference,
                "se_sum_interference": st.se_sum_interference,
                "outage_rate": st.outage_rate,
                "trials": st.trials,
                "seed": result.master_seed,
            })
    return rows


def sweep_to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in sweep_rows(result):
        writer.writerow([
            row["sweep_var"], repr(float(row["value"])), row["algorithm"],
            repr(float(row["mean_sum_rate"])), repr(float(row["se_sum_rate"])),
            repr(float(row["mean_sum_interference"])), repr(float(row["se_sum_interference"])),
            repr(float(row["outage_rate"])), row["trials"], row["seed"],
        ])
    return buf.getvalue()


def sweep_to_json(result: SweepResult) -> str:
    payload = {
        "schema_version": 1,
        "sweep_var": result.sweep_variable,
        "rows": sweep_rows(result),
        "provenance": {
            "config_hash": result.config_hash,
            "master_seed": result.master_seed,
            "version": result.version,
            "resample_counts": list(result.resample_counts),
        },
    }
    return json.dumps(payload, sort_keys=True, indent=1) + "\n"


def load_sweep_result(path) -> SweepResult:
    """Rebuild a SweepResult from its JSON emission (exact round trip)."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("schema_version") != 1:
        raise ConfigError(f"unsupported schema_version {payload.get('schema_version')!r}")
    prov = payload["provenance"]
    points: List[PointResult] = []
    current_value = None
    current_stats: List[AlgorithmStats] = []
    for row in payload["rows"]:
        if current_value is None or row["value"] != current_value:
            if current_stats:
                points.append(PointResult(value=current_value, stats=tuple(current_stats)))
            current_value = row["value"]
            current_stats = []
        current_stats.append(AlgorithmStats(
            algorithm=row["algorithm"],
            mean_sum_rate=row["mean_sum_rate"],
            se_sum_rate=row["se_sum_rate"],
            mean_sum_interference=row["mean_sum_interference"],
            se_sum_interference=row["se_sum_interference"],
            outage_rate=row["outage_rate"],
            trials=row["trials"],
        ))
    if current_stats:
        points.append(PointResult(value=current_value, stats=tuple(current_stats)))
    return SweepResult(
        sweep_variable=payload["sweep_var"],
        points=tuple(points),
        master_seed=prov["master_seed"],
        config_hash=prov["config_hash"],
        version=prov["version"],
        resample_counts=tuple(prov["resample_counts"]),
    )


def emit_results(result: SweepResult, fmt: str, path) -> None:
    """Write a sweep result as ``csv`` or ``json``."""
    if fmt == "csv":
        text = sweep_to_csv(result)
    elif fmt == "json":
        text = sweep_to_json(result)
    else:
        raise ConfigError(f"unknown output format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def gridsearch_to_csv(result: GridSearchResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["eta_I", "eta_D", "alpha", "mean_sum_rate", "se_sum_rate", "trials", "seed"])
    for row in result.table:
        writer.writerow([
            repr(row.eta_I), repr(row.eta_D), repr(row.alpha),
            repr(row.mean_sum_rate), repr(row.se_sum_rate),
            result.trials, result.master_seed,
        ])
    return buf.getvalue()
