"""Statistical oracles for the simulator's distributional behavior.

These routines check the laws the scheduling pipeline is supposed to
exhibit: the power-law tail of the leakage metric near zero, the
quantization-distortion law of random codebooks, gamma-family fits for
projected channel gains, the decay of sum-interference with the user count,
and the eligibility probabilities of semiorthogonal selection.

A note on conventions: squared norms of complex unit-variance vectors follow
Gamma(r, 1) laws (each |entry|^2 is a unit-mean exponential).  The "2r
degrees of freedom" language maps onto that via the regularized lower
incomplete gamma CDF evaluated at x directly, gammainc(r, x), which is what
:func:`chi_squared_gof` uses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from .channel import NetworkConfig, generate_realization
from .errors import ConfigError
from .numerics import Rng
from .receiver import cell_reports
from .scheduler import SeOdiaParams, schedule_se_odia


@dataclass(frozen=True)
class TailExponentReport:
    """Power-law fit of the metric CDF near zero: F(x) ~ c0 * x^tau."""

    fitted_exponent: float
    theoretical_exponent: Optional[float]
    c0: float
    fit_range: Tuple[float, float]
    sample_count: int
    r_squared: float


def theoretical_tail_exponent(cfg: NetworkConfig) -> float:
    """Tail exponent of the leakage-metric CDF: (K-1)S - L + 1."""
    return float((cfg.K - 1) * cfg.S - cfg.L + 1)


def fit_tail_exponent(
    samples: Sequence[float],
    cfg: Optional[NetworkConfig] = None,
    tail_fraction: float = 0.10,
    bins: int = 25,
) -> TailExponentReport:
    """Fit log F(x) = log c0 + tau log x over the lower tail.

    Uses the samples below the ``tail_fraction`` quantile.  The fit is least
    squares over log-spaced bins of log x (equal bin weight); weighting each
    sample equally would let the top of the tail region, where the power law
    is already bending, dominate the slope.
    """
    samples = np.sort(np.asarray(samples, dtype=float))
    n = samples.size
    if n < 10_000:
        raise ValueError(f"need at least 1e4 samples for a tail fit, got {n}")
    k = int(n * tail_fraction)
    tail = samples[:k]
    positive = tail > 0
    tail = tail[positive]
    ecdf = (np.flatnonzero(positive) + 1.0) / n
    log_x = np.log(tail)
    log_f = np.log(ecdf)

    edges = np.linspace(log_x[0], log_x[-1], bins + 1)
    which = np.clip(np.searchsorted(edges, log_x, side="right") - 1, 0, bins - 1)
    bx, by = [], []
    for b in range(bins):
        mask = which == b
        if mask.sum() >= 3:
            bx.append(log_x[mask].mean())
            by.append(log_f[mask].mean())
    bx = np.asarray(bx)
    by = np.asarray(by)
    if bx.size < 3:
        raise ValueError("tail region too degenerate to fit (fewer than 3 usable bins)")
    slope, intercept = np.polyfit(bx, by, 1)
    pred = slope * bx + intercept
    ss_res = float(np.sum((by - pred) ** 2))
    ss_tot = float(np.sum((by - by.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0

    return TailExponentReport(
        fitted_exponent=float(slope),
        theoretical_exponent=theoretical_tail_exponent(cfg) if cfg is not None else None,
        c0=float(np.exp(intercept)),
        fit_range=(float(tail[0]), float(tail[-1])),
        sample_count=n,
        r_squared=min(max(r_squared, 0.0), 1.0),
    )


def chi_squared_gof(samples: Sequence[float], dof: int) -> float:
    """Kolmogorov-Smirnov distance to the chi-squared law with ``dof``
    degrees of freedom in the complex-vector convention.

    The reference CDF is the regularized lower incomplete gamma
    gammainc(dof/2, x): the law of a squared norm over dof/2 complex
    unit-variance entries (a sum of dof/2 unit-mean exponentials).
    """
    if dof < 1:
        raise ValueError("dof must be >= 1")
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < 1000:
        raise ValueError(f"need at least 1e3 samples, got {n}")
    cdf = special.gammainc(dof / 2.0, x)
    grid = np.arange(n)
    d_plus = np.max((grid + 1) / n - cdf)
    d_minus = np.max(cdf - grid / n)
    return float(max(d_plus, d_minus))


def decay_regression(points: Sequence[Tuple[float, float]]) -> float:
    """Log-log least-squares slope of mean sum-interference versus N.

    ``points`` are (user count, mean sum-interference) pairs; needs at least
    4 counts spanning at least 1.5 decades.
    """
    pts = sorted((float(n), float(v)) for n, v in points)
    if len(pts) < 4:
        raise ConfigError("need at least 4 user-count points")
    n_vals = np.array([p[0] for p in pts])
    y_vals = np.array([p[1] for p in pts])
    if np.any(n_vals <= 0) or np.any(y_vals <= 0):
        raise ConfigError("user counts and interference values must be positive")
    if np.log10(n_vals[-1] / n_vals[0]) < 1.5 - 1e-9:
        raise ConfigError("user-count grid must span at least 1.5 decades")
    return float(np.polyfit(np.log(n_vals), np.log(y_vals), 1)[0])


@dataclass(frozen=True)
class EligibilityStep:
    """Empirical selection statistics for one stream slot."""

    step: int
    pr_c1: float
    pr_c2: float
    pr_c2_closed_form: float
    p_eligible: float          # at least one pool user passed both conditions
    mean_pool_size: float
    outage_rate: float


@dataclass(frozen=True)
class EligibilityReport:
    params: SeOdiaParams
    config: NetworkConfig
    trials: int
    steps: Tuple[EligibilityStep, ...]


def closed_form_c2(streams: int, step: int, eta_D: float) -> float:
    """Probability that a projected gain clears eta_D.

    The projected gain at step s is Gamma(S - s + 1, 1) distributed (s is
    1-based), so the survival probability is the regularized upper
    incomplete gamma at eta_D.
    """
    shape = streams - step + 1
    if shape < 1:
        raise ValueError("step must be between 1 and S")
    return float(special.gammaincc(shape, eta_D))


def eligibility_probe(
    cfg: NetworkConfig,
    params: SeOdiaParams,
    trials: int,
    seed: int = 0,
) -> EligibilityReport:
    """Measure C1/C2 pass rates and outage odds of semiorthogonal selection.

    Runs ``trials`` independent blocks on cell 0 and averages the per-step
    trace statistics.  Only range checks are guaranteed; the closed-form C2
    column is exact for unconditioned pools (alpha = 1) and approximate
    otherwise.
    """
    if trials < 1000:
        raise ValueError("need at least 1e3 trials")
    master = Rng(seed)
    s_total = cfg.S
    acc_c1 = np.zeros(s_total)
    acc_c2 = np.zeros(s_total)
    acc_pool = np.zeros(s_total)
    acc_any = np.zeros(s_total)
    acc_outage = np.zeros(s_total)
    counts = np.zeros(s_total)

    for t in range(trials):
        rng = master.derive(t)
        real = generate_realization(cfg, rng)
        reports = cell_reports(real, 0)
        decision = schedule_se_odia(
            reports, params, rng.derive(1), collect_trace=True
        )
        trace = decision.trace
        for s in range(len(trace.pool_sizes)):
            counts[s] += 1
            acc_c1[s] += trace.c1_fractions[s]
            acc_c2[s] += trace.c2_fractions[s]
            acc_pool[s] += trace.pool_sizes[s]
            acc_any[s] += 1.0 if trace.eligible_sizes[s] > 0 else 0.0
            acc_outage[s] += 1.0 if trace.outage_flags[s] else 0.0

    steps: List[EligibilityStep] = []
    for s in range(s_total):
        c = max(counts[s], 1.0)
        steps.append(
            EligibilityStep(
                step=s + 1,
                pr_c1=float(acc_c1[s] / c),
                pr_c2=float(acc_c2[s] / c),
                pr_c2_closed_form=closed_form_c2(s_total, s + 1, params.eta_D),
                p_eligible=float(acc_any[s] / c),
                mean_pool_size=float(acc_pool[s] / c),
                outage_rate=float(acc_outage[s] / c),
            )
        )
    return EligibilityReport(params=params, config=cfg, trials=trials, steps=tuple(steps))
