"""Monte Carlo propagation of the beta uncertainty to derived quantities.

Betas are drawn from a normal distribution; non-positive draws are redrawn
from per-index counter-based streams so the result is identical no matter
how the work is split.  Derived quantities are evaluated per draw and the
interval is formed from empirical quantiles (linear interpolation), never
by mapping interval endpoints: the price map is not monotone in beta, so
endpoint mapping would be wrong.

The market-referenced beta and the market rate are treated as fixed
constants; only the resource-vs-firm beta is sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = [
    "UncertaintyError",
    "BetaDraws",
    "IntervalReport",
    "QUANTITY_NAMES",
    "sample_betas",
    "derived_intervals",
]

QUANTITY_NAMES = ("ln_price", "ln_quantity", "ln_user_cost", "beta_xm", "r_x")

_MASK64 = (1 << 64) - 1


class UncertaintyError(ValueError):
    """Raised for invalid sampling parameters or excessive truncation."""


@dataclass(frozen=True)
class BetaDraws:
    """Positive beta draws plus the redraw count and generating seed."""

    values: np.ndarray
    n_redrawn: int
    seed: int
    mean: float
    se: float


@dataclass(frozen=True)
class IntervalReport:
    level: float
    bounds: dict[str, tuple[float, float]]
    point: dict[str, float]
    draws_used: int
    n_discarded: int
    seed: int | None


def _stream(seed: int, index: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, (index + 1) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_betas(mean: float, se: float, draws: int, seed: int) -> BetaDraws:
    """Draw positive betas from N(mean, se), redrawing non-positive values.

    Redraws use per-index counter-based streams, so the output depends only
    on (mean, se, draws, seed).  Raises when the cumulative number of
    rejected draws exceeds half the requested draws: the normal is then too
    inconsistent with the positivity restriction to represent the beta.
    """
    if draws < 1:
        raise UncertaintyError(f"draws must be >= 1, got {draws}")
    if se < 0:
        raise UncertaintyError(f"se must be >= 0, got {se}")
    if not (math.isfinite(mean) and math.isfinite(se)):
        raise UncertaintyError("mean and se must be finite")
    seed = int(seed)
    if seed < 0:
        raise UncertaintyError("seed must be a non-negative integer")
    if se == 0.0:
        if mean <= 0.0:
            raise UncertaintyError(f"degenerate distribution at non-positive mean {mean}")
        return BetaDraws(values=np.full(draws, float(mean)), n_redrawn=0,
                         seed=seed, mean=float(mean), se=0.0)

    budget = 0.5 * draws
    main = _stream(seed, -1)  # key (seed, 0) reserved for the base vector
    values = mean + se * main.standard_normal(draws)
    bad = np.flatnonzero(values <= 0.0)
    rejected = int(bad.size)
    if rejected > budget:
        raise UncertaintyError(
            f"excessive truncation: {rejected} of {draws} draws non-positive"
        )
    for i in bad:
        sub = _stream(seed, int(i))
        while True:
            candidate = mean + se * sub.standard_normal()
            if candidate > 0.0:
                values[i] = candidate
                break
            rejected += 1
            if rejected > budget:
                raise UncertaintyError(
                    f"excessive truncation: more than half of {draws} draws rejected"
                )
    return BetaDraws(values=values, n_redrawn=rejected, seed=seed,
                     mean=float(mean), se=float(se))


def derived_intervals(draws, beta_qm: float, r_m: float, mean_ln_flow: float,
                      mean_ln_price: float, level: float = 0.90,
                      seed: int | None = None,
                      point_beta: float | None = None) -> IntervalReport:
    """Empirical ((1-level)/2, (1+level)/2) intervals of the derived quantities.

    ``draws`` is a BetaDraws or a plain positive array.  Non-positive draws
    in a plain array are discarded and counted.  The point column evaluates
    the same maps at ``point_beta`` (defaulting to the sampling mean for
    BetaDraws, the median draw otherwise).
    """
    if isinstance(draws, BetaDraws):
        betas = draws.values
        if seed is None:
            seed = draws.seed
        if point_beta is None:
            point_beta = draws.mean
    else:
        betas = np.asarray(draws, dtype=np.float64)
    if betas.ndim != 1 or betas.size == 0:
        raise UncertaintyError("draws must be a non-empty 1-d sequence")
    if beta_qm <= 0.0:
        raise UncertaintyError(f"beta_qm must be positive, got {beta_qm}")
    if not 0.0 < level < 1.0:
        raise UncertaintyError(f"level must be in (0, 1), got {level}")
    if not (math.isfinite(mean_ln_flow) and math.isfinite(mean_ln_price) and math.isfinite(r_m)):
        raise UncertaintyError("means and market rate must be finite")

    valid = betas[betas > 0.0]
    n_discarded = int(betas.size - valid.size)
    if valid.size == 0:
        raise UncertaintyError("no positive draws to propagate")
    if point_beta is None:
        point_beta = float(np.median(valid))

    table = kernels.propagate_beta_draws(valid, mean_ln_flow, mean_ln_price, beta_qm, r_m)
    lo_q = 0.5 * (1.0 - level)
    quants = np.quantile(table, [lo_q, 1.0 - lo_q], axis=0)
    bounds = {
        name: (float(quants[0, j]), float(quants[1, j]))
        for j, name in enumerate(QUANTITY_NAMES)
    }
    point_row = kernels.propagate_beta_draws(
        np.array([float(point_beta)]), mean_ln_flow, mean_ln_price, beta_qm, r_m
    )[0]
    point = {name: float(point_row[j]) for j, name in enumerate(QUANTITY_NAMES)}
    return IntervalReport(level=float(level), bounds=bounds, point=point,
                          draws_used=int(valid.size), n_discarded=n_discarded,
                          seed=seed)
