"""Supply/demand curves in log-deviation space and their equilibrium.

With beta the resource-vs-firm asset beta, supply is y = beta*x + ln(beta)
and demand is x = -beta*y, where x and y are mean-centered logs of flow and
unit price.  The analytic equilibrium is

    y_e = ln(beta) / (1 + beta^2),    x_e = -beta * y_e,

so beta = 1 puts the equilibrium exactly at the stored means.  Level prices
and quantities are recovered by shifting the deviations with those means;
curves are never re-fit in level space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = [
    "CurveError",
    "CurveSpec",
    "supply_curve",
    "demand_curve",
    "EquilibriumPoint",
    "ShockModel",
    "equilibrium_deviation",
    "equilibrium_levels",
    "elasticities",
    "curve_samples",
    "zero_sum_integral",
    "shocked_equilibrium",
    "observed_range_warnings",
]


class CurveError(ValueError):
    """Raised for invalid betas, ranges or shock configurations."""


def _check_beta(beta_xq: float) -> float:
    beta_xq = float(beta_xq)
    if not math.isfinite(beta_xq) or beta_xq <= 0.0:
        raise CurveError(f"beta must be a positive finite number, got {beta_xq}")
    return beta_xq


@dataclass(frozen=True)
class CurveSpec:
    """One curve, evaluated in deviation space."""

    kind: str  # "supply" | "demand"
    beta_xq: float

    def __post_init__(self):
        if self.kind not in ("supply", "demand"):
            raise CurveError(f"kind must be 'supply' or 'demand', got {self.kind!r}")
        _check_beta(self.beta_xq)

    def y_of_x(self, x):
        if self.kind == "supply":
            return self.beta_xq * np.asarray(x, dtype=np.float64) + math.log(self.beta_xq)
        return -np.asarray(x, dtype=np.float64) / self.beta_xq

    def x_of_y(self, y):
        if self.kind == "supply":
            return (np.asarray(y, dtype=np.float64) - math.log(self.beta_xq)) / self.beta_xq
        return -self.beta_xq * np.asarray(y, dtype=np.float64)


def supply_curve(beta_xq: float) -> CurveSpec:
    return CurveSpec(kind="supply", beta_xq=float(beta_xq))


def demand_curve(beta_xq: float) -> CurveSpec:
    return CurveSpec(kind="demand", beta_xq=float(beta_xq))


@dataclass(frozen=True)
class EquilibriumPoint:
    x_e: float
    y_e: float
    ln_quantity: float
    ln_price: float
    quantity: float
    price: float
    ln_user_cost: float


@dataclass(frozen=True)
class ShockModel:
    """Curve-shock magnitudes; 'paper' mode ties the shocks to eps_S = -eps_D."""

    sigma_s: float = 0.0
    sigma_d: float = 0.0
    mode: str = "general"

    def __post_init__(self):
        if self.sigma_s < 0 or self.sigma_d < 0:
            raise CurveError("shock standard deviations must be >= 0")
        if self.mode not in ("general", "paper"):
            raise CurveError(f"mode must be 'general' or 'paper', got {self.mode!r}")


def equilibrium_deviation(beta_xq: float) -> tuple[float, float]:
    """Deviation-space equilibrium (x_e, y_e)."""
    b = _check_beta(beta_xq)
    y_e = math.log(b) / (1.0 + b * b)
    return (-b * y_e, y_e)


def equilibrium_levels(beta_xq: float, mean_ln_flow: float, mean_ln_price: float) -> EquilibriumPoint:
    """Equilibrium in levels: deviations shifted by the stored log means."""
    if not (math.isfinite(mean_ln_flow) and math.isfinite(mean_ln_price)):
        raise CurveError("log means must be finite")
    x_e, y_e = equilibrium_deviation(beta_xq)
    ln_quantity = mean_ln_flow + x_e
    ln_price = mean_ln_price + y_e
    return EquilibriumPoint(
        x_e=x_e,
        y_e=y_e,
        ln_quantity=ln_quantity,
        ln_price=ln_price,
        quantity=math.exp(ln_quantity),
        price=math.exp(ln_price),
        ln_user_cost=ln_quantity + ln_price,
    )


def elasticities(beta_xq: float) -> tuple[float, float]:
    """(supply elasticity, demand elasticity) = (1/beta, beta), as magnitudes."""
    b = _check_beta(beta_xq)
    return (1.0 / b, b)


def curve_samples(curve: CurveSpec, x_range: tuple[float, float], count: int) -> np.ndarray:
    """Evenly spaced (x, y) pairs along a curve; shape (count, 2)."""
    lo, hi = float(x_range[0]), float(x_range[1])
    if count < 2:
        raise CurveError("count must be >= 2")
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise CurveError(f"invalid x range ({lo}, {hi})")
    x = np.linspace(lo, hi, count)
    return np.column_stack([x, curve.y_of_x(x)])


def zero_sum_integral(upper: float, tolerance: float = 1e-8) -> float:
    """Numerically integrate ln(b)/(1+b^2) over [1/upper, upper].

    The exact value is zero by the antisymmetry under b -> 1/b; the returned
    quadrature value should be below ``tolerance`` in magnitude.
    """
    upper = float(upper)
    if upper < 1.0:
        raise CurveError(f"upper bound must be >= 1, got {upper}")
    if tolerance <= 0.0:
        raise CurveError("tolerance must be positive")
    if upper == 1.0:
        return 0.0
    try:
        return float(kernels.log_beta_weight_integral(upper, tolerance))
    except RuntimeError as exc:
        raise CurveError(str(exc)) from exc


def shocked_equilibrium(beta_xq: float, eps_s: float, eps_d: float,
                        mode: str = "general") -> tuple[float, float]:
    """Equilibrium of the shocked system {y = b*x + ln b + eps_s, x = -b*y + eps_d}.

    In ``general`` mode both shocks enter the exact solve.  In ``paper`` mode
    the supply shock is pinned to eps_s = -eps_d, which reproduces the
    equilibrium-price shock form eps_d*(1+b)/(1+b^2); the eps_s argument is
    then ignored.
    """
    b = _check_beta(beta_xq)
    if mode == "paper":
        eps_s = -eps_d
    elif mode != "general":
        raise CurveError(f"mode must be 'general' or 'paper', got {mode!r}")
    y_e = (math.log(b) + b * eps_d + eps_s) / (1.0 + b * b)
    x_e = -b * y_e + eps_d
    return (x_e, y_e)


def observed_range_warnings(point: EquilibriumPoint,
                            ln_flow_range: tuple[float, float],
                            ln_price_range: tuple[float, float]) -> list[str]:
    """Warn when equilibrium levels leave the observed range of the panel logs."""
    warnings = []
    lo, hi = ln_flow_range
    if not lo <= point.ln_quantity <= hi:
        warnings.append(
            f"equilibrium ln quantity {point.ln_quantity:.4f} outside observed range "
            f"[{lo:.4f}, {hi:.4f}]"
        )
    lo, hi = ln_price_range
    if not lo <= point.ln_price <= hi:
        warnings.append(
            f"equilibrium ln price {point.ln_price:.4f} outside observed range "
            f"[{lo:.4f}, {hi:.4f}]"
        )
    return warnings
