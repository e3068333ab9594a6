"""Cost kernels and the log-domain (KDL) residual transform.

A cost kernel turns the scalar residual between the objective value and its
target into the leading update factor.  The square cost yields the cubic
kernel ``u(rho) = (2/3) rho**3``; the convex curve paired with a logistic
produces the centered kernel ``u(rho) = 2/(1 + exp(-rho)) - 1``, which is
``tanh(rho/2)``.  Both are odd with ``u(0) = 0``, so a zero residual is a
fixed point of every update built on top of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "SQUARE_CUBIC_COEFF",
    "CostKernel",
    "CostConfig",
    "KdlDomainError",
    "apply_kdl",
    "cost_residual",
    "cost_update",
    "logistic",
    "logistic_derivative",
]

# Constant in front of the cubic produced by the square cost.
SQUARE_CUBIC_COEFF = 2.0 / 3.0

KERNEL_KINDS = ("square", "sigmoid_convex")


class KdlDomainError(ValueError):
    """A log-domain residual was requested outside the log's domain."""


def logistic(rho: float) -> float:
    """Numerically stable 1/(1 + exp(-rho))."""
    if rho >= 0.0:
        return 1.0 / (1.0 + math.exp(-rho))
    z = math.exp(rho)
    return z / (1.0 + z)


def logistic_derivative(rho: float) -> float:
    """exp(-rho) / (1 + exp(-rho))**2, evaluated stably."""
    s = logistic(rho)
    return s * (1.0 - s)


@dataclass(frozen=True)
class CostKernel:
    """Scalar update function u(rho_cost) derived from a convex cost."""

    kind: str = "square"

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"kernel kind must be one of {KERNEL_KINDS}, got {self.kind!r}")

    def u(self, rho: float) -> float:
        if self.kind == "square":
            return SQUARE_CUBIC_COEFF * rho * rho * rho
        # 2/(1+exp(-rho)) - 1 == tanh(rho/2); tanh is the stable evaluation
        return math.tanh(0.5 * rho)

    __call__ = u


@dataclass(frozen=True)
class CostConfig:
    """How the residual between rho_N and the target rho_0 is formed."""

    kernel: CostKernel = field(default_factory=CostKernel)
    rho_target: float = 0.0
    use_kdl: bool = False
    kdl_offset: float = 1.0

    def __post_init__(self):
        if self.use_kdl and self.kdl_offset <= 0.0:
            raise ValueError(f"kdl_offset must be > 0, got {self.kdl_offset}")


def apply_kdl(rho_n: float, rho_0: float, off: float) -> float:
    """Log-domain residual log(rho_n + off) - log(rho_0 + off).

    Zero exactly when rho_n == rho_0.  Raises :class:`KdlDomainError`
    naming the offending value when either log argument is non-positive.
    """
    a = rho_n + off
    b = rho_0 + off
    if a <= 0.0:
        raise KdlDomainError(f"rho_n + off = {a!r} must be > 0 (rho_n={rho_n!r}, off={off!r})")
    if b <= 0.0:
        raise KdlDomainError(f"rho_0 + off = {b!r} must be > 0 (rho_0={rho_0!r}, off={off!r})")
    return math.log(a) - math.log(b)


def cost_residual(rho_n: float, config: CostConfig) -> float:
    """rho_cost: plain difference or its log-domain form."""
    if config.use_kdl:
        return apply_kdl(rho_n, config.rho_target, config.kdl_offset)
    return rho_n - config.rho_target


def cost_residual_chain(rho_n: float, config: CostConfig) -> float:
    """d rho_cost / d rho_N for the configured residual form."""
    if config.use_kdl:
        return 1.0 / (rho_n + config.kdl_offset)
    return 1.0


def cost_update(kernel: CostKernel, rho_n: float, config: CostConfig) -> float:
    """Leading update factor u(rho_cost); same sign as the residual."""
    return kernel.u(cost_residual(rho_n, config))
