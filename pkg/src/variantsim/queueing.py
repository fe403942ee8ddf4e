"""Closed-form math for a single-server queue with Poisson arrivals and a
deterministic service time.

Everything the switching controller needs is derived from four quantities:
the arrival rate (per second), the deterministic service time D (integer
microseconds), the end-to-end time constraint C (integer microseconds), and
the dampening factor alpha. All functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import MICROS_PER_SECOND


@dataclass(frozen=True)
class QueueParams:
    """Validated parameter bundle for one service queue."""

    rate_per_sec: float
    service_time_us: int
    constraint_us: int
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.rate_per_sec < 0:
            raise ValueError("arrival rate must be >= 0")
        if self.service_time_us <= 0:
            raise ValueError("service time must be > 0")
        if self.constraint_us <= 0:
            raise ValueError("constraint must be > 0")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")


@dataclass(frozen=True)
class ThresholdResult:
    """Switch-trigger queue length, clamped at 0.

    feasible is False when the constraint is below the service time itself,
    i.e. even a request that waits for nothing violates it.
    """

    value: int
    feasible: bool


def utilization(rate_per_sec: float, service_time_us: int) -> float:
    """Offered load rho = arrival rate x service time (dimensionless)."""
    if service_time_us <= 0:
        raise ValueError("service time must be > 0")
    if rate_per_sec < 0:
        raise ValueError("arrival rate must be >= 0")
    return rate_per_sec * service_time_us / MICROS_PER_SECOND


def is_stable(rate_per_sec: float, service_time_us: int) -> bool:
    """True iff the queue does not grow without bound (rho strictly < 1).

    rho == 1 is classified unstable: the expected queue length is unbounded
    even though arrivals do not outpace the server on average.
    """
    return utilization(rate_per_sec, service_time_us) < 1.0


def waiting_time(queue_length: int, service_time_us: int) -> int:
    """Wait of a request that joins behind queue_length others: (L+1) x D."""
    if queue_length < 0:
        raise ValueError("queue length must be >= 0")
    if service_time_us <= 0:
        raise ValueError("service time must be > 0")
    return (queue_length + 1) * service_time_us


def switch_threshold(constraint_us: int, service_time_us: int) -> ThresholdResult:
    """Largest queue length that still lets a new request meet the constraint.

    Computed as floor(C/D - 1) in exact integer arithmetic and clamped at 0.
    """
    if constraint_us <= 0:
        raise ValueError("constraint must be > 0")
    if service_time_us <= 0:
        raise ValueError("service time must be > 0")
    raw = constraint_us // service_time_us - 1
    return ThresholdResult(value=max(0, raw), feasible=constraint_us >= service_time_us)


def dampened_threshold(threshold: int, alpha: float) -> float:
    """Scaled trigger level alpha x T; the switch predicate is strict (L > it)."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must be in (0, 1]")
    return alpha * threshold


def average_wait(service_time_us: int, rho: float) -> float:
    """Expected wait (queue + service) in microseconds: D + D*rho/(2*(1-rho)).

    Only defined for rho in [0, 1); raises for an unstable queue.
    """
    if service_time_us <= 0:
        raise ValueError("service time must be > 0")
    if rho < 0:
        raise ValueError("utilization must be >= 0")
    if rho >= 1:
        raise ValueError("unstable queue: average wait undefined")
    return service_time_us + service_time_us * rho / (2.0 * (1.0 - rho))
