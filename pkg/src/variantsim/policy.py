"""Variant selection and runtime switching.

The controller pursues one goal: run the slowest (highest service time, and
by assumption highest quality) variant that still keeps the queue stable and
the expected wait below the constraint. At runtime it watches the queue
length; once the length exceeds the dampened threshold it switches to a
faster variant. An optional recovery extension switches back to slower
variants after a sustained quiet period.

Decisions are pure functions of observed state; there is no randomness.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

from .model import VariantProfile
from .queueing import average_wait, dampened_threshold, switch_threshold, utilization


class SwitchReason(str, Enum):
    THRESHOLD_EXCEEDED = "threshold_exceeded"
    INITIAL_SELECTION = "initial_selection"
    RECOVERY = "recovery"


@dataclass(frozen=True)
class RecoveryOptions:
    """Switch-back extension: after stable_window consecutive completions with
    the queue at or below margin x dampened threshold, move up to the slowest
    feasible variant."""

    stable_window: int
    margin: float

    def __post_init__(self) -> None:
        if self.stable_window < 1:
            raise ValueError("stable_window must be >= 1")
        if self.margin < 0:
            raise ValueError("margin must be >= 0")


@dataclass(frozen=True)
class PolicyOptions:
    """Knobs of the switching controller.

    switch_latency_us is the delay between a switch command and its effect;
    in "control" mode the server keeps serving during that window, in
    "restart" mode it cannot start new requests until the switch applies.
    """

    stability_check: bool = True
    alpha: float = 1.0
    cooldown: int = 0
    recovery: RecoveryOptions | None = None
    switch_latency_us: int = 17_000
    switch_mode: str = "control"
    initial_selection: bool = True
    switching: bool = True

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")
        if self.cooldown < 0:
            raise ValueError("cooldown must be >= 0")
        if self.switch_latency_us < 0:
            raise ValueError("switch latency must be >= 0")
        if self.switch_mode not in ("control", "restart"):
            raise ValueError("switch_mode must be 'control' or 'restart'")


@dataclass(frozen=True)
class SwitchDecision:
    target_variant: str
    reason: SwitchReason
    decided_at_us: int


@dataclass(frozen=True)
class SelectionResult:
    variant_id: str
    degraded: bool


def _passes_filters(
    profile: VariantProfile,
    rate_per_sec: float,
    constraint_us: int,
    stability_check: bool,
) -> bool:
    rho = utilization(rate_per_sec, profile.service_time_us)
    if stability_check:
        if rho >= 1.0:
            return False
        return average_wait(profile.service_time_us, rho) < constraint_us
    if rho < 1.0:
        return average_wait(profile.service_time_us, rho) < constraint_us
    # Overloaded but forced: the expected-wait formula is undefined, fall back
    # to requiring that an unqueued request can meet the constraint.
    return profile.service_time_us < constraint_us


def select_variant(
    profiles: Sequence[VariantProfile],
    rate_per_sec: float,
    constraint_us: int,
    options: PolicyOptions,
) -> SelectionResult:
    """Pick the slowest variant that can absorb the load within the constraint.

    Candidates must keep the queue stable (when the stability check is on)
    and keep the expected wait below the constraint. Among them the one with
    the largest service time wins; ties break toward higher quality, then
    lexicographically smaller variant id. With no viable candidate the
    fastest variant is returned with degraded=True.
    """
    if not profiles:
        raise ValueError("no variant profiles to select from")
    if constraint_us <= 0:
        raise ValueError("constraint must be > 0")
    candidates = [
        p
        for p in profiles
        if _passes_filters(p, rate_per_sec, constraint_us, options.stability_check)
    ]
    if candidates:
        best = sorted(
            candidates, key=lambda p: (-p.service_time_us, -p.qor, p.variant_id)
        )[0]
        return SelectionResult(best.variant_id, degraded=False)
    fallback = sorted(
        profiles, key=lambda p: (p.service_time_us, -p.qor, p.variant_id)
    )[0]
    return SelectionResult(fallback.variant_id, degraded=True)


def should_switch(queue_length: int, threshold: int, alpha: float) -> bool:
    """True iff the queue length strictly exceeds the dampened threshold."""
    if queue_length < 0:
        raise ValueError("queue length must be >= 0")
    return queue_length > dampened_threshold(threshold, alpha)


class SwitchingPolicy:
    """Stateful controller for one service instance.

    The simulator feeds it an observation at every arrival and completion:
    the current queue length (waiting requests, excluding the one in
    service), the number of completions since the last applied switch, and
    the current time. rate_fn maps time to the configured arrival rate so
    scheduled workload shifts are visible to the controller.
    """

    def __init__(
        self,
        profiles: Sequence[VariantProfile],
        options: PolicyOptions,
        constraint_us: int,
        rate_fn: Callable[[int], float],
        current_variant: str,
    ) -> None:
        if not profiles:
            raise ValueError("no variant profiles")
        self.profiles = tuple(profiles)
        self.by_id = {p.variant_id: p for p in self.profiles}
        if current_variant not in self.by_id:
            raise ValueError(f"unknown variant {current_variant!r}")
        self.options = options
        self.constraint_us = constraint_us
        self.rate_fn = rate_fn
        self.current_variant = current_variant
        self.switch_pending = False
        self._switched_once = False
        self._stable_run = 0
        self._last_completions = 0

    def initial_selection(self) -> SelectionResult:
        """Start-of-run choice; honored only when options.initial_selection."""
        return select_variant(
            self.profiles, self.rate_fn(0), self.constraint_us, self.options
        )

    def switch_applied(self, variant_id: str, now_us: int) -> None:
        """Simulator callback once a commanded switch takes effect."""
        self.current_variant = variant_id
        self.switch_pending = False
        self._switched_once = True
        self._stable_run = 0
        self._last_completions = 0

    def _cooldown_ok(self, completions_since_switch: int) -> bool:
        if not self._switched_once:
            return True
        return completions_since_switch >= self.options.cooldown

    def _target_below(self, current: VariantProfile, now_us: int) -> str | None:
        faster = [p for p in self.profiles if p.service_time_us < current.service_time_us]
        if not faster:
            return None
        return select_variant(
            faster, self.rate_fn(now_us), self.constraint_us, self.options
        ).variant_id

    def _target_above(self, current: VariantProfile, now_us: int) -> str | None:
        rate = self.rate_fn(now_us)
        feasible = [
            p
            for p in self.profiles
            if p.service_time_us > current.service_time_us
            and _passes_filters(p, rate, self.constraint_us, self.options.stability_check)
        ]
        if not feasible:
            return None
        return sorted(
            feasible, key=lambda p: (-p.service_time_us, -p.qor, p.variant_id)
        )[0].variant_id

    def on_observation(
        self, queue_length: int, completions_since_switch: int, now_us: int
    ) -> SwitchDecision | None:
        """Evaluate the switch rules against one queue observation.

        Returns a decision at most once per in-flight switch; the decision
        never targets the current variant. Downward switches fire on
        L > alpha*T, recovery (when enabled) after stable_window consecutive
        completions with L <= margin*alpha*T.
        """
        if not self.options.switching:
            return None
        current = self.by_id[self.current_variant]
        threshold = switch_threshold(self.constraint_us, current.service_time_us)
        damp = dampened_threshold(threshold.value, self.options.alpha)

        # Completions are detected from the counter so the recovery window
        # advances only on completion observations.
        delta = completions_since_switch - self._last_completions
        self._last_completions = completions_since_switch
        if delta > 0 and self.options.recovery is not None:
            if queue_length <= self.options.recovery.margin * damp:
                self._stable_run += delta
            else:
                self._stable_run = 0

        if self.switch_pending or not self._cooldown_ok(completions_since_switch):
            return None

        if should_switch(queue_length, threshold.value, self.options.alpha):
            target = self._target_below(current, now_us)
            if target is not None:
                self.switch_pending = True
                return SwitchDecision(target, SwitchReason.THRESHOLD_EXCEEDED, now_us)
            return None

        if (
            self.options.recovery is not None
            and self._stable_run >= self.options.recovery.stable_window
        ):
            target = self._target_above(current, now_us)
            if target is not None:
                self.switch_pending = True
                return SwitchDecision(target, SwitchReason.RECOVERY, now_us)
        return None
