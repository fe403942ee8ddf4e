"""Deterministic discrete-event engine for variant-switching scenarios.

One scenario describes services (each a single-server FIFO queue), optional
service chains, a Poisson workload, a time constraint, and the switching
policy. Running it produces a trace: one record per request with per-stage
timing, every switch command, and queue-length samples taken at both arrival
and completion instants.

Traces are a pure function of the configuration: identical configs replay to
identical traces, including scenarios with service-time noise, because every
random draw comes from generators derived from the scenario seed.
"""

from __future__ import annotations

import heapq
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .model import (
    MICROS_PER_SECOND,
    MicroserviceSpec,
    ServiceChainSpec,
    ValidationIssue,
    ValidationReport,
    VariantProfile,
    validate_spec,
)
from .policy import PolicyOptions, SwitchingPolicy, SwitchReason

_RATE_UNITS = {
    "per_second": 1.0,
    "per_minute": 1.0 / 60.0,
    "per_hour": 1.0 / 3600.0,
}

# Event kinds in tie-break order: completions run before switch effects,
# switch effects before arrivals, at equal timestamps.
_COMPLETION, _SWITCH_EFFECT, _ARRIVAL = 0, 1, 2


class ScenarioValidationError(ValueError):
    """Raised before any event runs when a scenario fails validation."""

    def __init__(self, report: ValidationReport) -> None:
        super().__init__(str(report))
        self.report = report


@dataclass(frozen=True)
class ArrivalSpec:
    """Workload description: base rate, its time unit, optional shifts.

    The schedule, when given, is a piecewise-constant rate over time as
    (start_us, rate) segments; the first segment must start at 0 and the
    last must have a positive rate so the configured request count is
    reachable.
    """

    rate: float
    unit: str = "per_second"
    schedule: tuple[tuple[int, float], ...] | None = None

    def rate_per_sec(self, time_us: int = 0) -> float:
        factor = _RATE_UNITS[self.unit]
        if self.schedule is None:
            return self.rate * factor
        starts = [s for s, _ in self.schedule]
        idx = bisect_right(starts, time_us) - 1
        return self.schedule[max(idx, 0)][1] * factor


@dataclass(frozen=True)
class ScenarioConfig:
    services: tuple[MicroserviceSpec, ...]
    arrivals: ArrivalSpec
    constraint_us: int
    request_count: int
    seed: int
    policy: PolicyOptions = PolicyOptions()
    chains: tuple[ServiceChainSpec, ...] = ()


@dataclass(frozen=True, slots=True)
class StageRecord:
    service_id: str
    variant_id: str
    arrival_us: int
    service_start_us: int
    service_end_us: int
    queue_length_at_arrival: int


@dataclass(frozen=True, slots=True)
class RequestRecord:
    request_id: int
    chain_id: str
    stages: tuple[StageRecord, ...]
    sojourn_us: int
    violated: bool
    qor: float


@dataclass(frozen=True, slots=True)
class SwitchEvent:
    time_us: int
    service_id: str
    from_variant: str
    to_variant: str
    reason: SwitchReason
    applied_after_us: int

    @property
    def effective_us(self) -> int:
        return self.time_us + self.applied_after_us


@dataclass(frozen=True, slots=True)
class QueueSample:
    time_us: int
    service_id: str
    queue_length: int
    event: str  # "arrival" or "completion"


@dataclass(frozen=True, slots=True)
class ServiceStats:
    service_id: str
    completed: int
    time_avg_queue_len: float
    queue_len_at_last_arrival: int


@dataclass(frozen=True)
class SimulationTrace:
    records: tuple[RequestRecord, ...]
    switches: tuple[SwitchEvent, ...]
    queue_samples: tuple[QueueSample, ...]
    initial_variants: Mapping[str, str]
    service_stats: tuple[ServiceStats, ...]
    config_echo: ScenarioConfig
    rng_seed: int

    def records_by_arrival(self) -> tuple[RequestRecord, ...]:
        return tuple(sorted(self.records, key=lambda r: (r.stages[0].arrival_us, r.request_id)))


def generate_arrivals(rate_per_sec: float, n: int, seed: int) -> list[int]:
    """n strictly increasing Poisson arrival timestamps in microseconds.

    Inter-arrival gaps are i.i.d. exponential with mean 1/rate; gaps round
    to at least one microsecond so timestamps stay strictly increasing.
    """
    if rate_per_sec <= 0:
        raise ValueError("arrival rate must be > 0")
    if n < 1:
        raise ValueError("need at least one arrival")
    rng = np.random.default_rng(seed)
    gaps = rng.exponential(1.0 / rate_per_sec, n) * MICROS_PER_SECOND
    times: list[int] = []
    t = 0
    for gap in gaps:
        t += max(1, round(gap))
        times.append(t)
    return times


def _scheduled_arrivals(spec: ArrivalSpec, n: int, rng: np.random.Generator) -> list[int]:
    """Arrival times under a piecewise-constant rate schedule.

    Sampling restarts at each segment boundary, which is exact for
    exponential gaps (memorylessness).
    """
    factor = _RATE_UNITS[spec.unit]
    segments = [(int(s), r * factor) for s, r in (spec.schedule or ((0, spec.rate),))]
    times: list[int] = []
    t = 0.0
    idx = 0
    last = 0
    while len(times) < n:
        rate = segments[idx][1]
        boundary = segments[idx + 1][0] if idx + 1 < len(segments) else None
        if rate <= 0:
            # Idle segment; validation guarantees a later active one.
            t = float(boundary)
            idx += 1
            continue
        candidate = t + rng.exponential(1.0 / rate) * MICROS_PER_SECOND
        if boundary is not None and candidate > boundary:
            t = float(boundary)
            idx += 1
            continue
        t = candidate
        stamp = max(last + 1, round(t))
        times.append(stamp)
        last = stamp
    return times


def resolve_chains(config: ScenarioConfig) -> tuple[ServiceChainSpec, ...]:
    """Declared chains, or the default one single-stage chain per service."""
    if config.chains:
        return config.chains
    return tuple(
        ServiceChainSpec(chain_id=s.service_id, stages=(s.service_id,))
        for s in config.services
    )


def chain_constraint_us(config: ScenarioConfig, chain: ServiceChainSpec) -> int:
    return chain.constraint_us if chain.constraint_us is not None else config.constraint_us


def validate_scenario(config: ScenarioConfig) -> ValidationReport:
    """Cross-check every reference and invariant of a scenario."""
    out: list[ValidationIssue] = []
    if config.request_count < 1:
        out.append(ValidationIssue("request_count", "must be >= 1"))
    if config.constraint_us <= 0:
        out.append(ValidationIssue("constraint_us", "must be > 0"))
    if not config.services:
        out.append(ValidationIssue("services", "at least one service required"))

    ids = [s.service_id for s in config.services]
    if len(set(ids)) != len(ids):
        out.append(ValidationIssue("services", "duplicate service ids"))
    for spec in config.services:
        out.extend(validate_spec(spec).issues)

    if config.arrivals.unit not in _RATE_UNITS:
        out.append(
            ValidationIssue(
                "arrivals.unit",
                f"unknown unit {config.arrivals.unit!r}; use one of {sorted(_RATE_UNITS)}",
            )
        )
    if config.arrivals.schedule is not None:
        sched = config.arrivals.schedule
        if not sched:
            out.append(ValidationIssue("arrivals.schedule", "must not be empty"))
        else:
            if sched[0][0] != 0:
                out.append(ValidationIssue("arrivals.schedule[0]", "first segment must start at 0"))
            starts = [s for s, _ in sched]
            if starts != sorted(set(starts)):
                out.append(
                    ValidationIssue("arrivals.schedule", "segment starts must be strictly increasing")
                )
            for i, (_, rate) in enumerate(sched):
                if rate < 0:
                    out.append(ValidationIssue(f"arrivals.schedule[{i}].rate", "must be >= 0"))
            if sched[-1][1] <= 0:
                out.append(
                    ValidationIssue(
                        "arrivals.schedule[-1].rate",
                        "final segment rate must be > 0 so all requests can arrive",
                    )
                )
    elif config.arrivals.rate <= 0:
        out.append(ValidationIssue("arrivals.rate", "must be > 0"))

    chain_ids = set()
    known = set(ids)
    for chain in resolve_chains(config):
        root = f"chains[{chain.chain_id}]"
        if chain.chain_id in chain_ids:
            out.append(ValidationIssue(root, "duplicate chain id"))
        chain_ids.add(chain.chain_id)
        if not chain.stages:
            out.append(ValidationIssue(f"{root}.stages", "at least one stage required"))
        for k, stage in enumerate(chain.stages):
            if stage not in known:
                out.append(
                    ValidationIssue(f"{root}.stages[{k}]", f"unknown service {stage!r}")
                )
        if chain.constraint_us is not None and chain.constraint_us <= 0:
            out.append(ValidationIssue(f"{root}.constraint_us", "must be > 0"))
    return ValidationReport(tuple(out))


class _Request:
    __slots__ = ("request_id", "chain", "constraint_us", "stage_idx", "stages", "pending_arrival")

    def __init__(self, request_id: int, chain: ServiceChainSpec, constraint_us: int):
        self.request_id = request_id
        self.chain = chain
        self.constraint_us = constraint_us
        self.stage_idx = 0
        self.stages: list[StageRecord] = []
        # (arrival time, queue length seen) at the stage currently queued for.
        self.pending_arrival = (0, 0)


class _Instance:
    """Runtime state of one service: queue, server, controller, accounting."""

    __slots__ = (
        "spec",
        "controller",
        "rng",
        "current_variant",
        "queue",
        "in_service",
        "blocked_until",
        "completions_since_switch",
        "completed",
        "area_us",
        "last_event_us",
        "queue_len_at_last_arrival",
    )

    def __init__(self, spec: MicroserviceSpec, controller: SwitchingPolicy, rng) -> None:
        self.spec = spec
        self.controller = controller
        self.rng = rng
        self.current_variant = controller.current_variant
        self.queue: deque[_Request] = deque()
        self.in_service: _Request | None = None
        self.blocked_until = 0
        self.completions_since_switch = 0
        self.completed = 0
        self.area_us = 0
        self.last_event_us = 0
        self.queue_len_at_last_arrival = 0

    def advance(self, now_us: int) -> None:
        self.area_us += len(self.queue) * (now_us - self.last_event_us)
        self.last_event_us = now_us

    def service_duration_us(self, profile: VariantProfile) -> int:
        if profile.noise is not None and profile.noise.sigma > 0:
            sigma = profile.noise.sigma
            multiplier = self.rng.lognormal(mean=-0.5 * sigma * sigma, sigma=sigma)
            return max(1, round(profile.service_time_us * multiplier))
        return profile.service_time_us


def run_scenario(config: ScenarioConfig) -> SimulationTrace:
    """Execute a scenario to completion and capture the full trace.

    Events are processed in (time, kind, sequence) order with completions
    before arrivals at equal timestamps. Each service serves one request at
    a time from a FIFO queue; a switch command takes effect after the
    configured latency, and requests already in service finish under the
    variant they started with. The run drains: every injected request
    completes before the trace is returned.
    """
    report = validate_scenario(config)
    if not report.ok:
        raise ScenarioValidationError(report)

    chains = resolve_chains(config)
    services = {s.service_id: s for s in config.services}
    seed_seq = np.random.SeedSequence(config.seed)
    streams = seed_seq.spawn(len(chains) + len(config.services))
    chain_rngs = [np.random.default_rng(s) for s in streams[: len(chains)]]
    service_rngs = [np.random.default_rng(s) for s in streams[len(chains):]]

    # How many chain stages route through each service; scales the arrival
    # rate the controller assumes for that service.
    multiplicity = {sid: 0 for sid in services}
    for chain in chains:
        for stage in chain.stages:
            multiplicity[stage] += 1

    def rate_fn_for(service_id: str):
        m = multiplicity[service_id]

        def rate_fn(time_us: int) -> float:
            return m * config.arrivals.rate_per_sec(time_us)

        return rate_fn

    # A service shared by several chains answers to the tightest per-stage
    # budget among them.
    budget: dict[str, int] = {}
    for chain in chains:
        per_stage = chain_constraint_us(config, chain) // len(chain.stages)
        for stage in chain.stages:
            budget[stage] = min(budget.get(stage, per_stage), per_stage)

    instances: dict[str, _Instance] = {}
    initial_variants: dict[str, str] = {}
    for idx, spec in enumerate(config.services):
        controller = SwitchingPolicy(
            profiles=spec.profiles(),
            options=config.policy,
            constraint_us=budget.get(spec.service_id, config.constraint_us),
            rate_fn=rate_fn_for(spec.service_id),
            current_variant=spec.initial_variant,
        )
        if config.policy.initial_selection:
            controller.current_variant = controller.initial_selection().variant_id
        instances[spec.service_id] = _Instance(spec, controller, service_rngs[idx])
        initial_variants[spec.service_id] = controller.current_variant

    heap: list[tuple[int, int, int, object]] = []
    seq = 0

    def push(time_us: int, kind: int, payload) -> None:
        nonlocal seq
        heapq.heappush(heap, (time_us, kind, seq, payload))
        seq += 1

    requests: list[_Request] = []
    injected = []
    for c_idx, chain in enumerate(chains):
        times = _scheduled_arrivals(config.arrivals, config.request_count, chain_rngs[c_idx])
        c_us = chain_constraint_us(config, chain)
        injected.extend((t, c_idx, c_us) for t in times)
    injected.sort()
    for rid, (t, c_idx, c_us) in enumerate(injected):
        req = _Request(rid, chains[c_idx], c_us)
        requests.append(req)
        push(t, _ARRIVAL, req)

    records: list[RequestRecord] = []
    switches: list[SwitchEvent] = []
    samples: list[QueueSample] = []
    remaining = len(requests)

    def try_start(inst: _Instance, now_us: int) -> None:
        if inst.in_service is not None or not inst.queue or now_us < inst.blocked_until:
            return
        req = inst.queue.popleft()
        profile = inst.spec.profile(inst.current_variant)
        duration = inst.service_duration_us(profile)
        arrival_us, qlen = req.pending_arrival
        req.stages.append(
            StageRecord(
                service_id=inst.spec.service_id,
                variant_id=inst.current_variant,
                arrival_us=arrival_us,
                service_start_us=now_us,
                service_end_us=now_us + duration,
                queue_length_at_arrival=qlen,
            )
        )
        inst.in_service = req
        push(now_us + duration, _COMPLETION, inst.spec.service_id)

    def observe(inst: _Instance, now_us: int) -> None:
        decision = inst.controller.on_observation(
            len(inst.queue), inst.completions_since_switch, now_us
        )
        if decision is None:
            return
        latency = config.policy.switch_latency_us
        switches.append(
            SwitchEvent(
                time_us=now_us,
                service_id=inst.spec.service_id,
                from_variant=inst.current_variant,
                to_variant=decision.target_variant,
                reason=decision.reason,
                applied_after_us=latency,
            )
        )
        if config.policy.switch_mode == "restart":
            inst.blocked_until = now_us + latency
        push(now_us + latency, _SWITCH_EFFECT, (inst.spec.service_id, decision.target_variant))

    while heap:
        now_us, kind, _, payload = heapq.heappop(heap)

        if kind == _COMPLETION:
            inst = instances[payload]
            inst.advance(now_us)
            req = inst.in_service
            assert req is not None
            inst.in_service = None
            inst.completed += 1
            inst.completions_since_switch += 1
            try_start(inst, now_us)
            samples.append(
                QueueSample(now_us, inst.spec.service_id, len(inst.queue), "completion")
            )
            observe(inst, now_us)

            req.stage_idx += 1
            if req.stage_idx < len(req.chain.stages):
                push(now_us, _ARRIVAL, req)
            else:
                stages = tuple(req.stages)
                sojourn = stages[-1].service_end_us - stages[0].arrival_us
                qor = 1.0
                for st in stages:
                    qor *= services[st.service_id].profile(st.variant_id).qor
                records.append(
                    RequestRecord(
                        request_id=req.request_id,
                        chain_id=req.chain.chain_id,
                        stages=stages,
                        sojourn_us=sojourn,
                        violated=sojourn > req.constraint_us,
                        qor=qor,
                    )
                )
                remaining -= 1

        elif kind == _ARRIVAL:
            req = payload
            inst = instances[req.chain.stages[req.stage_idx]]
            inst.advance(now_us)
            req.pending_arrival = (now_us, len(inst.queue))
            inst.queue.append(req)
            try_start(inst, now_us)
            inst.queue_len_at_last_arrival = len(inst.queue)
            samples.append(
                QueueSample(now_us, inst.spec.service_id, len(inst.queue), "arrival")
            )
            observe(inst, now_us)

        else:  # _SWITCH_EFFECT
            service_id, target = payload
            inst = instances[service_id]
            inst.advance(now_us)
            inst.current_variant = target
            inst.completions_since_switch = 0
            inst.controller.switch_applied(target, now_us)
            try_start(inst, now_us)

    assert remaining == 0, "requests lost by the engine"

    stats = tuple(
        ServiceStats(
            service_id=sid,
            completed=inst.completed,
            time_avg_queue_len=(inst.area_us / inst.last_event_us if inst.last_event_us else 0.0),
            queue_len_at_last_arrival=inst.queue_len_at_last_arrival,
        )
        for sid, inst in instances.items()
    )
    return SimulationTrace(
        records=tuple(records),
        switches=tuple(switches),
        queue_samples=tuple(samples),
        initial_variants=initial_variants,
        service_stats=stats,
        config_echo=config,
        rng_seed=config.seed,
    )


def replay_check(config: ScenarioConfig) -> bool:
    """True iff two runs of the same config produce identical traces."""
    return run_scenario(config) == run_scenario(config)
