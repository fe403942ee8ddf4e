"""Domain model for adaptable services.

A service exposes several interchangeable *variants*. A variant is one point
in the product of three adaptation dimensions: the algorithm used, the
parameter bindings, and the auxiliary data asset (e.g. a pre-trained model).
Each variant carries an execution profile (deterministic service time plus a
quality-of-result score) that the switching controller and the simulator
consume.

All types are frozen dataclasses; instances are safe to share across threads.
Durations are integer microseconds throughout the package to keep event
arithmetic exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

MICROS_PER_SECOND = 1_000_000
MICROS_PER_MS = 1_000

# Tolerance for float parameter-grid membership checks.
_GRID_EPS = 1e-9


def ms(value: float) -> int:
    """Milliseconds to integer microseconds."""
    return round(value * MICROS_PER_MS)


def seconds(value: float) -> int:
    """Seconds to integer microseconds."""
    return round(value * MICROS_PER_SECOND)


@dataclass(frozen=True)
class ParameterRange:
    """Numeric parameter domain [minimum, maximum].

    A positive ``step`` makes the domain enumerable as the grid
    minimum, minimum+step, ... up to maximum. Without a step the domain is
    continuous: values can be validated against it but the variant space
    cannot be enumerated.
    """

    minimum: float
    maximum: float
    step: float | None = None

    def is_well_formed(self) -> bool:
        if self.minimum > self.maximum:
            return False
        if self.step is not None and self.step <= 0:
            return False
        return True

    def contains(self, value: object) -> bool:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            return False
        return self.minimum - _GRID_EPS <= value <= self.maximum + _GRID_EPS

    def grid(self) -> tuple[float, ...]:
        """Discretized values; raises if the domain has no step."""
        if self.step is None:
            raise ValueError("non-enumerable parameter space")
        count = int((self.maximum - self.minimum) / self.step + _GRID_EPS) + 1
        return tuple(round(self.minimum + i * self.step, 12) for i in range(count))


@dataclass(frozen=True)
class ParameterValues:
    """Explicitly enumerated parameter domain."""

    values: tuple = ()

    def is_well_formed(self) -> bool:
        return len(self.values) > 0

    def contains(self, value: object) -> bool:
        return value in self.values

    def grid(self) -> tuple:
        return self.values


ParameterDomain = Union[ParameterRange, ParameterValues]


@dataclass(frozen=True)
class AdaptationDimensions:
    """The three axes a service can vary on.

    ``algorithms`` and ``auxiliary_data`` are finite identifier sets (an empty
    tuple explicitly marks the dimension as unused). ``parameters`` maps each
    parameter name to its domain.
    """

    algorithms: tuple[str, ...] = ()
    parameters: Mapping[str, ParameterDomain] = field(default_factory=dict)
    auxiliary_data: tuple[str, ...] = ()


@dataclass(frozen=True)
class ServiceVariant:
    """One concrete configuration: algorithm, parameter values, data asset."""

    variant_id: str
    algorithm: str | None = None
    parameters: Mapping[str, object] = field(default_factory=dict)
    aux_data: str | None = None


@dataclass(frozen=True)
class LognormalNoise:
    """Multiplicative service-time noise; sigma is the relative log-std.

    The multiplier is exp(N(-sigma^2/2, sigma)), normalized so its mean is 1
    and the profiled service time stays the mean of the noisy one.
    """

    sigma: float


@dataclass(frozen=True)
class VariantProfile:
    """Execution characteristics of one variant.

    service_time_us is the deterministic service time used by the queue
    formulas; qor is the quality-of-result score in [0, 1].
    """

    variant_id: str
    service_time_us: int
    qor: float
    noise: LognormalNoise | None = None


@dataclass(frozen=True)
class MicroserviceSpec:
    """A service blueprint: its dimensions, variants, and starting variant."""

    service_id: str
    dimensions: AdaptationDimensions
    variants: tuple[tuple[ServiceVariant, VariantProfile], ...]
    initial_variant: str

    def profile(self, variant_id: str) -> VariantProfile:
        for _, prof in self.variants:
            if prof.variant_id == variant_id:
                return prof
        raise KeyError(variant_id)

    def profiles(self) -> tuple[VariantProfile, ...]:
        return tuple(prof for _, prof in self.variants)


@dataclass(frozen=True)
class ServiceChainSpec:
    """An ordered pipeline of services; stage k feeds stage k+1.

    constraint_us optionally overrides the scenario-wide end-to-end
    constraint for this chain.
    """

    chain_id: str
    stages: tuple[str, ...]
    constraint_us: int | None = None


@dataclass(frozen=True)
class ValidationIssue:
    """One invariant violation, with a path to the offending field."""

    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues

    def __str__(self) -> str:
        return "ok" if self.ok else "\n".join(str(i) for i in self.issues)


def _check_dimensions(dims: AdaptationDimensions, path: str, out: list) -> None:
    if len(set(dims.algorithms)) != len(dims.algorithms):
        out.append(ValidationIssue(f"{path}.algorithms", "duplicate algorithm ids"))
    if len(set(dims.auxiliary_data)) != len(dims.auxiliary_data):
        out.append(ValidationIssue(f"{path}.auxiliary_data", "duplicate data-asset ids"))
    for name, domain in dims.parameters.items():
        if not domain.is_well_formed():
            out.append(
                ValidationIssue(
                    f"{path}.parameters[{name}]",
                    "malformed domain (need min <= max and step > 0 when given)",
                )
            )


def _check_variant(
    variant: ServiceVariant, dims: AdaptationDimensions, path: str, out: list
) -> None:
    if variant.algorithm is not None and variant.algorithm not in dims.algorithms:
        out.append(
            ValidationIssue(
                f"{path}.algorithm",
                f"algorithm {variant.algorithm!r} not among declared algorithms",
            )
        )
    if variant.aux_data is not None and variant.aux_data not in dims.auxiliary_data:
        out.append(
            ValidationIssue(
                f"{path}.aux_data",
                f"data asset {variant.aux_data!r} not among declared auxiliary data",
            )
        )
    for name, value in variant.parameters.items():
        domain = dims.parameters.get(name)
        if domain is None:
            out.append(
                ValidationIssue(f"{path}.parameters[{name}]", "undeclared parameter")
            )
        elif domain.is_well_formed() and not domain.contains(value):
            out.append(
                ValidationIssue(
                    f"{path}.parameters[{name}]",
                    f"value {value!r} outside declared domain",
                )
            )


def _check_profile(profile: VariantProfile, path: str, out: list) -> None:
    if profile.service_time_us <= 0:
        out.append(ValidationIssue(f"{path}.service_time_us", "must be > 0"))
    if not 0.0 <= profile.qor <= 1.0:
        out.append(ValidationIssue(f"{path}.qor", "must be within [0, 1]"))
    if profile.noise is not None and profile.noise.sigma < 0:
        out.append(ValidationIssue(f"{path}.noise.sigma", "must be >= 0"))


def validate_spec(spec: MicroserviceSpec) -> ValidationReport:
    """Check every invariant of a service spec; empty report means valid."""
    out: list[ValidationIssue] = []
    root = f"services[{spec.service_id}]"
    _check_dimensions(spec.dimensions, f"{root}.dimensions", out)

    if not spec.variants:
        out.append(ValidationIssue(f"{root}.variants", "at least one variant required"))

    seen: set[str] = set()
    for i, (variant, profile) in enumerate(spec.variants):
        path = f"{root}.variants[{i}]"
        if variant.variant_id != profile.variant_id:
            out.append(
                ValidationIssue(path, "variant and profile ids must match")
            )
        if variant.variant_id in seen:
            out.append(
                ValidationIssue(
                    f"{path}.variant_id", f"duplicate id {variant.variant_id!r}"
                )
            )
        seen.add(variant.variant_id)
        _check_variant(variant, spec.dimensions, path, out)
        _check_profile(profile, path, out)

    if spec.variants and spec.initial_variant not in seen:
        out.append(
            ValidationIssue(
                f"{root}.initial_variant",
                f"{spec.initial_variant!r} is not a declared variant",
            )
        )
    return ValidationReport(tuple(out))


def _format_value(value: object) -> str:
    if isinstance(value, float):
        return f"{value:g}"
    return str(value)


def enumerate_variants(dimensions: AdaptationDimensions) -> list[ServiceVariant]:
    """All variants spanned by the dimensions.

    The result is the cartesian product of the algorithms, the discretized
    parameter grids, and the auxiliary data assets; an empty dimension
    contributes a single "none" element. The variant count therefore equals
    the product of the dimension cardinalities. Raises ValueError for a
    parameter range declared without a step.
    """
    algorithms: Sequence[str | None] = dimensions.algorithms or (None,)
    aux: Sequence[str | None] = dimensions.auxiliary_data or (None,)
    names = list(dimensions.parameters)
    grids = [dimensions.parameters[name].grid() for name in names]

    variants = []
    for algo, combo, data in itertools.product(algorithms, itertools.product(*grids), aux):
        params = dict(zip(names, combo))
        parts = []
        if algo is not None:
            parts.append(algo)
        parts.extend(f"{n}={_format_value(v)}" for n, v in params.items())
        if data is not None:
            parts.append(data)
        variant_id = "|".join(parts) if parts else "default"
        variants.append(
            ServiceVariant(
                variant_id=variant_id, algorithm=algo, parameters=params, aux_data=data
            )
        )
    return variants
