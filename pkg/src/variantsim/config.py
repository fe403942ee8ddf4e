"""Scenario files: a versioned YAML schema mapped onto ScenarioConfig.

Unknown keys are errors so a typo cannot silently change an experiment.
Errors collect the full path of every offending key before the loader gives
up, which keeps fixing a scenario file a one-pass affair.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .model import (
    AdaptationDimensions,
    LognormalNoise,
    MicroserviceSpec,
    ParameterRange,
    ParameterValues,
    ServiceChainSpec,
    ServiceVariant,
    VariantProfile,
)
from .policy import PolicyOptions, RecoveryOptions
from .simulator import ArrivalSpec, ScenarioConfig, validate_scenario

SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    """Scenario file failed to parse or validate; messages carry key paths."""

    def __init__(self, messages: list[str]) -> None:
        super().__init__("\n".join(messages))
        self.messages = messages


class _Collector:
    def __init__(self) -> None:
        self.messages: list[str] = []

    def error(self, path: str, message: str) -> None:
        self.messages.append(f"{path}: {message}")

    def raise_if_any(self) -> None:
        if self.messages:
            raise ScenarioError(self.messages)


def _require_mapping(value, path: str, errors: _Collector) -> dict:
    if not isinstance(value, dict):
        errors.error(path, f"expected a mapping, got {type(value).__name__}")
        return {}
    return value


def _check_keys(mapping: dict, allowed: set[str], required: set[str], path: str, errors: _Collector) -> None:
    for key in mapping:
        if key not in allowed:
            errors.error(f"{path}.{key}", "unknown key")
    for key in required:
        if key not in mapping:
            errors.error(f"{path}.{key}", "missing required key")


def _get_number(mapping: dict, key: str, path: str, errors: _Collector, default=None):
    value = mapping.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.error(f"{path}.{key}", f"expected a number, got {value!r}")
        return default
    return value


def _get_int(mapping: dict, key: str, path: str, errors: _Collector, default=None):
    value = _get_number(mapping, key, path, errors, default)
    if value is None:
        return None
    if isinstance(value, float) and not value.is_integer():
        errors.error(f"{path}.{key}", f"expected an integer, got {value!r}")
        return default
    return int(value)


def _parse_domain(raw, path: str, errors: _Collector):
    if isinstance(raw, list):
        return ParameterValues(values=tuple(raw))
    raw = _require_mapping(raw, path, errors)
    _check_keys(raw, {"min", "max", "step", "values"}, set(), path, errors)
    if "values" in raw:
        values = raw["values"]
        if not isinstance(values, list):
            errors.error(f"{path}.values", "expected a list")
            return ParameterValues(values=())
        return ParameterValues(values=tuple(values))
    minimum = _get_number(raw, "min", path, errors)
    maximum = _get_number(raw, "max", path, errors)
    if minimum is None or maximum is None:
        errors.error(path, "range domain needs min and max")
        return ParameterValues(values=())
    step = _get_number(raw, "step", path, errors)
    return ParameterRange(minimum=float(minimum), maximum=float(maximum), step=step)


def _parse_variant(raw, path: str, errors: _Collector):
    raw = _require_mapping(raw, path, errors)
    _check_keys(
        raw,
        {"id", "algorithm", "parameters", "aux_data", "service_time_us", "qor", "noise"},
        {"id", "service_time_us", "qor"},
        path,
        errors,
    )
    variant_id = str(raw.get("id", ""))
    params = _require_mapping(raw.get("parameters", {}), f"{path}.parameters", errors)
    noise = None
    if "noise" in raw:
        noise_raw = _require_mapping(raw["noise"], f"{path}.noise", errors)
        _check_keys(noise_raw, {"kind", "sigma"}, {"kind"}, f"{path}.noise", errors)
        kind = noise_raw.get("kind")
        if kind == "lognormal":
            sigma = _get_number(noise_raw, "sigma", f"{path}.noise", errors, 0.0)
            noise = LognormalNoise(sigma=float(sigma or 0.0))
        elif kind not in (None, "none"):
            errors.error(f"{path}.noise.kind", f"unknown noise kind {kind!r}")
    variant = ServiceVariant(
        variant_id=variant_id,
        algorithm=raw.get("algorithm"),
        parameters=dict(params),
        aux_data=raw.get("aux_data"),
    )
    profile = VariantProfile(
        variant_id=variant_id,
        service_time_us=_get_int(raw, "service_time_us", path, errors, 0) or 0,
        qor=float(_get_number(raw, "qor", path, errors, 0.0) or 0.0),
        noise=noise,
    )
    return variant, profile


def _parse_service(raw, index: int, errors: _Collector) -> MicroserviceSpec:
    path = f"services[{index}]"
    raw = _require_mapping(raw, path, errors)
    _check_keys(
        raw,
        {"id", "dimensions", "variants", "initial_variant"},
        {"id", "variants", "initial_variant"},
        path,
        errors,
    )
    dims_raw = _require_mapping(raw.get("dimensions", {}), f"{path}.dimensions", errors)
    _check_keys(
        dims_raw,
        {"algorithms", "parameters", "auxiliary_data"},
        set(),
        f"{path}.dimensions",
        errors,
    )
    parameters = {}
    for name, domain_raw in _require_mapping(
        dims_raw.get("parameters", {}), f"{path}.dimensions.parameters", errors
    ).items():
        parameters[name] = _parse_domain(
            domain_raw, f"{path}.dimensions.parameters[{name}]", errors
        )
    dimensions = AdaptationDimensions(
        algorithms=tuple(dims_raw.get("algorithms", []) or []),
        parameters=parameters,
        auxiliary_data=tuple(dims_raw.get("auxiliary_data", []) or []),
    )

    variants_raw = raw.get("variants", [])
    if not isinstance(variants_raw, list):
        errors.error(f"{path}.variants", "expected a list")
        variants_raw = []
    variants = tuple(
        _parse_variant(v, f"{path}.variants[{i}]", errors)
        for i, v in enumerate(variants_raw)
    )
    return MicroserviceSpec(
        service_id=str(raw.get("id", f"service{index}")),
        dimensions=dimensions,
        variants=variants,
        initial_variant=str(raw.get("initial_variant", "")),
    )


def _parse_chain(raw, index: int, errors: _Collector) -> ServiceChainSpec:
    path = f"chains[{index}]"
    raw = _require_mapping(raw, path, errors)
    _check_keys(raw, {"id", "stages", "constraint_us"}, {"id", "stages"}, path, errors)
    stages = raw.get("stages", [])
    if not isinstance(stages, list):
        errors.error(f"{path}.stages", "expected a list")
        stages = []
    return ServiceChainSpec(
        chain_id=str(raw.get("id", f"chain{index}")),
        stages=tuple(str(s) for s in stages),
        constraint_us=_get_int(raw, "constraint_us", path, errors),
    )


def _parse_policy(raw, errors: _Collector) -> PolicyOptions:
    path = "policy"
    raw = _require_mapping(raw, path, errors)
    _check_keys(
        raw,
        {
            "stability_check",
            "alpha",
            "cooldown",
            "recovery",
            "switch_latency_us",
            "switch_mode",
            "initial_selection",
            "switching",
        },
        set(),
        path,
        errors,
    )
    recovery = None
    if raw.get("recovery") is not None:
        rec_raw = _require_mapping(raw["recovery"], f"{path}.recovery", errors)
        _check_keys(
            rec_raw,
            {"stable_window", "margin"},
            {"stable_window", "margin"},
            f"{path}.recovery",
            errors,
        )
        try:
            recovery = RecoveryOptions(
                stable_window=_get_int(rec_raw, "stable_window", f"{path}.recovery", errors, 1) or 1,
                margin=float(_get_number(rec_raw, "margin", f"{path}.recovery", errors, 0.0) or 0.0),
            )
        except ValueError as exc:
            errors.error(f"{path}.recovery", str(exc))
    try:
        return PolicyOptions(
            stability_check=bool(raw.get("stability_check", True)),
            alpha=float(_get_number(raw, "alpha", path, errors, 1.0) or 1.0),
            cooldown=_get_int(raw, "cooldown", path, errors, 0) or 0,
            recovery=recovery,
            switch_latency_us=(
                _get_int(raw, "switch_latency_us", path, errors, 17_000) or 0
            ),
            switch_mode=str(raw.get("switch_mode", "control")),
            initial_selection=bool(raw.get("initial_selection", True)),
            switching=bool(raw.get("switching", True)),
        )
    except ValueError as exc:
        errors.error(path, str(exc))
        return PolicyOptions()


def parse_scenario(raw: dict, source: str = "<scenario>") -> ScenarioConfig:
    """Turn a parsed YAML mapping into a validated ScenarioConfig."""
    errors = _Collector()
    raw = _require_mapping(raw, source, errors)
    _check_keys(
        raw,
        {
            "schema",
            "services",
            "chains",
            "arrivals",
            "constraint_us",
            "requests",
            "seed",
            "policy",
        },
        {"schema", "services", "arrivals", "constraint_us", "requests", "seed"},
        source,
        errors,
    )
    schema = raw.get("schema")
    if schema != SCHEMA_VERSION:
        errors.error(f"{source}.schema", f"expected schema {SCHEMA_VERSION}, got {schema!r}")

    services_raw = raw.get("services", [])
    if not isinstance(services_raw, list):
        errors.error(f"{source}.services", "expected a list")
        services_raw = []
    services = tuple(_parse_service(s, i, errors) for i, s in enumerate(services_raw))

    chains_raw = raw.get("chains", [])
    if chains_raw is None:
        chains_raw = []
    if not isinstance(chains_raw, list):
        errors.error(f"{source}.chains", "expected a list")
        chains_raw = []
    chains = tuple(_parse_chain(c, i, errors) for i, c in enumerate(chains_raw))

    arrivals_raw = _require_mapping(raw.get("arrivals", {}), f"{source}.arrivals", errors)
    _check_keys(arrivals_raw, {"rate", "unit", "schedule"}, {"rate"}, f"{source}.arrivals", errors)
    schedule = None
    if arrivals_raw.get("schedule") is not None:
        sched_raw = arrivals_raw["schedule"]
        if not isinstance(sched_raw, list):
            errors.error(f"{source}.arrivals.schedule", "expected a list")
            sched_raw = []
        segments = []
        for i, seg in enumerate(sched_raw):
            seg = _require_mapping(seg, f"{source}.arrivals.schedule[{i}]", errors)
            _check_keys(
                seg, {"start_us", "rate"}, {"start_us", "rate"},
                f"{source}.arrivals.schedule[{i}]", errors,
            )
            start = _get_int(seg, "start_us", f"{source}.arrivals.schedule[{i}]", errors, 0)
            rate = _get_number(seg, "rate", f"{source}.arrivals.schedule[{i}]", errors, 0.0)
            segments.append((start or 0, float(rate or 0.0)))
        schedule = tuple(segments)
    arrivals = ArrivalSpec(
        rate=float(_get_number(arrivals_raw, "rate", f"{source}.arrivals", errors, 0.0) or 0.0),
        unit=str(arrivals_raw.get("unit", "per_second")),
        schedule=schedule,
    )

    policy = _parse_policy(raw.get("policy", {}), errors)
    config = ScenarioConfig(
        services=services,
        arrivals=arrivals,
        constraint_us=_get_int(raw, "constraint_us", source, errors, 0) or 0,
        request_count=_get_int(raw, "requests", source, errors, 0) or 0,
        seed=_get_int(raw, "seed", source, errors, 0) or 0,
        policy=policy,
        chains=chains,
    )
    errors.raise_if_any()

    report = validate_scenario(config)
    if not report.ok:
        raise ScenarioError([str(issue) for issue in report.issues])
    return config


def load_scenario(path) -> ScenarioConfig:
    """Read and validate a scenario YAML file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError([f"{path}: invalid YAML: {exc}"]) from exc
    return parse_scenario(raw, source=str(path))
