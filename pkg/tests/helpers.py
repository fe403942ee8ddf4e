"""Shared scenario builders and independent oracles for the test suite."""

from __future__ import annotations

import math

import variantsim as vs


def face_detection_spec() -> vs.MicroserviceSpec:
    """Two-variant face-detection analog: haar 70 ms / qor 0.67, lbp 45 ms / 0.57."""
    return vs.MicroserviceSpec(
        service_id="face-detection",
        dimensions=vs.AdaptationDimensions(
            algorithms=("haar", "lbp"),
            parameters={
                "scale-factor": vs.ParameterRange(1.0, 1.9, 0.1),
                "min-neighbors": vs.ParameterRange(1, 10, 1),
            },
        ),
        variants=(
            (
                vs.ServiceVariant("haar", algorithm="haar",
                                  parameters={"scale-factor": 1.2, "min-neighbors": 3}),
                vs.VariantProfile("haar", 70_000, 0.67),
            ),
            (
                vs.ServiceVariant("lbp", algorithm="lbp",
                                  parameters={"scale-factor": 1.2, "min-neighbors": 3}),
                vs.VariantProfile("lbp", 45_000, 0.57),
            ),
        ),
        initial_variant="haar",
    )


def face_config(
    rate: float,
    seed: int,
    switching: bool = True,
    stability_check: bool = True,
    initial_selection: bool = False,
    requests: int = 500,
    switch_mode: str = "control",
    switch_latency_us: int = 17_000,
) -> vs.ScenarioConfig:
    return vs.ScenarioConfig(
        services=(face_detection_spec(),),
        arrivals=vs.ArrivalSpec(rate=rate),
        constraint_us=500_000,
        request_count=requests,
        seed=seed,
        policy=vs.PolicyOptions(
            switching=switching,
            stability_check=stability_check,
            initial_selection=initial_selection,
            alpha=1.0,
            switch_mode=switch_mode,
            switch_latency_us=switch_latency_us,
        ),
    )


def upscaling_spec() -> vs.MicroserviceSpec:
    """Three-model upscaling analog; only the auxiliary-data dimension varies."""
    return vs.MicroserviceSpec(
        service_id="upscaling",
        dimensions=vs.AdaptationDimensions(
            auxiliary_data=("gans", "psnr-large", "psnr-small")
        ),
        variants=(
            (vs.ServiceVariant("gans", aux_data="gans"),
             vs.VariantProfile("gans", 4_000_000, 0.95)),
            (vs.ServiceVariant("psnr-large", aux_data="psnr-large"),
             vs.VariantProfile("psnr-large", 3_600_000, 0.90)),
            (vs.ServiceVariant("psnr-small", aux_data="psnr-small"),
             vs.VariantProfile("psnr-small", 1_200_000, 0.70)),
        ),
        initial_variant="gans",
    )


def upscaling_config(seed: int, rate: float = 0.23, requests: int = 50) -> vs.ScenarioConfig:
    return vs.ScenarioConfig(
        services=(upscaling_spec(),),
        arrivals=vs.ArrivalSpec(rate=rate),
        constraint_us=16_000_000,
        request_count=requests,
        seed=seed,
        policy=vs.PolicyOptions(initial_selection=True, stability_check=True, alpha=1.0),
    )


def single_variant_config(
    service_time_us: int,
    rate: float,
    requests: int,
    seed: int,
    constraint_us: int = 10_000_000,
) -> vs.ScenarioConfig:
    spec = vs.MicroserviceSpec(
        service_id="svc",
        dimensions=vs.AdaptationDimensions(algorithms=("only",)),
        variants=(
            (vs.ServiceVariant("v", algorithm="only"),
             vs.VariantProfile("v", service_time_us, 0.9)),
        ),
        initial_variant="v",
    )
    return vs.ScenarioConfig(
        services=(spec,),
        arrivals=vs.ArrivalSpec(rate=rate),
        constraint_us=constraint_us,
        request_count=requests,
        seed=seed,
        policy=vs.PolicyOptions(switching=False, initial_selection=False),
    )


def kendall_brute_force(x, y) -> float:
    """O(n^2) all-pairs tau-b; the independent oracle for kendall_tau."""
    n = len(x)
    con = dis = tie_x = tie_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0:
                tie_x += 1
            if dy == 0:
                tie_y += 1
            if dx == 0 or dy == 0:
                continue
            if (dx > 0) == (dy > 0):
                con += 1
            else:
                dis += 1
    n0 = n * (n - 1) // 2
    denom_sq = (n0 - tie_x) * (n0 - tie_y)
    if denom_sq == 0:
        return float("nan")
    return (con - dis) / math.sqrt(denom_sq)
