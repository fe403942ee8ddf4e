"""Synthetic workloads standing in for the real vision services.

Real image-processing services are out of scope, so benchmarks are generated
from their published timing characteristics: the face-detection pair runs at
roughly 70/45 ms per request in isolation (130/80 ms through the full
anonymization chain) with correctness around 0.67/0.57, dominated by the
algorithm choice with much weaker parameter effects.

Two generator families live here: variant sweep tables, which enumerate
variant combinations the way a profiling campaign would and are the input to
the correlation analysis, and profiler benchmark datasets, which add
machine-load features and noise for the execution-time estimator.
"""

from __future__ import annotations

import numpy as np

from .analysis import ObservationTable
from .profiler import ProfileDataset, make_dataset

# Documented profiler benchmark generator (all times in microseconds):
#   duration = (base[algorithm] - 15000*(scale_factor-1.0)
#               + 9000*cpu_load - 300*min_neighbors) * lognormal(sigma=0.02)
# with base times 70 ms (haar) and 45 ms (lbp).
BENCHMARK_BASE_US = {"haar": 70_000.0, "lbp": 45_000.0}
BENCHMARK_SCALE_SLOPE_US = -15_000.0
BENCHMARK_LOAD_SLOPE_US = 9_000.0
BENCHMARK_NEIGHBORS_SLOPE_US = -300.0
BENCHMARK_NOISE_SIGMA = 0.02


def _mean_one_lognormal(rng: np.random.Generator, sigma: float, size: int) -> np.ndarray:
    return rng.lognormal(mean=-0.5 * sigma * sigma, sigma=sigma, size=size)


def profiler_benchmark(rows: int = 5000, seed: int = 0) -> ProfileDataset:
    """Face-detection-style benchmark for the execution-time estimator.

    Features: algorithm (categorical), scale_factor on the 1.0..1.9 grid,
    min_neighbors 1..10, cpu_load uniform in [0, 1]. The duration follows
    the documented generator above; the algorithm term dominates.
    """
    rng = np.random.default_rng(seed)
    algorithm = rng.choice(["haar", "lbp"], size=rows)
    scale_factor = rng.integers(0, 10, size=rows) * 0.1 + 1.0
    min_neighbors = rng.integers(1, 11, size=rows).astype(float)
    cpu_load = rng.uniform(0.0, 1.0, size=rows)

    base = np.where(algorithm == "haar", BENCHMARK_BASE_US["haar"], BENCHMARK_BASE_US["lbp"])
    duration = (
        base
        + BENCHMARK_SCALE_SLOPE_US * (scale_factor - 1.0)
        + BENCHMARK_LOAD_SLOPE_US * cpu_load
        + BENCHMARK_NEIGHBORS_SLOPE_US * min_neighbors
    ) * _mean_one_lognormal(rng, BENCHMARK_NOISE_SIGMA, rows)

    return make_dataset(
        features={
            "algorithm": algorithm.tolist(),
            "scale_factor": scale_factor,
            "min_neighbors": min_neighbors,
            "cpu_load": cpu_load,
        },
        target_us=duration,
        kinds={
            "algorithm": "categorical",
            "scale_factor": "numeric",
            "min_neighbors": "numeric",
            "cpu_load": "numeric",
        },
    )


def pure_noise_dataset(rows: int = 5000, seed: int = 0) -> ProfileDataset:
    """Same feature layout as the benchmark, but the target ignores them."""
    bench = profiler_benchmark(rows, seed)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    noise = 60_000.0 * rng.lognormal(mean=0.0, sigma=0.3, size=rows)
    return make_dataset(
        features=dict(bench.features),
        target_us=noise,
        kinds={c.name: c.kind for c in bench.schema},
    )


def face_chain_sweep(
    repetitions: int = 3,
    seed: int = 0,
    noise_sigma: float = 0.05,
    correctness_noise: float = 0.08,
    average_repetitions: bool = False,
) -> ObservationTable:
    """Sweep of the face-anonymization chain variants, as a profiling campaign
    would produce: every combination of compression quality, detection
    algorithm, min-neighbors, and blur algorithm, repeated and measured.

    Execution time is dominated by the detection algorithm (130 ms haar vs
    80 ms lbp through the chain); compression quality, min-neighbors, and the
    blur algorithm contribute only weak effects. Correctness is likewise
    driven by the algorithm (0.67 vs 0.57) plus a min-neighbors penalty, but
    with enough spread that its rank correlation with the algorithm stays
    below the execution-time one.

    With average_repetitions the repeated measurements of each combination
    collapse to their mean, yielding one row per combination; the default
    keeps the raw rows.
    """
    rng = np.random.default_rng(seed)
    algorithms, exec_times, correctness = [], [], []
    quality_col, neighbors_col, blur_col = [], [], []

    base_us = {"haar": 130_000.0, "lbp": 80_000.0}
    base_correct = {"haar": 0.67, "lbp": 0.57}

    for quality in range(1, 100, 7):
        for algorithm in ("haar", "lbp"):
            for neighbors in range(0, 10):
                for blur in ("gaussian", "median"):
                    times, corrects = [], []
                    for _ in range(repetitions):
                        time_us = (
                            base_us[algorithm]
                            + 25.0 * quality
                            - 450.0 * neighbors
                            + (2_500.0 if blur == "median" else 0.0)
                        )
                        time_us *= float(_mean_one_lognormal(rng, noise_sigma, 1)[0])
                        correct = (
                            base_correct[algorithm]
                            - 0.015 * neighbors
                            + float(rng.normal(0.0, correctness_noise))
                        )
                        times.append(time_us)
                        corrects.append(min(1.0, max(0.0, correct)))
                    if average_repetitions:
                        times = [sum(times) / len(times)]
                        corrects = [sum(corrects) / len(corrects)]
                    for time_us, correct in zip(times, corrects):
                        algorithms.append(algorithm)
                        quality_col.append(float(quality))
                        neighbors_col.append(float(neighbors))
                        blur_col.append(blur)
                        exec_times.append(time_us)
                        correctness.append(correct)

    return ObservationTable.from_columns(
        {
            "algorithm": algorithms,
            "compression_quality": quality_col,
            "min_neighbors": neighbors_col,
            "blur_algorithm": blur_col,
            "exec_time_us": exec_times,
            "correctness": correctness,
        }
    )
