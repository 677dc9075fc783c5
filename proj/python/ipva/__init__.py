"""Inerter pendulum vibration absorber: simulation, design and control."""

from ._ipva import (
    IpvaError,
    RoadModel,
    SuspensionParams,
    benchmark_natural_frequencies,
    closed_form_linear,
    closed_loop,
    evaluate_design,
    generate_road,
    preset,
    psd,
    run_experiment,
    simulate_passive,
)

__all__ = [
    "IpvaError",
    "RoadModel",
    "SuspensionParams",
    "benchmark_natural_frequencies",
    "closed_form_linear",
    "closed_loop",
    "evaluate_design",
    "generate_road",
    "preset",
    "psd",
    "run_experiment",
    "simulate_passive",
]
