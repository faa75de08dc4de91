"""Bayesian-optimisation quality-diversity search (BOP-Elites) and baselines."""

from ._core import (
    Archive,
    GpModel,
    Problem,
    RegionGrid,
    cutoff_omega,
    ei_region,
    make_problem,
    map_elites,
    region_probability,
    report_directory,
    run_bop_elites,
    run_experiment,
    sail,
    score_pm,
    sobol,
    sphen,
    upscale,
)

__all__ = [
    "Archive",
    "GpModel",
    "Problem",
    "RegionGrid",
    "cutoff_omega",
    "ei_region",
    "make_problem",
    "map_elites",
    "region_probability",
    "report_directory",
    "run_bop_elites",
    "run_experiment",
    "sail",
    "score_pm",
    "sobol",
    "sphen",
    "upscale",
]
