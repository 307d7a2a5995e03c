"""Batch command line front-end: scenario loading, stages, and writers."""

from .scenario import ScenarioFile, load_scenario
from .run import RunManifest, run_pipeline

__all__ = ["ScenarioFile", "load_scenario", "RunManifest", "run_pipeline"]
