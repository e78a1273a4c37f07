"""Experiment drivers; importing the package registers every scenario."""

from .base import REGISTRY, RunRecord, ScenarioConfig, resolve  # noqa: F401
from . import asym, c60, epr_b, stern_gerlach, two_body  # noqa: F401

SCENARIO_IDS = ("two_body", "c60_double_slit", "stern_gerlach", "epr_b", "asym_interference")


def run(cfg: ScenarioConfig) -> RunRecord:
    return REGISTRY[cfg.scenario].runner(cfg)
