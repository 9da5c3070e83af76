"""
Scenario configuration, the simulation loop and latency sweeps.
"""

from qocsim.runner.scenario import ScenarioConfig, load_scenario, scenario_from_entries, build_trajectory, run
from qocsim.runner.sweep import SweepSpec, SweepPoint, latency_config, run_sweep, run_sweep_sync

__all__ = [
    'ScenarioConfig', 'load_scenario', 'scenario_from_entries', 'build_trajectory', 'run',
    'SweepSpec', 'SweepPoint', 'latency_config', 'run_sweep', 'run_sweep_sync',
]
