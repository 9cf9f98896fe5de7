from .run_config import ContinuumConfig, ExperimentKind, RunConfig, ScheduleConfig, TimeGrid

__all__ = ['ContinuumConfig', 'ExperimentKind', 'RunConfig', 'ScheduleConfig', 'TimeGrid']
