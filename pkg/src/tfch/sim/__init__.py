from .config import ConfigError, RunConfig, format_config, load_config, parse_config
from .driver import RunResult, StudyRow, run_convergence_study, run_simulation
from .initial_conditions import ic_star, ic_thinfilm, ic_uniform_random, ic_wedge, make_initial
from .snapshot import SnapshotError, SnapshotMeta, read_snapshot, write_snapshot
