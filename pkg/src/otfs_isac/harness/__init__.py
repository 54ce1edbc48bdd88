"""Scenario configuration, Monte Carlo sweeps and report emission."""

from .config import (ConfigError, ScenarioConfig, desk_preset, load_config,
                     paper_preset, parse_sweep)
from .report import emit_csv, emit_plots, emit_track_csv, write_manifest
from .sweep import (OBJECTIVES, VARIANTS, TrialResult, closed_form_curves,
                    run_figure, run_sweep)
from .tracking import TrackPoint, mean_range_error_pct, run_tracking
