"""NOMA-assisted OTFS-ISAC link-level simulation laboratory."""

__version__ = "0.1.0"

from .allocation import (AllocationInfeasibleError, ChannelGains,
                         PowerAllocation, QosSpec, RateReport, grid_oracle,
                         mmf_imperfect, mmf_perfect, rates_bound,
                         rates_perfect, sr_imperfect, sr_perfect)
from .arrays import Direction, SteeringVector, UpaConfig, beam_gain, steering
from .channel import (LinkBudget, Path, PathSet, apply_channel,
                      draw_nlos_paths, los_path_from_kinematics, path_loss)
from .constants import SPEED_OF_LIGHT
from .grids import (DdGrid, FrameConfig, GridShapeError, TfGrid, TimeSeries,
                    demodulate, heisenberg, isfft, modulate, random_dd_grid,
                    sfft, wigner)
from .motion import (DegenerateGeometryError, MotionState, Track,
                     position_from_spherical, predict_range_paper,
                     predict_state_kinematic, range_from_delay, smooth_track,
                     speed_from_doppler, velocity_angle)
from .sensing import (Detection, MfMap, NlosStrengthEstimate, detect_peaks,
                      estimate_angles, estimate_nlos_strength,
                      matched_filter_map)
