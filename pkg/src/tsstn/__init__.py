"""Two-stage spatial-temporal win prediction with per-group attributions."""
from .core import GROUPS, Frame, FrameTable, GroupedFeatures, TeamState, group_features, validate_frame
from .ingest import NormStats, SplitSpec, fit_norm_stats, load_frames, normalize, split_by_match
from .model import Explanation, TsstnModel, build_explanation, explain_text, predict
from .simgen import SimConfig, generate, summarize
from .training import TrainConfig, TrainReport, train

__version__ = "0.1.0"
