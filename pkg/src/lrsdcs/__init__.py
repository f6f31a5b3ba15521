"""Low-rank plus sparse video decomposition from compressive Walsh-Hadamard measurements."""

from .framelet import FrameletTransform
from .sensing import SensingOperator, build_operator
from .solver import Decomposition, SolverConfig, reconstruct, reconstruct_color
from .volume import FrameGeometry, PixelFrame, VideoVolume, volume_from_frames, volume_to_frames

__version__ = "0.1.0"
