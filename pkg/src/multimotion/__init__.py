"""Simultaneous segmentation and SE(3) trajectory estimation of every rigid
motion observed by a moving stereo camera, plus the synthetic-scene tooling
used to exercise it."""

__version__ = "0.1.0"

from .se3 import Pose  # noqa: F401
from .stereo import StereoIntrinsics, StereoObservation  # noqa: F401
from .tracklets import Tracklet  # noqa: F401
from .labeling import EnergyParams, Label, Labeling, run_window  # noqa: F401
