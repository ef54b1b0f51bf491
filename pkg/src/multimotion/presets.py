"""Canned scene configurations used by the test suite and shipped configs.

The five-motion scene is the workhorse benchmark: a slowly orbiting stereo
camera watching a static background wall and four fast-moving blocks (two
pendulum swings, two spinners). Motions are fast enough that no two bodies
can share one rigid hypothesis within the inlier threshold. The frustum
scene adds a block that translates out of view mid-window while everything
else stays visible.
"""

from __future__ import annotations

from .simulator import BodyConfig, MotionScript, SceneConfig
from .stereo import StereoIntrinsics

DEFAULT_INTRINSICS = StereoIntrinsics(
    fu=400.0, fv=400.0, cu=320.0, cv=240.0,
    baseline=0.24, width=640, height=480, z_near=0.2,
)


def five_motion_config(frames: int = 48, noise_sigma: float = 0.5,
                       dropout: float = 0.1, seed: int = 0) -> SceneConfig:
    """Orbiting camera, static wall, two swinging and two rotating blocks."""
    return SceneConfig(
        frames=frames,
        intrinsics=DEFAULT_INTRINSICS,
        camera=MotionScript(
            "orbit",
            {"center": [0.0, 0.0, 0.0], "radius": 4.0, "height": 0.3,
             "rate": 0.012, "phase": 0.0},
        ),
        bodies=(
            BodyConfig(
                kind="static",
                params={"position": [-2.7, 0.0, 0.0]},
                n_points=150,
                extent=(0.3, 7.0, 4.6),
            ),
            BodyConfig(
                kind="swing",
                params={"pivot": [-0.45, 0.1, 0.6], "rest": [-1.0, 0.1, 0.6],
                        "axis": [0.0, 0.0, 1.0], "amplitude": 1.1,
                        "period": 14.0, "phase": 0.0},
                n_points=60,
                extent=(0.45, 0.45, 0.45),
            ),
            BodyConfig(
                kind="swing",
                params={"pivot": [0.4, -0.1, 0.55], "rest": [0.95, -0.1, 0.55],
                        "axis": [0.0, 0.0, 1.0], "amplitude": 1.0,
                        "period": 12.0, "phase": 1.5707963267948966},
                n_points=60,
                extent=(0.45, 0.45, 0.45),
            ),
            BodyConfig(
                kind="rotate",
                params={"center": [-0.85, -0.15, -0.6], "axis": [0.3, 0.3, 1.0],
                        "omega": 0.45},
                n_points=70,
                extent=(0.6, 0.6, 0.6),
            ),
            BodyConfig(
                kind="rotate",
                params={"center": [0.85, 0.15, -0.55], "axis": [1.0, 0.2, 0.4],
                        "omega": -0.5},
                n_points=70,
                extent=(0.6, 0.6, 0.6),
            ),
        ),
        noise_sigma=noise_sigma,
        dropout=dropout,
        gap_limit=2,
        seed=seed,
    )


def frustum_exit_config(frames: int = 48, seed: int = 0) -> SceneConfig:
    """Static camera; one block translates out of the frustum mid-window."""
    return SceneConfig(
        frames=frames,
        intrinsics=DEFAULT_INTRINSICS,
        camera=MotionScript(
            "orbit",
            {"center": [0.0, 0.0, 0.0], "radius": 4.0, "height": 0.3,
             "rate": 0.0, "phase": 0.0},
        ),
        bodies=(
            BodyConfig(
                kind="static",
                params={"position": [-2.7, 0.0, 0.0]},
                n_points=140,
                extent=(0.3, 7.0, 4.6),
            ),
            # Far-pivot swing approximates a straight lateral translation that
            # carries the block out of the left camera's view near frame 30.
            BodyConfig(
                kind="swing",
                params={"pivot": [-49.2, 0.0, 0.5], "rest": [0.8, 0.0, 0.5],
                        "axis": [0.0, 0.0, 1.0], "amplitude": 0.06,
                        "period": 192.0, "phase": 0.0},
                n_points=55,
                extent=(0.45, 0.45, 0.45),
            ),
            BodyConfig(
                kind="swing",
                params={"pivot": [-0.4, -0.3, 0.55], "rest": [-0.9, -0.3, 0.55],
                        "axis": [0.0, 0.0, 1.0], "amplitude": 0.9,
                        "period": 12.0, "phase": 0.0},
                n_points=55,
                extent=(0.45, 0.45, 0.45),
            ),
            BodyConfig(
                kind="rotate",
                params={"center": [0.9, 0.3, -0.5], "axis": [0.2, 0.3, 1.0],
                        "omega": 0.45},
                n_points=55,
                extent=(0.55, 0.55, 0.55),
            ),
        ),
        noise_sigma=0.25,
        dropout=0.0,
        gap_limit=2,
        seed=seed,
    )
