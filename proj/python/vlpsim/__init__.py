"""Visible-light positioning toolkit.

Rolling-shutter beacon simulator, stripe decoder, two-beacon pose solver and
the principal-point calibration helpers, backed by the C++ core.
"""

from ._vlpsim import (  # noqa: F401
    CameraHeight,
    CameraIntrinsics,
    ImagePoint,
    LedFixture,
    LedRegistry,
    NoiseModel,
    PixelPoint,
    Pose2D,
    PositionFix,
    RollingShutterConfig,
    VlpError,
    WorldPoint,
    bhattacharyya,
    disc_projection,
    dispersion_center_mean,
    estimate_azimuth,
    estimate_stripe_period,
    fit_circle,
    image_to_pixel,
    led_waveform,
    load_registry,
    locate,
    normalize_angle,
    otsu_threshold,
    pixel_to_image,
    position_from_two_leds,
    project_led,
    render_frame,
    rotate_to_world,
    smallest_enclosing_circle,
)

__all__ = [name for name in dir() if not name.startswith("_")]
