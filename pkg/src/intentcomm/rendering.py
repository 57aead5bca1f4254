"""Per-segment overlay rendering: whitened annotated image, trajectory drawing
with velocity- and force-coded colors, base-axes glyph, and a crop around the
segment.

All drawing constants are fixed in :class:`RenderStyle` so repeated runs are
byte-identical and golden-image tests stay stable.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw

from .annotation import AnnotatedScene, PixelRect
from .core import CameraModel, FORCE_EPSILON_N, Trajectory
from .segmentation import SegmentationResult

VELOCITY_DARK_GREEN = (0, 100, 0)
VELOCITY_BRIGHT_GREEN = (0, 255, 0)
FORCE_CYAN = (0, 255, 255)
FORCE_MAGENTA = (255, 0, 255)
START_SQUARE_COLOR = (0, 0, 255)
END_SQUARE_COLOR = (255, 0, 0)
AXES_COLORS = ((255, 0, 0), (0, 255, 0), (0, 0, 255))


class ProjectionError(ValueError):
    pass


@dataclass(frozen=True)
class RenderStyle:
    whitening: float = 0.5
    square_side_px: int = 14
    circle_radius_px: int = 6
    line_width_px: int = 4
    axes_arm_px: int = 40
    axes_origin_px: tuple[int, int] = (50, 50)
    axes_width_px: int = 3
    crop_pad_fraction: float = 0.2
    crop_pad_min_px: int = 40


DEFAULT_STYLE = RenderStyle()


@dataclass(frozen=True)
class MarkerLog:
    kind: str  # "square" or "circle"
    waypoint_index: int
    pixel: tuple[int, int]
    color: tuple[int, int, int]


@dataclass(frozen=True)
class LineLog:
    interval: int  # from waypoint index
    color: tuple[int, int, int]
    from_pixel: tuple[int, int]
    to_pixel: tuple[int, int]


@dataclass(frozen=True, eq=False)
class RenderedSegmentView:
    segment_index: int
    full_image: np.ndarray
    crop_image: np.ndarray
    crop_rect: PixelRect
    projected_points: tuple[tuple[float, float], ...]
    markers: tuple[MarkerLog, ...]
    lines: tuple[LineLog, ...]


def project_points(camera: CameraModel, positions_m) -> np.ndarray:
    """Pinhole-project base-frame points to sub-pixel image coordinates.

    Raises :class:`ProjectionError` naming the (1-based) index of any point
    with non-positive depth in the camera frame.
    """
    pts = np.atleast_2d(np.asarray(positions_m, dtype=float))
    transform = camera.base_to_camera
    cam_pts = pts @ transform[:3, :3].T + transform[:3, 3]
    depths = cam_pts[:, 2]
    bad = np.nonzero(depths <= 0)[0]
    if bad.size:
        i = int(bad[0])
        raise ProjectionError(f"non-positive depth {depths[i]:.6f} at point {i + 1}")
    u = camera.fx * cam_pts[:, 0] / depths + camera.cx
    v = camera.fy * cam_pts[:, 1] / depths + camera.cy
    return np.stack([u, v], axis=1)


def _lerp_channel(a: int, b: int, t: float) -> int:
    return int(a + t * (b - a) + 0.5)


def velocity_color(speed_mps: float, segment_min: float, segment_max: float) -> tuple[int, int, int]:
    """Green shade for a waypoint speed, dark at the segment minimum and bright
    at the maximum; a degenerate range maps to the midpoint shade."""
    if segment_max - segment_min <= 0:
        t = 0.5
    else:
        t = (speed_mps - segment_min) / (segment_max - segment_min)
        t = min(1.0, max(0.0, t))
    return (0, _lerp_channel(VELOCITY_DARK_GREEN[1], VELOCITY_BRIGHT_GREEN[1], t), 0)


def force_color(
    force_n: float,
    segment_min: float,
    segment_max: float,
    epsilon: float = FORCE_EPSILON_N,
) -> tuple[int, int, int]:
    """Cyan-to-magenta shade for an interval force, relative to the segment's
    forceful range; zero-force intervals are pure cyan."""
    if force_n <= epsilon:
        return FORCE_CYAN
    if segment_max - segment_min <= epsilon:
        t = 0.5
    else:
        t = (force_n - segment_min) / (segment_max - segment_min)
        t = min(1.0, max(0.0, t))
    return (
        _lerp_channel(FORCE_CYAN[0], FORCE_MAGENTA[0], t),
        _lerp_channel(FORCE_CYAN[1], FORCE_MAGENTA[1], t),
        _lerp_channel(FORCE_CYAN[2], FORCE_MAGENTA[2], t),
    )


def whiten(image: np.ndarray, factor: float = 0.5) -> np.ndarray:
    """Blend ``image`` toward white: round(factor*255 + (1-factor)*input),
    ties rounding up."""
    blended = factor * 255.0 + (1.0 - factor) * image.astype(np.float64)
    return np.floor(blended + 0.5).astype(np.uint8)


def _draw_axes_glyph(draw: ImageDraw.ImageDraw, camera: CameraModel, style: RenderStyle):
    rotation = camera.base_to_camera[:3, :3]
    ox, oy = style.axes_origin_px
    for axis, color in zip(np.eye(3), AXES_COLORS):
        direction = rotation @ axis
        planar = np.array([direction[0], direction[1]])
        norm = np.linalg.norm(planar)
        if norm < 1e-9:
            continue
        planar = planar / norm * style.axes_arm_px
        draw.line(
            (ox, oy, ox + planar[0], oy + planar[1]),
            fill=color,
            width=style.axes_width_px,
        )


def _square_bbox(pixel: tuple[int, int], side: int) -> tuple[int, int, int, int]:
    half = side // 2
    return (pixel[0] - half, pixel[1] - half, pixel[0] - half + side - 1, pixel[1] - half + side - 1)


def render_segment_views(
    annotated: AnnotatedScene,
    trajectory: Trajectory,
    segmentation: SegmentationResult,
    camera: CameraModel,
    style: RenderStyle = DEFAULT_STYLE,
) -> list[RenderedSegmentView]:
    """Render one overlay view (full image plus crop) per segment range."""
    positions = [wp.position_m for wp in trajectory.waypoints]
    try:
        all_pixels = project_points(camera, positions)
    except ProjectionError as exc:
        raise ProjectionError(f"waypoint projection failed: {exc}") from exc

    height, width = annotated.annotated_image.shape[:2]
    background = whiten(annotated.annotated_image, style.whitening)
    views: list[RenderedSegmentView] = []

    for k, (start, end) in enumerate(segmentation.ranges, start=1):
        img = Image.fromarray(background.copy())
        draw = ImageDraw.Draw(img)
        _draw_axes_glyph(draw, camera, style)

        seg_pixels = all_pixels[start - 1 : end]
        rounded = [(int(round(u)), int(round(v))) for u, v in seg_pixels]
        seg_waypoints = trajectory.waypoints[start - 1 : end]

        speeds = [wp.speed_mps for wp in seg_waypoints]
        speed_min, speed_max = min(speeds), max(speeds)
        interval_forces = [trajectory.interval_force_n(j) for j in range(start, end)]
        forceful = [
            f for j, f in zip(range(start, end), interval_forces)
            if trajectory.interval_is_forceful(j)
        ]
        force_min = min(forceful) if forceful else 0.0
        force_max = max(forceful) if forceful else 0.0

        lines: list[LineLog] = []
        for offset, j in enumerate(range(start, end)):
            value = interval_forces[offset] if trajectory.interval_is_forceful(j) else 0.0
            color = force_color(value, force_min, force_max)
            draw.line((*rounded[offset], *rounded[offset + 1]), fill=color, width=style.line_width_px)
            lines.append(
                LineLog(interval=j, color=color, from_pixel=rounded[offset], to_pixel=rounded[offset + 1])
            )

        markers: list[MarkerLog] = []
        markers.append(
            MarkerLog(kind="square", waypoint_index=start, pixel=rounded[0], color=START_SQUARE_COLOR)
        )
        r = style.circle_radius_px
        for offset, wp in enumerate(seg_waypoints[1:-1], start=1):
            color = velocity_color(wp.speed_mps, speed_min, speed_max)
            x, y = rounded[offset]
            draw.ellipse((x - r, y - r, x + r, y + r), fill=color)
            markers.append(MarkerLog(kind="circle", waypoint_index=wp.index, pixel=(x, y), color=color))
        markers.append(
            MarkerLog(kind="square", waypoint_index=end, pixel=rounded[-1], color=END_SQUARE_COLOR)
        )
        # Squares drawn last so segment endpoints stay visible over the path.
        draw.rectangle(_square_bbox(rounded[0], style.square_side_px), fill=START_SQUARE_COLOR)
        draw.rectangle(_square_bbox(rounded[-1], style.square_side_px), fill=END_SQUARE_COLOR)

        us = seg_pixels[:, 0]
        vs = seg_pixels[:, 1]
        diag = float(np.hypot(us.max() - us.min(), vs.max() - vs.min()))
        pad = max(style.crop_pad_fraction * diag, float(style.crop_pad_min_px))
        crop = PixelRect(
            x0=int(np.floor(us.min() - pad)),
            y0=int(np.floor(vs.min() - pad)),
            x1=int(np.ceil(us.max() + pad)),
            y1=int(np.ceil(vs.max() + pad)),
        ).clamped(width, height)

        full = np.asarray(img, dtype=np.uint8)
        views.append(
            RenderedSegmentView(
                segment_index=k,
                full_image=full,
                crop_image=full[crop.y0 : crop.y1, crop.x0 : crop.x1].copy(),
                crop_rect=crop,
                projected_points=tuple((float(u), float(v)) for u, v in seg_pixels),
                markers=tuple(markers),
                lines=tuple(lines),
            )
        )
    return views


def encode_png(image: np.ndarray) -> bytes:
    """Deterministic PNG encoding for golden tests and artifacts."""
    buf = io.BytesIO()
    Image.fromarray(image).save(buf, format="PNG", optimize=False, compress_level=6)
    return buf.getvalue()


def save_png(image: np.ndarray, path) -> None:
    with open(path, "wb") as fp:
        fp.write(encode_png(image))
