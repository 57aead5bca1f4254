"""Produce the annotated, de-identified image: pixelated face region plus
side-colored body and facial landmark markers.

Pixelation (block averaging) is used instead of a Gaussian blur because it is
deterministic and verifiable per block. Landmarks are drawn after the blur, so
facial markers stay visible on top of it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw

from .core import BodyLandmarkSet, SceneBundle

LEFT_COLOR = (170, 220, 255)
RIGHT_COLOR = (255, 235, 60)
CENTER_COLOR = (255, 255, 255)
OUTLINE_COLOR = (40, 40, 40)

LANDMARK_RADIUS_PX = 7
LANDMARK_OUTLINE_PX = 2
DEFAULT_MARGIN_FRACTION = 0.6
MIN_FACE_BOX_PX = 32
PIXELATION_BLOCK_PX = 16

SIDE_COLORS = {"left": LEFT_COLOR, "right": RIGHT_COLOR, "center": CENTER_COLOR}


class DeidentificationError(ValueError):
    pass


@dataclass(frozen=True)
class PixelRect:
    """Integer pixel rectangle, half-open: pixels with x0 <= x < x1, y0 <= y < y1."""

    x0: int
    y0: int
    x1: int
    y1: int

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1

    def clamped(self, width: int, height: int) -> "PixelRect":
        return PixelRect(
            x0=max(0, min(self.x0, width)),
            y0=max(0, min(self.y0, height)),
            x1=max(0, min(self.x1, width)),
            y1=max(0, min(self.y1, height)),
        )


@dataclass(frozen=True)
class DrawnLandmark:
    name: str
    pixel: tuple[int, int]
    color: tuple[int, int, int]


@dataclass(frozen=True, eq=False)
class AnnotatedScene:
    annotated_image: np.ndarray
    face_region: PixelRect
    draw_log: tuple[DrawnLandmark, ...]


def compute_face_region(
    landmarks: BodyLandmarkSet,
    image_size: tuple[int, int],
    margin_fraction: float = DEFAULT_MARGIN_FRACTION,
    min_size_px: int = MIN_FACE_BOX_PX,
) -> PixelRect:
    """Bounding box of the facial landmark pixels, expanded by
    ``margin_fraction`` of its extent on each side, grown to ``min_size_px``
    per axis, and clamped to the image bounds."""
    facial = landmarks.facial_entries
    if not facial:
        raise DeidentificationError("cannot de-identify: no facial landmarks")
    us = [lm.pixel[0] for lm in facial]
    vs = [lm.pixel[1] for lm in facial]
    x0, x1 = min(us), max(us)
    y0, y1 = min(vs), max(vs)
    x0, x1 = x0 - margin_fraction * (x1 - x0), x1 + margin_fraction * (x1 - x0)
    y0, y1 = y0 - margin_fraction * (y1 - y0), y1 + margin_fraction * (y1 - y0)
    if x1 - x0 < min_size_px:
        cx = (x0 + x1) / 2.0
        x0, x1 = cx - min_size_px / 2.0, cx + min_size_px / 2.0
    if y1 - y0 < min_size_px:
        cy = (y0 + y1) / 2.0
        y0, y1 = cy - min_size_px / 2.0, cy + min_size_px / 2.0
    rect = PixelRect(
        x0=int(np.floor(x0)), y0=int(np.floor(y0)), x1=int(np.ceil(x1)), y1=int(np.ceil(y1))
    )
    width, height = image_size
    return rect.clamped(width, height)


def pixelate_region(
    image: np.ndarray, region: PixelRect, block_px: int = PIXELATION_BLOCK_PX
) -> np.ndarray:
    """Replace every ``block_px`` x ``block_px`` block inside ``region`` with its
    per-channel rounded mean. Blocks are anchored at the region's top-left;
    edge blocks may be smaller."""
    out = image.copy()
    for by in range(region.y0, region.y1, block_px):
        for bx in range(region.x0, region.x1, block_px):
            y_end = min(by + block_px, region.y1)
            x_end = min(bx + block_px, region.x1)
            block = out[by:y_end, bx:x_end].astype(np.uint32)
            count = block.shape[0] * block.shape[1]
            if count == 0:
                continue
            mean = (block.reshape(count, -1).sum(axis=0) + count // 2) // count
            out[by:y_end, bx:x_end] = mean.astype(np.uint8)
    return out


def _draw_landmark(draw: ImageDraw.ImageDraw, pixel: tuple[int, int], color: tuple[int, int, int]):
    x, y = pixel
    r = LANDMARK_RADIUS_PX
    draw.ellipse(
        (x - r, y - r, x + r, y + r),
        fill=color,
        outline=OUTLINE_COLOR,
        width=LANDMARK_OUTLINE_PX,
    )


def annotate_person(
    scene: SceneBundle, margin_fraction: float = DEFAULT_MARGIN_FRACTION
) -> AnnotatedScene:
    """Blur (pixelate) the face region and draw all visible landmarks.

    Left-side landmarks are light blue, right-side yellow, center white;
    facial landmarks are drawn on top of the blur like all others.
    """
    height, width = scene.environment_image.shape[:2]
    region = compute_face_region(scene.landmarks, (width, height), margin_fraction)
    blurred = pixelate_region(scene.environment_image, region)

    img = Image.fromarray(blurred)
    draw = ImageDraw.Draw(img)
    log: list[DrawnLandmark] = []
    ordered = [lm for lm in scene.landmarks.entries if not lm.facial] + [
        lm for lm in scene.landmarks.entries if lm.facial
    ]
    for lm in ordered:
        if not lm.visible:
            continue
        pixel = (int(round(lm.pixel[0])), int(round(lm.pixel[1])))
        color = SIDE_COLORS[lm.side]
        _draw_landmark(draw, pixel, color)
        log.append(DrawnLandmark(name=lm.name, pixel=pixel, color=color))

    return AnnotatedScene(
        annotated_image=np.asarray(img, dtype=np.uint8),
        face_region=region,
        draw_log=tuple(log),
    )
