"""Occupancy world model backing the simulator's force and visibility queries."""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from scipy import ndimage

from ..scene_graph import MapMeta


class ImageError(Exception):
    pass


class WorldModel:
    """Static obstacles from the occupancy image plus a precomputed
    distance-to-nearest-obstacle field (meters) for wall-force queries."""

    def __init__(self, meta: MapMeta, occupancy: np.ndarray):
        if occupancy.shape != (meta.image_height, meta.image_width):
            raise ImageError(
                f"occupancy shape {occupancy.shape} does not match meta "
                f"{meta.image_height}x{meta.image_width}"
            )
        self.meta = meta
        self.occupancy = occupancy.astype(bool)
        self.obstacle_count = int(self.occupancy.sum())
        if self.obstacle_count:
            dist_px = ndimage.distance_transform_edt(~self.occupancy)
            self.distance = dist_px * meta.resolution
            grad_row, grad_col = np.gradient(self.distance)
            # Image rows grow downward, world y grows upward.
            self._normal_x = grad_col
            self._normal_y = -grad_row
        else:
            self.distance = np.full(self.occupancy.shape, np.inf)
            self._normal_x = np.zeros(self.occupancy.shape)
            self._normal_y = np.zeros(self.occupancy.shape)

    @staticmethod
    def load(meta: MapMeta, base_dir: str | Path | None = None) -> "WorldModel":
        from PIL import Image

        path = Path(meta.image_path)
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        try:
            img = Image.open(path).convert("L")
        except Exception as exc:  # noqa: BLE001
            raise ImageError(f"cannot read map image {path}: {exc}") from exc
        arr = np.asarray(img)
        if arr.shape != (meta.image_height, meta.image_width):
            raise ImageError(
                f"map image {path} is {arr.shape[1]}x{arr.shape[0]}, meta says "
                f"{meta.image_width}x{meta.image_height}"
            )
        return WorldModel(meta, arr <= meta.occupied_threshold)

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        col = int(math.floor((x - self.meta.origin[0]) / self.meta.resolution))
        row = self.meta.image_height - 1 - int(
            math.floor((y - self.meta.origin[1]) / self.meta.resolution)
        )
        row = min(max(row, 0), self.meta.image_height - 1)
        col = min(max(col, 0), self.meta.image_width - 1)
        return row, col

    def distance_to_obstacle(self, x: float, y: float) -> float:
        row, col = self.cell_of(x, y)
        return float(self.distance[row, col])

    def wall_normal(self, x: float, y: float) -> tuple[float, float]:
        """Unit vector pointing away from the nearest obstacle; (0,0) in the open."""
        row, col = self.cell_of(x, y)
        nx = float(self._normal_x[row, col])
        ny = float(self._normal_y[row, col])
        norm = math.hypot(nx, ny)
        if norm < 1e-9:
            return (0.0, 0.0)
        return (nx / norm, ny / norm)

    def is_occupied(self, x: float, y: float) -> bool:
        row, col = self.cell_of(x, y)
        return bool(self.occupancy[row, col])

    def line_of_sight(self, a: tuple[float, float], b: tuple[float, float]) -> bool:
        """Grid raycast between two world points (Bresenham over cells)."""
        if not self.obstacle_count:
            return True
        r0, c0 = self.cell_of(a[0], a[1])
        r1, c1 = self.cell_of(b[0], b[1])
        dr = abs(r1 - r0)
        dc = abs(c1 - c0)
        sr = 1 if r1 >= r0 else -1
        sc = 1 if c1 >= c0 else -1
        err = dc - dr
        r, c = r0, c0
        while True:
            if self.occupancy[r, c]:
                return False
            if r == r1 and c == c1:
                return True
            e2 = 2 * err
            if e2 > -dr:
                err -= dr
                c += sc
            if e2 < dc:
                err += dc
                r += sr


def load_world(meta: MapMeta, base_dir: str | Path | None = None) -> WorldModel:
    return WorldModel.load(meta, base_dir)
