# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Workspace geometry
------------------
"""
from typing import NamedTuple, Optional
import enum
import numpy as np


class StartRegion(enum.Enum):
    """Regions where episodes start"""
    #: Upper left
    UL = "UL"
    #: Upper right
    UR = "UR"


class GoalRegion(enum.Enum):
    """Regions where episodes end"""
    #: Lower left
    LL = "LL"
    #: Lower right
    LR = "LR"


class Point2D(NamedTuple):
    """Handle a point of the workspace"""
    #: Abscissa
    x: float = 0.0
    #: Ordinate
    y: float = 0.0

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return np.array([self.x, self.y], dtype=dtype or np.float32)


class Box2D(NamedTuple):
    """Defines an axis-aligned rectangle made of two describing points"""
    #: The minimum corner point (lower left) of the box
    min_corner: Point2D
    #: The maximum corner point (upper right) of the box
    max_corner: Point2D

    @classmethod
    def from_bounds(cls, x_min: float, x_max: float, y_min: float,
                    y_max: float) -> "Box2D":
        """Builds a box from ``[x_min, x_max] x [y_min, y_max]``"""
        if x_min >= x_max or y_min >= y_max:
            raise ValueError(f"invalid box bounds {(x_min, x_max)} x "
                             f"{(y_min, y_max)}")
        return cls(Point2D(x_min, y_min), Point2D(x_max, y_max))

    def bounds(self):
        """Gets ``(x_min, x_max, y_min, y_max)``"""
        return (self.min_corner.x, self.max_corner.x, self.min_corner.y,
                self.max_corner.y)

    def center(self) -> Point2D:
        """Gets the center of the box"""
        return Point2D(0.5 * (self.min_corner.x + self.max_corner.x),
                       0.5 * (self.min_corner.y + self.max_corner.y))

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Tests whether points lie inside the box (boundary included).

        Args:
            points (numpy.ndarray): A point ``(2,)`` or points ``(n, 2)``

        Return:
            numpy.ndarray: a boolean per point.
        """
        points = np.asarray(points)
        x, y = points[..., 0], points[..., 1]
        return (x >= self.min_corner.x) & (x <= self.max_corner.x) & (
            y >= self.min_corner.y) & (y <= self.max_corner.y)

    def intersects(self, other: "Box2D") -> bool:
        """Tests whether two boxes overlap"""
        return not (other.min_corner.x > self.max_corner.x
                    or other.max_corner.x < self.min_corner.x
                    or other.min_corner.y > self.max_corner.y
                    or other.max_corner.y < self.min_corner.y)

    def sample(self,
               rng: np.random.Generator,
               size: Optional[int] = None) -> np.ndarray:
        """Draws points uniformly inside the box.

        Args:
            rng (numpy.random.Generator): Random generator
            size (int, optional): Number of points. If not set, a single
                point ``(2,)`` is returned, otherwise ``(size, 2)``.
        """
        shape = (2, ) if size is None else (size, 2)
        low = np.array([self.min_corner.x, self.min_corner.y])
        high = np.array([self.max_corner.x, self.max_corner.y])
        return rng.uniform(low, high, size=shape).astype(np.float32)

    def midline(self, count: int) -> np.ndarray:
        """Gets ``count`` points evenly spaced along the horizontal midline:
        the centers of ``count`` equal segments splitting the midline.

        Return:
            numpy.ndarray: a matrix ``(count, 2)``.
        """
        if count < 1:
            raise ValueError(f"count {count} must be >= 1")
        width = (self.max_corner.x - self.min_corner.x) / count
        x = self.min_corner.x + width * (np.arange(count) + 0.5)
        return np.stack([x, np.full(count, self.center().y)],
                        axis=1).astype(np.float32)
