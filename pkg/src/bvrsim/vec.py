"""3-D vector and angle helpers used throughout the simulation.

Frame convention: x = north, y = east, z = altitude (up-positive).
Headings are measured from +x toward +y (compass sense) in [-pi, pi).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


def wrap_pi(angle: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    return (angle + math.pi) % TWO_PI - math.pi


def clamp(value: float, lo: float, hi: float) -> float:
    return lo if value < lo else hi if value > hi else value


@dataclass(slots=True)
class Vec3:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scale(self, k: float) -> "Vec3":
        return Vec3(self.x * k, self.y * k, self.z * k)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def horizontal_norm(self) -> float:
        return math.hypot(self.x, self.y)

    def unit(self) -> "Vec3":
        n = self.norm()
        if n == 0.0:
            return Vec3(1.0, 0.0, 0.0)
        return Vec3(self.x / n, self.y / n, self.z / n)

    def copy(self) -> "Vec3":
        return Vec3(self.x, self.y, self.z)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.z]


def bearing_to(a: Vec3, b: Vec3) -> float:
    """Horizontal bearing from a to b, compass sense, in [-pi, pi)."""
    return math.atan2(b.y - a.y, b.x - a.x)


def distance(a: Vec3, b: Vec3) -> float:
    return math.sqrt((a.x - b.x) ** 2 + (a.y - b.y) ** 2 + (a.z - b.z) ** 2)


def horizontal_distance(a: Vec3, b: Vec3) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def velocity_vector(speed: float, heading: float, pitch: float) -> Vec3:
    """Velocity in the world frame from scalar speed, heading (yaw) and pitch."""
    cp = math.cos(pitch)
    return Vec3(speed * cp * math.cos(heading), speed * cp * math.sin(heading), speed * math.sin(pitch))


def angle_between(a: Vec3, b: Vec3) -> float:
    """Angle between two vectors in [0, pi]; zero vectors give 0."""
    na, nb = a.norm(), b.norm()
    if na == 0.0 or nb == 0.0:
        return 0.0
    c = clamp(a.dot(b) / (na * nb), -1.0, 1.0)
    return math.acos(c)
