"""Planar-rectangle scene model and the geometric queries the tracer needs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .materials import Material

# Minimum ray advance after an interaction, meters.
EPS_HIT = 1e-6
# Reflecting/blocking rectangles are widened by this much, meters.
EDGE_TOL = 1e-6


class SceneError(ValueError):
    pass


class Point3(NamedTuple):
    x: float
    y: float
    z: float


def as_point(p) -> Point3:
    x, y, z = (float(c) for c in p)
    return Point3(x, y, z)


@dataclass(frozen=True)
class Surface:
    """Rectangle spanned by two orthogonal edges from ``origin``.

    The normal ``edge_u x edge_v`` is a convention only; both sides reflect.
    """

    id: str
    origin: Point3
    edge_u: tuple[float, float, float]
    edge_v: tuple[float, float, float]
    material_id: str

    @property
    def corners(self) -> np.ndarray:
        o, u, v = np.array(self.origin), np.array(self.edge_u), np.array(self.edge_v)
        return np.array([o, o + u, o + u + v, o + v])

    @property
    def normal(self) -> np.ndarray:
        n = np.cross(self.edge_u, self.edge_v)
        return n / np.linalg.norm(n)

    @property
    def area(self) -> float:
        return float(np.linalg.norm(np.cross(self.edge_u, self.edge_v)))


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned solid, kept so point-in-solid queries stay cheap."""

    id_prefix: str
    min_corner: Point3
    max_corner: Point3
    material_id: str

    def contains(self, point, strict: bool = True) -> bool:
        p = np.asarray(point, dtype=float)
        lo, hi = np.asarray(self.min_corner), np.asarray(self.max_corner)
        if strict:
            return bool(np.all(p > lo) and np.all(p < hi))
        return bool(np.all(p >= lo) and np.all(p <= hi))


UNBOUNDED = (Point3(-math.inf, -math.inf, -math.inf), Point3(math.inf, math.inf, math.inf))


@dataclass(frozen=True)
class Scene:
    surfaces: tuple[Surface, ...] = ()
    materials: dict[str, Material] = field(default_factory=dict)
    tx_points: tuple[tuple[str, Point3], ...] = ()
    rx_points: tuple[tuple[str, Point3], ...] = ()
    bounds: tuple[Point3, Point3] = UNBOUNDED
    solids: tuple[Box, ...] = ()

    def surface(self, surface_id: str) -> Surface:
        for s in self.surfaces:
            if s.id == surface_id:
                return s
        raise KeyError(surface_id)

    def tx(self, name: str) -> Point3:
        return dict(self.tx_points)[name]

    def rx(self, name: str) -> Point3:
        return dict(self.rx_points)[name]

    @property
    def is_bounded(self) -> bool:
        return all(math.isfinite(c) for corner in self.bounds for c in corner)

    def contains(self, point) -> bool:
        """True if ``point`` is strictly inside the bounding box."""
        p = np.asarray(point, dtype=float)
        lo, hi = np.asarray(self.bounds[0]), np.asarray(self.bounds[1])
        return bool(np.all(p > lo) and np.all(p < hi))

    def inside_solid(self, point) -> bool:
        return any(b.contains(point) for b in self.solids)

    def on_surface(self, point, tol: float = 1e-6) -> bool:
        """True if ``point`` lies on some surface rectangle, edges included."""
        p = np.asarray(point, dtype=float)
        for s in self.surfaces:
            o, u, v = np.array(s.origin), np.array(s.edge_u), np.array(s.edge_v)
            d = p - o
            if abs(np.dot(d, s.normal)) > tol:
                continue
            lu, lv = np.linalg.norm(u), np.linalg.norm(v)
            a, b = np.dot(d, u) / lu, np.dot(d, v) / lv
            if -tol <= a <= lu + tol and -tol <= b <= lv + tol:
                return True
        return False

    def swap_materials(self, mapping: dict[str, str]) -> "Scene":
        """Copy of the scene with surfaces and solids rebound per ``mapping``."""
        missing = sorted(set(mapping.values()) - set(self.materials))
        if missing:
            raise SceneError(f"swap targets not defined: {', '.join(missing)}")
        surfaces = tuple(
            replace(s, material_id=mapping.get(s.material_id, s.material_id)) for s in self.surfaces
        )
        solids = tuple(
            replace(b, material_id=mapping.get(b.material_id, b.material_id)) for b in self.solids
        )
        return replace(self, surfaces=surfaces, solids=solids)


def validate_scene(scene: Scene) -> list[str]:
    """Return one human-readable description per violated scene invariant."""
    return [message for _, _, message in scene_violations(scene)]


def scene_violations(scene: Scene):
    """Yield ``(kind, name, message)`` for every violated invariant, where
    ``kind`` is one of surface, material, bounds, tx, rx, box."""
    seen = set()
    for s in scene.surfaces:
        if s.id in seen:
            yield "surface", s.id, f"surface {s.id!r}: duplicate id"
        seen.add(s.id)
        if s.material_id not in scene.materials:
            yield "surface", s.id, f"surface {s.id!r}: material {s.material_id!r} is not defined"
        vals = np.array([*s.origin, *s.edge_u, *s.edge_v], dtype=float)
        if not np.isfinite(vals).all():
            yield "surface", s.id, f"surface {s.id!r}: non-finite coordinate"
            continue
        nu, nv = np.linalg.norm(s.edge_u), np.linalg.norm(s.edge_v)
        if nu == 0 or nv == 0:
            yield "surface", s.id, f"surface {s.id!r}: zero-length edge"
        elif abs(np.dot(s.edge_u, s.edge_v)) > 1e-9 * nu * nv:
            yield "surface", s.id, f"surface {s.id!r}: edges are not orthogonal"
    for key, m in scene.materials.items():
        if key != m.id:
            yield "material", key, f"material {key!r}: keyed under a different id {m.id!r}"
    lo, hi = scene.bounds
    if not all(a < b for a, b in zip(lo, hi)):
        yield "bounds", "", "bounds: min corner must be below max corner on every axis"
    for kind, points in (("tx", scene.tx_points), ("rx", scene.rx_points)):
        names = set()
        for name, p in points:
            if name in names:
                yield kind, name, f"{kind} {name!r}: duplicate name"
            names.add(name)
            if not all(math.isfinite(c) for c in p):
                yield kind, name, f"{kind} {name!r}: non-finite coordinate"
            elif not scene.contains(p):
                yield kind, name, f"{kind} {name!r}: not strictly inside bounds"
    for b in scene.solids:
        if b.material_id not in scene.materials:
            yield "box", b.id_prefix, f"box {b.id_prefix!r}: material {b.material_id!r} is not defined"


BOX_FACES = ("xmin", "xmax", "ymin", "ymax", "zmin", "zmax")


def make_box(id_prefix: str, min_corner, max_corner, material_id: str) -> list[Surface]:
    """Six outward-facing rectangles enclosing an axis-aligned box.

    Face ids are ``id_prefix`` followed by one of ``BOX_FACES``.
    """
    x0, y0, z0 = as_point(min_corner)
    x1, y1, z1 = as_point(max_corner)
    dx, dy, dz = x1 - x0, y1 - y0, z1 - z0
    if not (dx > 0 and dy > 0 and dz > 0):
        raise SceneError(f"box {id_prefix!r}: degenerate extent {(dx, dy, dz)}")
    X, Y, Z = (dx, 0.0, 0.0), (0.0, dy, 0.0), (0.0, 0.0, dz)
    # (origin, u, v) with u x v pointing out of the box
    faces = {
        "xmin": ((x0, y0, z0), Z, Y),
        "xmax": ((x1, y0, z0), Y, Z),
        "ymin": ((x0, y0, z0), X, Z),
        "ymax": ((x0, y1, z0), Z, X),
        "zmin": ((x0, y0, z0), Y, X),
        "zmax": ((x0, y0, z1), X, Y),
    }
    return [
        Surface(id_prefix + name, Point3(*faces[name][0]), faces[name][1], faces[name][2], material_id)
        for name in BOX_FACES
    ]


def box_solid(id_prefix: str, min_corner, max_corner, material_id: str) -> tuple[Box, list[Surface]]:
    surfaces = make_box(id_prefix, min_corner, max_corner, material_id)
    return Box(id_prefix, as_point(min_corner), as_point(max_corner), material_id), surfaces


def ray_surface_intersect(origin, direction, surface: Surface):
    """First hit of a ray with a rectangle as ``(t, Point3)``, or ``None``.

    ``direction`` must be a unit vector. Hits closer than ``EPS_HIT`` are
    ignored so a ray leaving a surface does not re-hit it.
    """
    o = np.asarray(origin, dtype=float)
    d = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(d) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    n = surface.normal
    denom = float(np.dot(d, n))
    if abs(denom) < 1e-12:
        return None
    s0 = np.asarray(surface.origin, dtype=float)
    t = float(np.dot(s0 - o, n)) / denom
    if t <= EPS_HIT:
        return None
    hit = o + t * d
    u, v = np.asarray(surface.edge_u), np.asarray(surface.edge_v)
    rel = hit - s0
    a = np.dot(rel, u) / np.dot(u, u)
    b = np.dot(rel, v) / np.dot(v, v)
    tol = 1e-12
    if -tol <= a <= 1 + tol and -tol <= b <= 1 + tol:
        return t, as_point(hit)
    return None


@dataclass(frozen=True)
class SurfaceArrays:
    """Column-oriented copy of a scene's surfaces for vectorized queries."""

    ids: tuple[str, ...]
    origin: np.ndarray
    u: np.ndarray
    v: np.ndarray
    uu: np.ndarray
    vv: np.ndarray
    normal: np.ndarray
    offset: np.ndarray
    material_index: np.ndarray
    materials: tuple[Material, ...]

    @classmethod
    def from_scene(cls, scene: Scene) -> "SurfaceArrays":
        mats = sorted(scene.materials)
        index = {m: i for i, m in enumerate(mats)}
        if scene.surfaces:
            origin = np.array([s.origin for s in scene.surfaces], dtype=float)
            u = np.array([s.edge_u for s in scene.surfaces], dtype=float)
            v = np.array([s.edge_v for s in scene.surfaces], dtype=float)
        else:
            origin = u = v = np.zeros((0, 3))
        normal = np.cross(u, v)
        if len(normal):
            normal /= np.linalg.norm(normal, axis=1)[:, None]
        return cls(
            ids=tuple(s.id for s in scene.surfaces),
            origin=origin,
            u=u,
            v=v,
            uu=np.einsum("ij,ij->i", u, u),
            vv=np.einsum("ij,ij->i", v, v),
            normal=normal,
            offset=np.einsum("ij,ij->i", normal, origin),
            material_index=np.array([index[s.material_id] for s in scene.surfaces], dtype=int),
            materials=tuple(scene.materials[m] for m in mats),
        )

    def __len__(self):
        return len(self.ids)

    def local_coords(self, points: np.ndarray, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        rel = points - self.origin[idx]
        a = np.einsum("...j,...j->...", rel, self.u[idx]) / self.uu[idx]
        b = np.einsum("...j,...j->...", rel, self.v[idx]) / self.vv[idx]
        return a, b
