"""Bundled example site: first floor of an ECE department building.

Axes: x runs west to east along the corridor, y south to north, z up; the
origin is the south-west floor corner. Published dimensions:

* floor 34.8 m x 14.37 m, floor-to-ceiling 3.44 m;
* five labs on the north side, 7.37 m deep (west to east: computer 6.76 m,
  communication 7.3 m, RS 5.45 m, microwave and antenna 8.17 m, EC 21
  classroom 6.64 m);
* eight faculty rooms on the south side, 3.43 m wide and 4.1 m deep.

Everything else is reconstructed and may be changed here: the corridor
takes the remaining 2.9 m between the two bands; the 7.36 m of south frontage
not used by faculty rooms is the stair landing at the west end (open, stairs
not modeled); the 0.48 m left over east of EC 21 is an open alcove. Walls are
zero-thickness brick rectangles, doors are full-height gaps centered on each
room's corridor wall, and the EC 21 desks are thin wooden slabs.
"""

from __future__ import annotations

from dataclasses import replace

from .materials import DEFAULT_MATERIALS
from .scene import Point3, Scene, Surface, box_solid

FLOOR_LENGTH = 34.8
FLOOR_WIDTH = 14.37
CEILING_HEIGHT = 3.44

LAB_DEPTH = 7.37
LABS = (
    ("computer", 6.76),
    ("communication", 7.3),
    ("rs", 5.45),
    ("microwave", 8.17),
    ("ec21", 6.64),
)
FACULTY_WIDTH = 3.43
FACULTY_DEPTH = 4.1
N_FACULTY = 8

CORRIDOR_SOUTH = FACULTY_DEPTH
CORRIDOR_NORTH = round(FLOOR_WIDTH - LAB_DEPTH, 9)
CORRIDOR_Y = round(0.5 * (CORRIDOR_SOUTH + CORRIDOR_NORTH), 9)
FACULTY_WEST = round(FLOOR_LENGTH - N_FACULTY * FACULTY_WIDTH, 9)

DOOR_WIDTH = 0.9
ANTENNA_HEIGHT = 2.0

# EC 21 desk slabs in room-local coordinates (x from the room's west wall,
# y from its corridor wall): (x0, y0, x1, y1)
DESK_TOP = (0.72, 0.76)
EC21_DESKS = (
    (0.9, 2.0, 2.9, 2.6),
    (3.6, 2.0, 5.6, 2.6),
    (0.9, 3.6, 2.9, 4.2),
    (3.6, 3.6, 5.6, 4.2),
    (0.9, 5.2, 2.9, 5.8),
    (3.6, 5.2, 5.6, 5.8),
)

# x coordinates of lab walls, west to east
LAB_EDGES = tuple(round(sum(w for _, w in LABS[:k]), 9) for k in range(len(LABS) + 1))
FACULTY_EDGES = tuple(round(FACULTY_WEST + k * FACULTY_WIDTH, 9) for k in range(N_FACULTY + 1))


def _wall_x(sid, y, x0, x1, material="brick"):
    """Vertical wall in the plane y = const, spanning x0..x1."""
    return Surface(sid, Point3(x0, y, 0.0), (x1 - x0, 0.0, 0.0), (0.0, 0.0, CEILING_HEIGHT), material)


def _wall_y(sid, x, y0, y1, material="brick"):
    """Vertical wall in the plane x = const, spanning y0..y1."""
    return Surface(sid, Point3(x, y0, 0.0), (0.0, 0.0, CEILING_HEIGHT), (0.0, y1 - y0, 0.0), material)


def _with_doors(prefix, y, x0, x1, door_centers, door_width):
    pieces, start = [], x0
    for c in door_centers:
        pieces.append((start, c - door_width / 2))
        start = c + door_width / 2
    pieces.append((start, x1))
    return [
        _wall_x(f"{prefix}{k}", y, round(a, 9), round(b, 9)) for k, (a, b) in enumerate(pieces) if b - a > 1e-9
    ]


def _desks(prefix, x_off, y_off, material):
    solids, surfaces = [], []
    z0, z1 = DESK_TOP
    for k, (a0, b0, a1, b1) in enumerate(EC21_DESKS):
        box, faces = box_solid(
            f"{prefix}{k + 1}.",
            (round(x_off + a0, 9), round(y_off + b0, 9), z0),
            (round(x_off + a1, 9), round(y_off + b1, 9), z1),
            material,
        )
        solids.append(box)
        surfaces.extend(faces)
    return solids, surfaces


def _shell(length, width, prefix=""):
    return [
        _wall_x(f"{prefix}wall_south", 0.0, 0.0, length),
        _wall_x(f"{prefix}wall_north", width, 0.0, length),
        _wall_y(f"{prefix}wall_west", 0.0, 0.0, width),
        _wall_y(f"{prefix}wall_east", length, 0.0, width),
        Surface(f"{prefix}floor", Point3(0.0, 0.0, 0.0), (0.0, width, 0.0), (length, 0.0, 0.0), "concrete"),
        Surface(
            f"{prefix}ceiling", Point3(0.0, 0.0, CEILING_HEIGHT), (length, 0.0, 0.0), (0.0, width, 0.0), "concrete"
        ),
    ]


def lab_center(name: str, z: float = ANTENNA_HEIGHT) -> Point3:
    k = [n for n, _ in LABS].index(name)
    return Point3(
        round((LAB_EDGES[k] + LAB_EDGES[k + 1]) / 2, 9), round(CORRIDOR_NORTH + LAB_DEPTH / 2, 9), z
    )


def faculty_center(k: int, z: float = ANTENNA_HEIGHT) -> Point3:
    return Point3(round((FACULTY_EDGES[k] + FACULTY_EDGES[k + 1]) / 2, 9), FACULTY_DEPTH / 2, z)


# Transmitter at the eastern end of the corridor.
TX_EAST = Point3(34.3, CORRIDOR_Y, ANTENNA_HEIGHT)
# Corridor link used for the time-of-arrival check, 33.44 m end to end.
TX_TOA = Point3(34.12, CORRIDOR_Y, ANTENNA_HEIGHT)
RX_TOA = Point3(0.68, CORRIDOR_Y, ANTENNA_HEIGHT)


def receivers() -> list[tuple[str, Point3]]:
    """Sixteen representative receiver positions, one per room plus corridor
    and landing. Not survey data: the original positions are unpublished."""
    pts = [
        ("rx1", Point3(17.4, CORRIDOR_Y, ANTENNA_HEIGHT)),
        ("rx2", lab_center("computer")),
        ("rx3", lab_center("communication")),
        ("rx4", lab_center("rs")),
        ("rx5", lab_center("microwave")),
        ("rx6", lab_center("ec21")),
    ]
    pts += [(f"rx{7 + k}", faculty_center(k)) for k in range(N_FACULTY)]
    pts += [
        ("rx15", Point3(round(FACULTY_WEST / 2, 9), FACULTY_DEPTH / 2, ANTENNA_HEIGHT)),
        ("rx16", Point3(3.0, CORRIDOR_Y, ANTENNA_HEIGHT)),
    ]
    return pts


def make_ece_floor(door_width: float = DOOR_WIDTH, furniture_material: str = "wood") -> Scene:
    surfaces = _shell(FLOOR_LENGTH, FLOOR_WIDTH)
    faculty_doors = [(FACULTY_EDGES[k] + FACULTY_EDGES[k + 1]) / 2 for k in range(N_FACULTY)]
    surfaces += _with_doors("corridor_s", CORRIDOR_SOUTH, FACULTY_WEST, FLOOR_LENGTH, faculty_doors, door_width)
    lab_doors = [(LAB_EDGES[k] + LAB_EDGES[k + 1]) / 2 for k in range(len(LABS))]
    surfaces += _with_doors("corridor_n", CORRIDOR_NORTH, 0.0, LAB_EDGES[-1], lab_doors, door_width)
    surfaces += [
        _wall_y(f"faculty_wall{k}", FACULTY_EDGES[k], 0.0, FACULTY_DEPTH) for k in range(N_FACULTY)
    ]
    surfaces += [
        _wall_y(f"lab_wall{k}", LAB_EDGES[k], CORRIDOR_NORTH, FLOOR_WIDTH) for k in range(1, len(LABS) + 1)
    ]
    solids, desk_faces = _desks("ec21_desk", LAB_EDGES[-2], CORRIDOR_NORTH, furniture_material)
    surfaces += desk_faces
    return Scene(
        surfaces=tuple(surfaces),
        materials=dict(DEFAULT_MATERIALS),
        tx_points=(("tx_east", TX_EAST), ("tx_toa", TX_TOA)),
        rx_points=tuple(receivers()) + (("rx_toa", RX_TOA),),
        bounds=(Point3(0.0, 0.0, 0.0), Point3(FLOOR_LENGTH, FLOOR_WIDTH, CEILING_HEIGHT)),
        solids=tuple(solids),
    )


def make_ec21_classroom(furniture_material: str = "wood") -> Scene:
    """EC 21 on its own: a closed 6.64 m x 7.37 m room with six desks.

    Tx and rx sit above the western desk column so that specular bounces off
    the desk tops reach the receiver.
    """
    length, width = dict(LABS)["ec21"], LAB_DEPTH
    surfaces = _shell(length, width)
    solids, desk_faces = _desks("desk", 0.0, 0.0, furniture_material)
    surfaces += desk_faces
    return Scene(
        surfaces=tuple(surfaces),
        materials=dict(DEFAULT_MATERIALS),
        tx_points=(("tx", Point3(1.9, 0.8, ANTENNA_HEIGHT)),),
        rx_points=(("rx", Point3(1.9, 6.9, 1.2)),),
        bounds=(Point3(0.0, 0.0, 0.0), Point3(length, width, CEILING_HEIGHT)),
        solids=tuple(solids),
    )


def with_furniture_material(scene: Scene, material_id: str) -> Scene:
    """Rebind every solid (and its faces) to ``material_id``."""
    prefixes = tuple(b.id_prefix for b in scene.solids)
    surfaces = tuple(
        replace(s, material_id=material_id) if s.id.startswith(prefixes) and prefixes else s
        for s in scene.surfaces
    )
    solids = tuple(replace(b, material_id=material_id) for b in scene.solids)
    return replace(scene, surfaces=surfaces, solids=solids)
