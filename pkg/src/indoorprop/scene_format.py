"""Line-oriented scene text format.

One record per line, ``keyword [id] key=value ...``. ``#`` starts a comment;
blank lines are ignored. Numbers use ``.`` as the decimal separator with an
optional exponent (``inf``/``-inf`` are accepted for unbounded bounds);
vectors are three numbers joined by commas with no spaces. All lengths are in
meters. Records::

    bounds min=X,Y,Z max=X,Y,Z
    material ID [er=F] [sigma=F] [thickness=F] [pec=true|false]
    rect ID origin=X,Y,Z u=X,Y,Z v=X,Y,Z material=ID
    box PREFIX min=X,Y,Z max=X,Y,Z material=ID
    tx NAME at=X,Y,Z
    rx NAME at=X,Y,Z

Materials may be referenced before they are defined. A ``box`` expands into
six rectangles named PREFIX + xmin/xmax/ymin/ymax/zmin/zmax. Without a bounds
record the scene is unbounded.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .materials import Material, MaterialError
from .scene import BOX_FACES, UNBOUNDED, Point3, Scene, SceneError, Surface, box_solid, scene_violations

KEYWORDS = ("bounds", "material", "rect", "box", "tx", "rx")

_NUMBER = re.compile(r"[+-]?(?:(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?|inf)\Z")
_IDENT = re.compile(r"[A-Za-z0-9_.:\-/]+\Z")

_SCHEMA = {
    "bounds": ({"min", "max"}, set()),
    "material": (set(), {"er", "sigma", "thickness", "pec"}),
    "rect": ({"origin", "u", "v", "material"}, set()),
    "box": ({"min", "max", "material"}, set()),
    "tx": ({"at"}, set()),
    "rx": ({"at"}, set()),
}


class SceneParseError(ValueError):
    def __init__(self, line: int, column: int, reason: str):
        super().__init__(f"line {line}, column {column}: {reason}")
        self.line = line
        self.column = column
        self.reason = reason


@dataclass(frozen=True)
class Record:
    keyword: str
    id: str
    attrs: dict
    line: int
    columns: dict  # attribute key -> 1-based column of its token


def tokenize(text: str) -> list[Record]:
    """Split a document into records, checking only lexical structure."""
    records = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0]
        tokens = [(m.group(), m.start() + 1) for m in re.finditer(r"[^ \t\r\f\v]+", line)]
        if not tokens:
            continue
        keyword, col = tokens[0]
        if keyword not in KEYWORDS:
            raise SceneParseError(lineno, col, f"unknown keyword {keyword!r}")
        rest = tokens[1:]
        ident = ""
        if keyword != "bounds":
            if not rest or "=" in rest[0][0]:
                raise SceneParseError(lineno, col, f"{keyword} record needs an id")
            ident, id_col = rest[0]
            if not _IDENT.match(ident):
                raise SceneParseError(lineno, id_col, f"invalid id {ident!r}")
            rest = rest[1:]
        attrs, columns = {}, {}
        for tok, tcol in rest:
            key, sep, value = tok.partition("=")
            if not sep or not key or not value:
                raise SceneParseError(lineno, tcol, f"expected key=value, got {tok!r}")
            if key in attrs:
                raise SceneParseError(lineno, tcol, f"duplicate attribute {key!r}")
            attrs[key] = value
            columns[key] = tcol
        required, optional = _SCHEMA[keyword]
        for key in attrs:
            if key not in required | optional:
                raise SceneParseError(lineno, columns[key], f"unknown attribute {key!r} for {keyword}")
        for key in sorted(required - set(attrs)):
            raise SceneParseError(lineno, col, f"{keyword} record is missing {key!r}")
        records.append(Record(keyword, ident, attrs, lineno, columns))
    return records


def _number(rec: Record, key: str) -> float:
    value = rec.attrs[key]
    if not _NUMBER.match(value):
        raise SceneParseError(rec.line, rec.columns[key], f"{key}: invalid number {value!r}")
    return float(value)


def _vector(rec: Record, key: str) -> Point3:
    parts = rec.attrs[key].split(",")
    if len(parts) != 3 or not all(_NUMBER.match(p) for p in parts):
        raise SceneParseError(rec.line, rec.columns[key], f"{key}: expected x,y,z, got {rec.attrs[key]!r}")
    return Point3(*(float(p) for p in parts))


def _flag(rec: Record, key: str) -> bool:
    value = rec.attrs[key]
    if value not in ("true", "false"):
        raise SceneParseError(rec.line, rec.columns[key], f"{key}: expected true or false, got {value!r}")
    return value == "true"


def parse_scene(text) -> Scene:
    """Build a validated :class:`Scene` from scene-format text or bytes.

    Every failure is raised as :class:`SceneParseError` carrying the 1-based
    line of the offending record.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as e:
            line = text[: e.start].count(b"\n") + 1
            raise SceneParseError(line, e.start - (text.rfind(b"\n", 0, e.start) + 1) + 1, "invalid UTF-8")
    records = tokenize(text)

    materials, surfaces, solids, tx, rx = {}, [], [], [], []
    bounds = UNBOUNDED
    line_of = {}
    bounds_line = None
    pending_refs = []  # (material id, record) checked once all materials are known

    def claim(kind, name, rec):
        if (kind, name) in line_of:
            raise SceneParseError(rec.line, 1, f"duplicate {kind} id {name!r}")
        line_of[(kind, name)] = rec.line

    for rec in records:
        if rec.keyword == "bounds":
            if bounds_line is not None:
                raise SceneParseError(rec.line, 1, "duplicate bounds record")
            bounds_line = rec.line
            bounds = (_vector(rec, "min"), _vector(rec, "max"))
        elif rec.keyword == "material":
            claim("material", rec.id, rec)
            kwargs = {}
            for key, field_name in (("er", "rel_permittivity"), ("sigma", "conductivity"), ("thickness", "thickness")):
                if key in rec.attrs:
                    kwargs[field_name] = _number(rec, key)
            if "pec" in rec.attrs:
                kwargs["is_pec"] = _flag(rec, "pec")
            try:
                materials[rec.id] = Material(rec.id, **kwargs)
            except MaterialError as e:
                raise SceneParseError(rec.line, 1, str(e)) from None
        elif rec.keyword == "rect":
            claim("surface", rec.id, rec)
            surf = Surface(rec.id, _vector(rec, "origin"), tuple(_vector(rec, "u")), tuple(_vector(rec, "v")), rec.attrs["material"])
            surfaces.append(surf)
            pending_refs.append((rec.attrs["material"], rec))
        elif rec.keyword == "box":
            claim("box", rec.id, rec)
            try:
                solid, faces = box_solid(rec.id, _vector(rec, "min"), _vector(rec, "max"), rec.attrs["material"])
            except SceneError as e:
                raise SceneParseError(rec.line, 1, str(e)) from None
            for face in faces:
                claim("surface", face.id, rec)
            solids.append(solid)
            surfaces.extend(faces)
            pending_refs.append((rec.attrs["material"], rec))
        else:
            claim(rec.keyword, rec.id, rec)
            (tx if rec.keyword == "tx" else rx).append((rec.id, _vector(rec, "at")))

    for material_id, rec in pending_refs:
        if material_id not in materials:
            raise SceneParseError(rec.line, rec.columns["material"], f"unresolved material {material_id!r}")

    scene = Scene(tuple(surfaces), materials, tuple(tx), tuple(rx), bounds, tuple(solids))
    for kind, name, message in scene_violations(scene):
        line = (bounds_line or 1) if kind == "bounds" else line_of.get((kind, name), 1)
        raise SceneParseError(line, 1, f"invalid scene: {message}")
    return scene


def _fmt(x: float) -> str:
    return repr(float(x))


def _vec(v) -> str:
    return ",".join(_fmt(c) for c in v)


def serialize_scene(scene: Scene) -> str:
    """Render a scene so that ``parse_scene`` reproduces it exactly.

    Faces generated by a solid are written back as the single ``box`` record.
    """
    lines = [f"bounds min={_vec(scene.bounds[0])} max={_vec(scene.bounds[1])}"]
    for m in scene.materials.values():
        lines.append(
            f"material {m.id} er={_fmt(m.rel_permittivity)} sigma={_fmt(m.conductivity)} "
            f"thickness={_fmt(m.thickness)} pec={'true' if m.is_pec else 'false'}"
        )
    by_face = {}
    for solid in scene.solids:
        for name in BOX_FACES:
            by_face[solid.id_prefix + name] = solid
    written = set()
    for s in scene.surfaces:
        solid = by_face.get(s.id)
        if solid is None:
            lines.append(
                f"rect {s.id} origin={_vec(s.origin)} u={_vec(s.edge_u)} v={_vec(s.edge_v)} material={s.material_id}"
            )
        elif solid.id_prefix not in written:
            written.add(solid.id_prefix)
            lines.append(
                f"box {solid.id_prefix} min={_vec(solid.min_corner)} max={_vec(solid.max_corner)} "
                f"material={solid.material_id}"
            )
    for name, p in scene.tx_points:
        lines.append(f"tx {name} at={_vec(p)}")
    for name, p in scene.rx_points:
        lines.append(f"rx {name} at={_vec(p)}")
    return "\n".join(lines) + "\n"
