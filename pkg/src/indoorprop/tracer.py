"""Image-method ray tracer with thin-wall transmission.

Reflection paths are found by mirroring the transmitter across sequences of
surfaces (the image tree) and back-tracing from each receiver. Every straight
segment of an accepted path is then tested against all surfaces; each crossing
adds a transmission interaction. The heavy lifting is vectorized over
receivers and image nodes so a full-floor sweep stays a few numpy passes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from . import materials as mat
from .materials import SPEED_OF_LIGHT
from .scene import EDGE_TOL, EPS_HIT, Point3, Scene, SurfaceArrays, as_point

# A point closer than this to a plane is treated as lying on it.
PLANE_EPS = 1e-9
# Slack on reflection-point bounds checks, in rectangle-local units.
_REFLECT_TOL = 1e-12
# Rough cap on receiver x image-node elements per back-trace chunk.
_CHUNK = 400_000

LAUNCH, REFLECTION, TRANSMISSION, ARRIVAL = "launch", "reflection", "transmission", "arrival"


class TraceError(ValueError):
    pass


@dataclass(frozen=True)
class TraceConfig:
    max_reflection_order: int = 3
    max_paths: int = 25
    frequency: float = 1e9
    min_path_gain_db: float = -250.0

    def __post_init__(self):
        if int(self.max_reflection_order) != self.max_reflection_order or self.max_reflection_order < 0:
            raise ValueError("max_reflection_order must be a non-negative integer")
        if int(self.max_paths) != self.max_paths or self.max_paths < 1:
            raise ValueError("max_paths must be a positive integer")
        if not self.frequency > 0:
            raise ValueError("frequency must be positive")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency


@dataclass(frozen=True)
class Interaction:
    kind: str
    point: Point3
    surface_id: Optional[str] = None
    cos_incidence: Optional[float] = None

    def summary(self) -> str:
        if self.kind == LAUNCH:
            return "L"
        if self.kind == ARRIVAL:
            return "A"
        return ("R:" if self.kind == REFLECTION else "T:") + self.surface_id


@dataclass(frozen=True)
class PropagationPath:
    interactions: tuple[Interaction, ...]
    length: float
    gain: complex

    @property
    def delay(self) -> float:
        return self.length / SPEED_OF_LIGHT

    @property
    def power(self) -> float:
        return abs(self.gain) ** 2

    @property
    def gain_db(self) -> float:
        p = self.power
        return 10.0 * math.log10(p) if p > 0 else -math.inf

    @property
    def n_reflections(self) -> int:
        return sum(i.kind == REFLECTION for i in self.interactions)

    @property
    def n_transmissions(self) -> int:
        return sum(i.kind == TRANSMISSION for i in self.interactions)

    @property
    def reflection_sequence(self) -> tuple[str, ...]:
        return tuple(i.surface_id for i in self.interactions if i.kind == REFLECTION)

    @property
    def surface_sequence(self) -> tuple[str, ...]:
        return tuple(i.surface_id for i in self.interactions if i.surface_id is not None)

    @property
    def summary(self) -> str:
        return ";".join(i.summary() for i in self.interactions)

    def sort_key(self):
        return (-self.power, self.length, self.surface_sequence)


def free_space_factor(length, frequency: float):
    """Friis amplitude ``lambda/(4 pi d)`` times the propagation phasor."""
    length = np.asarray(length, dtype=float)
    wavelength = SPEED_OF_LIGHT / frequency
    out = wavelength / (4.0 * np.pi * length) * np.exp(-2j * np.pi * frequency * length / SPEED_OF_LIGHT)
    return out if out.ndim else complex(out)


def path_gain(interactions, length: float, frequency: float, materials: dict) -> complex:
    """Complex end-to-end gain of one path between isotropic unit-gain antennas.

    ``materials`` maps surface id to its :class:`Material`.
    """
    if not length > 0:
        raise TraceError("path length must be positive")
    g = free_space_factor(length, frequency)
    for it in interactions:
        if it.kind == REFLECTION:
            g *= mat.fresnel_reflection(materials[it.surface_id], it.cos_incidence, frequency)
        elif it.kind == TRANSMISSION:
            g *= mat.slab_transmission(materials[it.surface_id], it.cos_incidence, frequency)
    return complex(g)


# --------------------------------------------------------------------------
# image tree


@dataclass
class _Level:
    surf: np.ndarray  # surface index mirrored across at this depth
    parent: np.ndarray  # row in the previous level (0 for depth 1)
    point: np.ndarray  # image position
    anc_surf: np.ndarray = None  # (n, depth) surface sequence from the source
    anc_point: np.ndarray = None  # (n, depth, 3) image chain from the source


def _build_levels(arr: SurfaceArrays, source: np.ndarray, max_order: int) -> list[_Level]:
    n_surf = len(arr)
    levels: list[_Level] = []
    if n_surf == 0 or max_order == 0:
        return levels
    corners = np.stack(
        [arr.origin, arr.origin + arr.u, arr.origin + arr.u + arr.v, arr.origin + arr.v], axis=1
    )
    # side[s, t, c]: signed distance of corner c of surface t from the plane of s
    side = np.einsum("sj,tcj->stc", arr.normal, corners) - arr.offset[:, None, None]

    dist = arr.normal @ source - arr.offset
    first = np.flatnonzero(np.abs(dist) > PLANE_EPS)
    pts = source[None, :] - 2.0 * dist[first, None] * arr.normal[first]
    lvl = _Level(first, np.zeros(len(first), dtype=int), pts)
    lvl.anc_surf = first[:, None]
    lvl.anc_point = pts[:, None, :]
    levels.append(lvl)

    surf_index = np.arange(n_surf)
    for _ in range(1, max_order):
        prev = levels[-1]
        if len(prev.surf) == 0:
            break
        own = np.einsum("ij,ij->i", arr.normal[prev.surf], prev.point) - arr.offset[prev.surf]
        # the next surface needs some part on the real (non-image) side of this one
        reachable = np.any(side[prev.surf] * np.sign(own)[:, None, None] < -PLANE_EPS, axis=2)
        to_next = prev.point @ arr.normal.T - arr.offset[None, :]
        mask = reachable & (surf_index[None, :] != prev.surf[:, None]) & (np.abs(to_next) > PLANE_EPS)
        rows, cols = np.nonzero(mask)
        pts = prev.point[rows] - 2.0 * to_next[rows, cols][:, None] * arr.normal[cols]
        lvl = _Level(cols, rows, pts)
        lvl.anc_surf = np.concatenate([prev.anc_surf[rows], cols[:, None]], axis=1)
        lvl.anc_point = np.concatenate([prev.anc_point[rows], pts[:, None, :]], axis=1)
        levels.append(lvl)
    return levels


@dataclass
class ImageNode:
    """One node of the image tree: ``point`` is the source mirrored across
    ``sequence`` in order; ``images`` holds the intermediate images."""

    point: Point3
    sequence: tuple[str, ...]
    images: tuple[Point3, ...]
    source: Point3
    children: list["ImageNode"] = field(default_factory=list)

    @property
    def order(self) -> int:
        return len(self.sequence)

    def walk(self) -> Iterator["ImageNode"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def count(self) -> int:
        return sum(1 for _ in self.walk())


def enumerate_images(scene: Scene, tx, max_order: int) -> ImageNode:
    """Tree of transmitter images up to ``max_order`` reflections.

    Immediate repeats of the same surface are pruned, as are mirrorings whose
    next surface lies entirely behind the previous reflector.
    """
    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    source = as_point(tx)
    arr = SurfaceArrays.from_scene(scene)
    levels = _build_levels(arr, np.asarray(source, dtype=float), max_order)
    root = ImageNode(source, (), (), source)
    parents = [root]
    for lvl in levels:
        nodes = []
        for k in range(len(lvl.surf)):
            parent = parents[lvl.parent[k]]
            point = as_point(lvl.point[k])
            node = ImageNode(
                point, parent.sequence + (arr.ids[lvl.surf[k]],), parent.images + (point,), source
            )
            parent.children.append(node)
            nodes.append(node)
        parents = nodes
    return root


def validate_image_path(node: ImageNode, rx, scene: Scene) -> Optional[list[Interaction]]:
    """Back-trace ``rx`` through the images of ``node``.

    Returns the launch/reflection/arrival skeleton with exact reflection
    points, or ``None`` if any reflection point misses its rectangle or any
    segment arrives from the wrong side. Blocking is not checked here.
    """
    rx_p = np.asarray(rx, dtype=float)
    point = rx_p
    hits = []
    for depth in range(node.order - 1, -1, -1):
        surf = scene.surface(node.sequence[depth])
        image = np.asarray(node.images[depth], dtype=float)
        n = surf.normal
        off = float(np.dot(n, surf.origin))
        s_p = float(np.dot(n, point)) - off
        s_i = float(np.dot(n, image)) - off
        if not (s_p * s_i < 0 and abs(s_p) > PLANE_EPS):
            return None
        q = point + s_p / (s_p - s_i) * (image - point)
        rel = q - np.asarray(surf.origin)
        a = np.dot(rel, surf.edge_u) / np.dot(surf.edge_u, surf.edge_u)
        b = np.dot(rel, surf.edge_v) / np.dot(surf.edge_v, surf.edge_v)
        if not (-_REFLECT_TOL <= a <= 1 + _REFLECT_TOL and -_REFLECT_TOL <= b <= 1 + _REFLECT_TOL):
            return None
        hits.append((q, surf))
        point = q
    hits.reverse()
    chain = [np.asarray(node.source, dtype=float)] + [q for q, _ in hits] + [rx_p]
    if any(np.linalg.norm(b - a) <= EPS_HIT for a, b in zip(chain, chain[1:])):
        return None
    out = [Interaction(LAUNCH, as_point(chain[0]))]
    for k, (q, surf) in enumerate(hits):
        incoming = chain[k + 1] - chain[k]
        cos_i = abs(float(np.dot(incoming, surf.normal))) / float(np.linalg.norm(incoming))
        out.append(Interaction(REFLECTION, as_point(q), surf.id, cos_i))
    out.append(Interaction(ARRIVAL, as_point(rx_p)))
    return out


# --------------------------------------------------------------------------
# batched engine


@dataclass
class _Group:
    """Paths with the same reflection count, stored column-wise."""

    rx: np.ndarray  # (V,) receiver row
    chain: np.ndarray  # (V, k+2, 3) launch, reflection points, arrival
    surf: np.ndarray  # (V, k) reflection surface indices
    cos: np.ndarray  # (V, k) reflection incidence cosines


@dataclass
class PathBatch:
    """Every geometrically valid path for a batch of receivers, unsorted.

    Path ``p`` lives in the group whose offset range covers it; transmission
    hits are kept flat and sorted by path.
    """

    groups: list
    offsets: np.ndarray
    rx: np.ndarray
    length: np.ndarray
    gain: np.ndarray
    hit_path: np.ndarray
    hit_seg: np.ndarray
    hit_t: np.ndarray
    hit_surf: np.ndarray
    hit_cos: np.ndarray
    hit_point: np.ndarray
    ids: tuple[str, ...]

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.gain) ** 2

    def keep_mask(self, config: TraceConfig) -> np.ndarray:
        with np.errstate(divide="ignore"):
            gain_db = 10.0 * np.log10(self.power)
        return gain_db >= config.min_path_gain_db

    def build_path(self, p: int) -> PropagationPath:
        g = int(np.searchsorted(self.offsets, p, side="right")) - 1
        grp, row = self.groups[g], p - self.offsets[g]
        pts, surf, cos = grp.chain[row], grp.surf[row], grp.cos[row]
        lo, hi = np.searchsorted(self.hit_path, [p, p + 1])
        hits = sorted(
            zip(self.hit_seg[lo:hi], self.hit_t[lo:hi], self.hit_surf[lo:hi], self.hit_cos[lo:hi], self.hit_point[lo:hi]),
            key=lambda h: (h[0], h[1], self.ids[h[2]]),
        )
        inter = [Interaction(LAUNCH, as_point(pts[0]))]
        k = 0
        for seg in range(len(surf) + 1):
            while k < len(hits) and hits[k][0] == seg:
                _, _, s, c, x = hits[k]
                inter.append(Interaction(TRANSMISSION, as_point(x), self.ids[s], float(c)))
                k += 1
            if seg < len(surf):
                inter.append(Interaction(REFLECTION, as_point(pts[seg + 1]), self.ids[surf[seg]], float(cos[seg])))
        inter.append(Interaction(ARRIVAL, as_point(pts[-1])))
        return PropagationPath(tuple(inter), float(self.length[p]), complex(self.gain[p]))

    def paths_for(self, row: int, config: TraceConfig) -> list[PropagationPath]:
        sel = np.flatnonzero((self.rx == row) & self.keep_mask(config))
        paths = sorted((self.build_path(int(p)) for p in sel), key=PropagationPath.sort_key)
        return paths[: config.max_paths]

    def total_power(self, n_rx: int, config: TraceConfig) -> np.ndarray:
        """Sum of |gain|^2 over the strongest ``max_paths`` kept paths per receiver."""
        keep = np.flatnonzero(self.keep_mask(config))
        pw = self.power[keep]
        rx = self.rx[keep]
        order = np.lexsort((-pw, rx))
        rx_sorted = rx[order]
        starts = np.searchsorted(rx_sorted, rx_sorted, side="left")
        rank = np.arange(len(order)) - starts
        top = order[rank < config.max_paths]
        return np.bincount(rx[top], weights=pw[top], minlength=n_rx)


class ImageEngine:
    """Image tree for one transmitter, reusable across any number of receivers.

    Holds no mutable state after construction, so one engine may serve
    concurrent evaluations.
    """

    def __init__(self, scene: Scene, tx, config: TraceConfig):
        self.scene = scene
        self.config = config
        self.tx = np.asarray(as_point(tx), dtype=float)
        self.arr = SurfaceArrays.from_scene(scene)
        self.levels = _build_levels(self.arr, self.tx, config.max_reflection_order)

    @property
    def n_images(self) -> int:
        return sum(len(lvl.surf) for lvl in self.levels)

    def _backtrace(self, lvl: _Level, rx: np.ndarray):
        """Reflection points for every (receiver, node) pair that survives.

        The first plane test runs on the full receiver x node grid; later
        steps only see the surviving pairs.
        """
        arr = self.arr
        depth = lvl.anc_surf.shape[1]
        last = lvl.anc_surf[:, -1]
        img_last = lvl.anc_point[:, -1]
        s_p = rx @ arr.normal[last].T - arr.offset[last]
        s_i = np.einsum("nj,nj->n", img_last, arr.normal[last]) - arr.offset[last]
        m_idx, n_idx = np.nonzero((s_p * s_i < 0) & (np.abs(s_p) > PLANE_EPS))
        P = rx[m_idx]
        refl = [None] * depth
        for j in range(depth - 1, -1, -1):
            s = lvl.anc_surf[n_idx, j]
            img = lvl.anc_point[n_idx, j]
            nrm, off = arr.normal[s], arr.offset[s]
            sp = np.einsum("ij,ij->i", P, nrm) - off
            si = np.einsum("ij,ij->i", img, nrm) - off
            ok = (sp * si < 0) & (np.abs(sp) > PLANE_EPS)
            with np.errstate(divide="ignore", invalid="ignore"):
                t = sp / (sp - si)
                Q = P + t[:, None] * (img - P)
                a, b = arr.local_coords(Q, s)
            ok &= (a >= -_REFLECT_TOL) & (a <= 1 + _REFLECT_TOL)
            ok &= (b >= -_REFLECT_TOL) & (b <= 1 + _REFLECT_TOL)
            m_idx, n_idx, P = m_idx[ok], n_idx[ok], Q[ok]
            refl = [r[ok] if r is not None else None for r in refl]
            refl[j] = P
        chain = np.empty((len(m_idx), depth + 2, 3))
        chain[:, 0] = self.tx
        for j in range(depth):
            chain[:, j + 1] = refl[j]
        chain[:, -1] = rx[m_idx]
        return m_idx, n_idx, chain

    def _groups(self, rx: np.ndarray) -> list[_Group]:
        los = np.flatnonzero(np.linalg.norm(rx - self.tx, axis=1) > EPS_HIT)
        chain = np.stack([np.broadcast_to(self.tx, (len(los), 3)), rx[los]], axis=1)
        groups = [_Group(los, chain, np.zeros((len(los), 0), dtype=int), np.zeros((len(los), 0)))]
        for lvl in self.levels:
            n = len(lvl.surf)
            step = max(1, _CHUNK // max(n, 1))
            rows, chains, surfs = [], [], []
            for start in range(0, len(rx), step):
                m_idx, n_idx, chain = self._backtrace(lvl, rx[start : start + step])
                seg = np.linalg.norm(np.diff(chain, axis=1), axis=2)
                good = np.all(seg > EPS_HIT, axis=1)
                rows.append(m_idx[good] + start)
                chains.append(chain[good])
                surfs.append(lvl.anc_surf[n_idx[good]])
            chain = np.concatenate(chains)
            surf = np.concatenate(surfs)
            incoming = chain[:, 1:-1] - chain[:, :-2]
            cos = np.abs(np.einsum("vkj,vkj->vk", incoming, self.arr.normal[surf])) / np.linalg.norm(incoming, axis=2)
            groups.append(_Group(np.concatenate(rows), chain, surf, cos))
        return groups

    def evaluate(self, rx_points) -> PathBatch:
        rx = np.atleast_2d(np.asarray(rx_points, dtype=float))
        groups = self._groups(rx)
        sizes = np.array([len(g.rx) for g in groups])
        offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        rows = np.concatenate([g.rx for g in groups]).astype(int)
        length = np.concatenate([np.linalg.norm(np.diff(g.chain, axis=1), axis=2).sum(axis=1) for g in groups])
        gain = np.asarray(free_space_factor(length, self.config.frequency), dtype=complex).reshape(-1)

        path_of = [np.repeat(np.arange(len(g.rx)) + off, g.surf.shape[1]) for g, off in zip(groups, offsets)]
        self._apply(
            gain,
            np.concatenate(path_of).astype(int),
            np.concatenate([g.surf.reshape(-1) for g in groups]).astype(int),
            np.concatenate([g.cos.reshape(-1) for g in groups]),
            mat.fresnel_reflection,
        )
        hits = self._occlusion(groups, offsets, gain)
        return PathBatch(groups, offsets, rows, length, gain, *hits, self.arr.ids)

    def _apply(self, gain, path_idx, surf_idx, cos_i, coefficient):
        arr, freq = self.arr, self.config.frequency
        if len(path_idx) == 0:
            return
        factor = np.ones(len(path_idx), dtype=complex)
        mat_idx = arr.material_index[surf_idx]
        for mi in np.unique(mat_idx):
            sel = mat_idx == mi
            factor[sel] = coefficient(arr.materials[mi], np.clip(cos_i[sel], 0.0, 1.0), freq)
        np.multiply.at(gain, path_idx, factor)

    def _occlusion(self, groups, offsets, gain):
        arr = self.arr
        A, B, owner, seg_no, ex_a, ex_b = [], [], [], [], [], []
        for g, off in zip(groups, offsets):
            v, k = g.surf.shape
            A.append(g.chain[:, :-1].reshape(-1, 3))
            B.append(g.chain[:, 1:].reshape(-1, 3))
            owner.append(np.repeat(np.arange(v) + off, k + 1))
            seg_no.append(np.tile(np.arange(k + 1), v))
            edge = np.full((v, 1), -1)
            ex_a.append(np.concatenate([edge, g.surf], axis=1).reshape(-1))
            ex_b.append(np.concatenate([g.surf, edge], axis=1).reshape(-1))
        A, B = np.concatenate(A), np.concatenate(B)
        owner, seg_no = np.concatenate(owner).astype(int), np.concatenate(seg_no).astype(int)
        ex_a, ex_b = np.concatenate(ex_a).astype(int), np.concatenate(ex_b).astype(int)

        found = []
        n_surf = len(arr)
        step = max(1, _CHUNK // max(n_surf, 1))
        for start in range(0, len(A) if n_surf else 0, step):
            a, b = A[start : start + step], B[start : start + step]
            d = b - a
            seg_len = np.linalg.norm(d, axis=1)
            s_a = a @ arr.normal.T - arr.offset
            s_b = b @ arr.normal.T - arr.offset
            with np.errstate(divide="ignore", invalid="ignore"):
                t = s_a / (s_a - s_b)
            cand = (s_a * s_b < 0) & (t * seg_len[:, None] > EPS_HIT) & ((1 - t) * seg_len[:, None] > EPS_HIT)
            rows = np.arange(len(a))
            ea, eb = ex_a[start : start + step], ex_b[start : start + step]
            cand[rows[ea >= 0], ea[ea >= 0]] = False
            cand[rows[eb >= 0], eb[eb >= 0]] = False
            si, ni = np.nonzero(cand)
            tt = t[si, ni]
            x = a[si] + tt[:, None] * d[si]
            la, lb = arr.local_coords(x, ni)
            tol_a = EDGE_TOL / np.sqrt(arr.uu[ni])
            tol_b = EDGE_TOL / np.sqrt(arr.vv[ni])
            inside = (la >= -tol_a) & (la <= 1 + tol_a) & (lb >= -tol_b) & (lb <= 1 + tol_b)
            si, ni, tt, x = si[inside], ni[inside], tt[inside], x[inside]
            cos_i = np.abs(np.einsum("ij,ij->i", d[si], arr.normal[ni])) / seg_len[si]
            found.append((si + start, ni, tt, cos_i, x))
        if found:
            seg_i = np.concatenate([f[0] for f in found])
            surf_i = np.concatenate([f[1] for f in found])
            t_i = np.concatenate([f[2] for f in found])
            cos_i = np.concatenate([f[3] for f in found])
            x_i = np.concatenate([f[4] for f in found])
        else:
            seg_i = surf_i = np.zeros(0, dtype=int)
            t_i = cos_i = np.zeros(0)
            x_i = np.zeros((0, 3))
        path_i = owner[seg_i]
        self._apply(gain, path_i, surf_i, cos_i, mat.slab_transmission)
        order = np.argsort(path_i, kind="stable")
        return path_i[order], seg_no[seg_i][order], t_i[order], surf_i[order], cos_i[order], x_i[order]


def check_link(scene: Scene, tx, rx=None) -> None:
    if rx is not None and np.linalg.norm(np.subtract(tx, rx)) <= EPS_HIT:
        raise TraceError("tx equals rx")
    for name, p in (("tx", tx), ("rx", rx)):
        if p is None:
            continue
        if not all(math.isfinite(c) for c in p):
            raise TraceError(f"{name} has a non-finite coordinate")
        if not scene.contains(p):
            raise TraceError(f"{name} {tuple(p)} is outside the scene bounds")


def trace(scene: Scene, tx, rx, config: TraceConfig = TraceConfig()) -> list[PropagationPath]:
    """All specular paths from ``tx`` to ``rx`` up to the configured order.

    Paths weaker than ``config.min_path_gain_db`` are dropped; the rest are
    ordered strongest first (ties by length, then surface-id sequence) and
    truncated to ``config.max_paths``.
    """
    tx, rx = as_point(tx), as_point(rx)
    check_link(scene, tx, rx)
    engine = ImageEngine(scene, tx, config)
    return engine.evaluate([rx]).paths_for(0, config)
