"""Structured triangulation of an annular sector with tagged boundary edges."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class UnsupportedGeometryError(ValueError):
    """Raised when the pressure boundary segments are not on coordinate axes."""


class BoundaryTag(enum.Enum):
    Gamma1 = "G1"
    Gamma2ThetaMin = "G2A"
    Gamma2ThetaMax = "G2B"

    @property
    def is_gamma2(self) -> bool:
        return self is not BoundaryTag.Gamma1


@dataclass(frozen=True)
class TriMesh:
    vertices: np.ndarray  # (nv, 2)
    triangles: np.ndarray  # (nt, 3), counterclockwise
    boundary_edges: np.ndarray  # (nb, 2) vertex pairs
    boundary_tags: tuple[BoundaryTag, ...]
    h: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "h", float(self.edge_lengths().max()))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def edge_lengths(self) -> np.ndarray:
        """Longest edge of every triangle (its diameter)."""
        p = self.vertices[self.triangles]
        lens = np.stack(
            [np.linalg.norm(p[:, (i + 1) % 3] - p[:, i], axis=1) for i in range(3)],
            axis=1,
        )
        return lens.max(axis=1)

    def edges_with_tag(self, *tags: BoundaryTag) -> np.ndarray:
        mask = np.array([t in tags for t in self.boundary_tags], dtype=bool)
        return self.boundary_edges[mask]

    def topological_boundary(self) -> set[tuple[int, int]]:
        """Edges incident to exactly one triangle, as sorted vertex pairs."""
        counts: dict[tuple[int, int], int] = {}
        for tri in self.triangles:
            for i in range(3):
                a, b = int(tri[i]), int(tri[(i + 1) % 3])
                key = (a, b) if a < b else (b, a)
                counts[key] = counts.get(key, 0) + 1
        return {e for e, c in counts.items() if c == 1}


def generate_sector_mesh(
    r1: float, r2: float, theta1: float, theta2: float, target_h: float
) -> TriMesh:
    """Mapped polar grid on ``r1 < r < r2, theta1 < theta < theta2``.

    Only the quarter annulus ``theta1 = 0, theta2 = pi/2`` is supported: the
    straight boundary segments must lie on the coordinate axes so that the
    tangential velocity condition reduces to a single-component constraint.
    """
    if not 0 < r1 < r2:
        raise ValueError(f"need 0 < r1 < r2, got r1={r1}, r2={r2}")
    if not theta1 < theta2:
        raise ValueError(f"need theta1 < theta2, got {theta1}, {theta2}")
    if not target_h > 0:
        raise ValueError(f"target_h must be positive, got {target_h}")
    if theta1 != 0.0 or not math.isclose(theta2, math.pi / 2, rel_tol=0, abs_tol=1e-14):
        raise UnsupportedGeometryError(
            "only theta1=0, theta2=pi/2 is supported (flat boundary segments on the axes)"
        )

    n_r = math.ceil((r2 - r1) / target_h - 1e-12)
    n_t = math.ceil(r2 * (theta2 - theta1) / target_h - 1e-12)
    rs = np.linspace(r1, r2, n_r + 1)
    ts = np.linspace(theta1, theta2, n_t + 1)

    # vertex (i, j) = (radial index, angular index), row-major
    R, T = np.meshgrid(rs, ts, indexing="ij")
    x = R * np.cos(T)
    y = R * np.sin(T)
    y[:, 0] = 0.0
    x[:, -1] = 0.0
    x[:, 0] = rs
    y[:, -1] = rs
    vertices = np.column_stack([x.ravel(), y.ravel()])

    def vid(i: int, j: int) -> int:
        return i * (n_t + 1) + j

    tris = []
    for i in range(n_r):
        for j in range(n_t):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            # (r, theta) is a right-handed chart, so a-b-c-d is counterclockwise
            if (i + j) % 2 == 0:
                tris += [(a, b, c), (a, c, d)]
            else:
                tris += [(a, b, d), (b, c, d)]
    triangles = np.array(tris, dtype=np.int64)

    edges: list[tuple[int, int]] = []
    tags: list[BoundaryTag] = []
    for j in range(n_t):
        edges.append((vid(0, j + 1), vid(0, j)))
        tags.append(BoundaryTag.Gamma1)
    for j in range(n_t):
        edges.append((vid(n_r, j), vid(n_r, j + 1)))
        tags.append(BoundaryTag.Gamma1)
    for i in range(n_r):
        edges.append((vid(i, 0), vid(i + 1, 0)))
        tags.append(BoundaryTag.Gamma2ThetaMin)
    for i in range(n_r):
        edges.append((vid(i + 1, n_t), vid(i, n_t)))
        tags.append(BoundaryTag.Gamma2ThetaMax)

    return TriMesh(vertices, triangles, np.array(edges, dtype=np.int64), tuple(tags))


def mesh_stats(mesh: TriMesh) -> dict:
    counts = {tag.name: 0 for tag in BoundaryTag}
    for tag in mesh.boundary_tags:
        counts[tag.name] += 1
    return {
        "h": mesh.h,
        "total_area": float(mesh.signed_areas().sum()),
        "n_vertices": mesh.n_vertices,
        "n_triangles": mesh.n_triangles,
        "n_boundary_edges": len(mesh.boundary_edges),
        **{f"n_{k}": v for k, v in counts.items()},
    }


MESH_HEADER = "tpns-mesh 1"


def write_mesh(mesh: TriMesh, path: str | Path) -> None:
    lines = [
        MESH_HEADER,
        f"{mesh.n_vertices} {mesh.n_triangles} {len(mesh.boundary_edges)}",
    ]
    lines += [f"{x:.17g} {y:.17g}" for x, y in mesh.vertices]
    lines += [f"{i} {j} {k}" for i, j, k in mesh.triangles]
    lines += [
        f"{i} {j} {tag.value}" for (i, j), tag in zip(mesh.boundary_edges, mesh.boundary_tags)
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path: str | Path) -> TriMesh:
    lines = Path(path).read_text().split("\n")
    if lines[0].strip() != MESH_HEADER:
        raise ValueError(f"not a tpns mesh file: header {lines[0]!r}")
    nv, nt, nb = (int(s) for s in lines[1].split())
    body = lines[2:]
    vertices = np.array([[float(s) for s in ln.split()] for ln in body[:nv]]).reshape(nv, 2)
    triangles = np.array(
        [[int(s) for s in ln.split()] for ln in body[nv : nv + nt]], dtype=np.int64
    ).reshape(nt, 3)
    by_value = {t.value: t for t in BoundaryTag}
    edges, tags = [], []
    for ln in body[nv + nt : nv + nt + nb]:
        i, j, tag = ln.split()
        edges.append((int(i), int(j)))
        tags.append(by_value[tag])
    return TriMesh(vertices, triangles, np.array(edges, dtype=np.int64).reshape(nb, 2), tuple(tags))
