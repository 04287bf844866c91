"""P1/P2 Lagrange elements on triangles: bases, DOF maps, constraints, fields.

Velocity DOFs are ordered component-major: ``comp * n_nodes + node`` with
P2 nodes numbered vertices first, then edge midpoints in sorted order of
their (min, max) endpoint pair. Pressure DOFs are the mesh vertices.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .mesh import BoundaryTag, TriMesh, UnsupportedGeometryError
from .quadrature import QuadratureRule, quadrature

# local P2 edges: midpoint node 3+e sits between LOCAL_EDGES[e]
LOCAL_EDGES = ((0, 1), (1, 2), (2, 0))

_DLAMBDA = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])


def _check_bary(bary) -> np.ndarray:
    lam = np.asarray(bary, dtype=float)
    if lam.shape[-1] != 3:
        raise ValueError("barycentric coordinates need 3 entries")
    if np.any(np.abs(lam.sum(axis=-1) - 1.0) > 1e-12):
        raise ValueError("barycentric coordinates must sum to 1")
    if np.any(lam < -1e-14) or np.any(lam > 1 + 1e-14):
        raise ValueError("barycentric coordinates must lie in [0, 1]")
    return lam


def eval_p1_basis(bary) -> tuple[np.ndarray, np.ndarray]:
    """Values (3,) and reference gradients (3, 2) of the linear basis."""
    lam = _check_bary(bary)
    return lam.copy(), _DLAMBDA.copy()


def eval_p2_basis(bary) -> tuple[np.ndarray, np.ndarray]:
    """Values (6,) and reference gradients (6, 2) of the quadratic basis."""
    lam = _check_bary(bary)
    vals = np.empty(6)
    grads = np.empty((6, 2))
    for i in range(3):
        vals[i] = lam[i] * (2.0 * lam[i] - 1.0)
        grads[i] = (4.0 * lam[i] - 1.0) * _DLAMBDA[i]
    for e, (i, j) in enumerate(LOCAL_EDGES):
        vals[3 + e] = 4.0 * lam[i] * lam[j]
        grads[3 + e] = 4.0 * (lam[i] * _DLAMBDA[j] + lam[j] * _DLAMBDA[i])
    return vals, grads


def _tabulate(rule: QuadratureRule, basis) -> tuple[np.ndarray, np.ndarray]:
    out = [basis(p) for p in rule.points]
    return np.array([v for v, _ in out]), np.array([g for _, g in out])


@dataclass(frozen=True)
class DofMap:
    n_vertices: int
    n_edges: int
    cell_nodes: np.ndarray  # (nt, 6) global P2 node ids
    node_coords: np.ndarray  # (n_nodes, 2)
    edge_index: dict  # sorted vertex pair -> P2 node id

    @property
    def n_nodes(self) -> int:
        return self.n_vertices + self.n_edges

    @property
    def n_velocity(self) -> int:
        return 2 * self.n_nodes

    @property
    def n_pressure(self) -> int:
        return self.n_vertices

    @property
    def cell_vertices(self) -> np.ndarray:
        return self.cell_nodes[:, :3]

    def velocity_dof(self, node, comp: int):
        return comp * self.n_nodes + np.asarray(node)

    def cell_velocity_dofs(self) -> np.ndarray:
        """(nt, 12) velocity DOFs per cell: 6 x-component then 6 y-component."""
        return np.hstack([self.cell_nodes, self.cell_nodes + self.n_nodes])


def build_dof_map(mesh: TriMesh) -> DofMap:
    tris = mesh.triangles
    pairs = set()
    for a, b in LOCAL_EDGES:
        lo = np.minimum(tris[:, a], tris[:, b])
        hi = np.maximum(tris[:, a], tris[:, b])
        pairs.update(zip(lo.tolist(), hi.tolist()))
    nv = mesh.n_vertices
    edge_index = {e: nv + k for k, e in enumerate(sorted(pairs))}
    cell_nodes = np.empty((len(tris), 6), dtype=np.int64)
    cell_nodes[:, :3] = tris
    for e, (a, b) in enumerate(LOCAL_EDGES):
        cell_nodes[:, 3 + e] = [
            edge_index[(min(p, q), max(p, q))] for p, q in zip(tris[:, a], tris[:, b])
        ]
    ends = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
    mids = 0.5 * (mesh.vertices[ends[:, 0]] + mesh.vertices[ends[:, 1]])
    coords = np.vstack([mesh.vertices, mids])
    return DofMap(nv, len(pairs), cell_nodes, coords, edge_index)


class FieldKind(enum.Enum):
    VelocityP2 = "velocity"
    PressureP1 = "pressure"


@dataclass
class Field:
    coeffs: np.ndarray
    kind: FieldKind
    dofmap: DofMap

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        expected = (
            self.dofmap.n_velocity
            if self.kind is FieldKind.VelocityP2
            else self.dofmap.n_pressure
        )
        if self.coeffs.shape != (expected,):
            raise ValueError(
                f"{self.kind.value} field needs {expected} coefficients, got {self.coeffs.shape}"
            )

    @classmethod
    def zeros(cls, kind: FieldKind, dofmap: DofMap) -> "Field":
        n = dofmap.n_velocity if kind is FieldKind.VelocityP2 else dofmap.n_pressure
        return cls(np.zeros(n), kind, dofmap)

    def components(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.dofmap.n_nodes
        return self.coeffs[:n], self.coeffs[n:]

    def values_at(self, fe: "FeSystem") -> np.ndarray:
        """Values at the quadrature points of ``fe``: (nt, nq, 2) or (nt, nq)."""
        if self.kind is FieldKind.VelocityP2:
            return fe.eval_velocity(self.coeffs)
        return fe.eval_pressure(self.coeffs)

    def grads_at(self, fe: "FeSystem") -> np.ndarray:
        """Gradients at quadrature points: (nt, nq, 2, 2) [comp, d/dx_j] or (nt, nq, 2)."""
        if self.kind is FieldKind.VelocityP2:
            return fe.eval_velocity_grad(self.coeffs)
        g = fe.eval_pressure_grad(self.coeffs)
        return np.broadcast_to(g[:, None, :], (g.shape[0], fe.rule.n_points, 2))


VectorFn = Callable[[np.ndarray, np.ndarray, float], tuple]
ScalarFn = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


def interpolate_p2(fn: VectorFn, t: float, dofmap: DofMap) -> Field:
    x, y = dofmap.node_coords.T
    ux, uy = fn(x, y, t)
    ux = np.broadcast_to(np.asarray(ux, dtype=float), x.shape)
    uy = np.broadcast_to(np.asarray(uy, dtype=float), x.shape)
    return Field(np.concatenate([ux, uy]), FieldKind.VelocityP2, dofmap)


def interpolate_p1(fn: ScalarFn, t: float, dofmap: DofMap) -> Field:
    x, y = dofmap.node_coords[: dofmap.n_vertices].T
    vals = np.broadcast_to(np.asarray(fn(x, y, t), dtype=float), x.shape)
    return Field(np.array(vals), FieldKind.PressureP1, dofmap)


class ConstraintSet:
    """Constrained DOF indices with a time-dependent value provider."""

    def __init__(self, indices, provider: Callable[[float], np.ndarray] | None = None, size=None):
        self.indices = np.asarray(indices, dtype=np.int64)
        if len(np.unique(self.indices)) != len(self.indices):
            raise ValueError("a DOF may be constrained at most once")
        self.size = size
        self._provider = provider

    def __len__(self) -> int:
        return len(self.indices)

    def values(self, t: float = 0.0) -> np.ndarray:
        if self._provider is None:
            return np.zeros(len(self.indices))
        return np.asarray(self._provider(t), dtype=float)


def _boundary_nodes(mesh: TriMesh, dofmap: DofMap, *tags: BoundaryTag) -> np.ndarray:
    edges = mesh.edges_with_tag(*tags)
    nodes = set(edges.ravel().tolist())
    nodes.update(dofmap.edge_index[(min(a, b), max(a, b))] for a, b in edges.tolist())
    return np.array(sorted(nodes), dtype=np.int64)


def _check_axis_aligned(mesh: TriMesh) -> None:
    v = mesh.vertices
    for tag, coord in ((BoundaryTag.Gamma2ThetaMin, 1), (BoundaryTag.Gamma2ThetaMax, 0)):
        ends = mesh.edges_with_tag(tag)
        if len(ends) and np.any(v[ends.ravel(), coord] != 0.0):
            raise UnsupportedGeometryError(
                f"{tag.name} edges must lie on the {'x' if coord == 1 else 'y'} axis"
            )


def build_velocity_constraints(mesh: TriMesh, dofmap: DofMap) -> ConstraintSet:
    """Homogeneous constraints defining the velocity space.

    Closure of the wall: both components. Interior of a flat boundary
    segment on y=0: the x-component (tangential); on x=0: the y-component.
    """
    _check_axis_aligned(mesh)
    wall = _boundary_nodes(mesh, dofmap, BoundaryTag.Gamma1)
    lower = np.setdiff1d(_boundary_nodes(mesh, dofmap, BoundaryTag.Gamma2ThetaMin), wall)
    left = np.setdiff1d(_boundary_nodes(mesh, dofmap, BoundaryTag.Gamma2ThetaMax), wall)
    idx = np.concatenate(
        [
            dofmap.velocity_dof(wall, 0),
            dofmap.velocity_dof(wall, 1),
            dofmap.velocity_dof(lower, 0),
            dofmap.velocity_dof(left, 1),
        ]
    )
    return ConstraintSet(np.sort(idx), None, size=dofmap.n_velocity)


def build_pressure_constraints(mesh: TriMesh, dofmap: DofMap, pb: ScalarFn) -> ConstraintSet:
    """Nodal interpolation of the boundary total pressure on the flat segments."""
    ends = mesh.edges_with_tag(BoundaryTag.Gamma2ThetaMin, BoundaryTag.Gamma2ThetaMax)
    verts = np.unique(ends.ravel())
    x, y = mesh.vertices[verts].T

    def provider(t: float) -> np.ndarray:
        return np.broadcast_to(np.asarray(pb(x, y, t), dtype=float), x.shape).copy()

    return ConstraintSet(verts, provider, size=dofmap.n_pressure)


class FeSystem:
    """Mesh + DOF map + per-element geometry and basis tables at one quadrature rule."""

    def __init__(self, mesh: TriMesh, rule: QuadratureRule | None = None, dofmap: DofMap | None = None):
        self.mesh = mesh
        self.rule = rule if rule is not None else quadrature(6)
        self.dofmap = dofmap if dofmap is not None else build_dof_map(mesh)

        p = mesh.vertices[mesh.triangles]
        jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)  # (nt, 2, 2), columns
        det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        if np.any(det <= 0):
            raise ValueError("mesh has non-positively oriented triangles")
        self.area = 0.5 * det
        self.inv_jac_t = np.transpose(np.linalg.inv(jac), (0, 2, 1))

        self.phi2, ref_dphi2 = _tabulate(self.rule, eval_p2_basis)  # (nq, 6), (nq, 6, 2)
        self.phi1, ref_dphi1 = _tabulate(self.rule, eval_p1_basis)
        self.dphi2 = np.einsum("tij,qaj->tqai", self.inv_jac_t, ref_dphi2)  # (nt, nq, 6, 2)
        self.dphi1 = np.einsum("tij,aj->tai", self.inv_jac_t, ref_dphi1[0])  # (nt, 3, 2)
        self.xq = np.einsum("qk,tkd->tqd", self.rule.points, p)  # (nt, nq, 2)
        self.wq = self.area[:, None] * self.rule.weights[None, :]  # (nt, nq)

    def with_rule(self, rule: QuadratureRule) -> "FeSystem":
        return FeSystem(self.mesh, rule, self.dofmap)

    @property
    def total_area(self) -> float:
        return float(self.area.sum())

    def integrate(self, values: np.ndarray) -> float:
        """Integral of a scalar given at quadrature points (nt, nq)."""
        return float(np.sum(self.wq * values))

    def eval_velocity(self, coeffs: np.ndarray) -> np.ndarray:
        local = coeffs[self.dofmap.cell_velocity_dofs()].reshape(-1, 2, 6)
        return np.einsum("qa,tca->tqc", self.phi2, local)

    def eval_velocity_grad(self, coeffs: np.ndarray) -> np.ndarray:
        local = coeffs[self.dofmap.cell_velocity_dofs()].reshape(-1, 2, 6)
        return np.einsum("tqaj,tca->tqcj", self.dphi2, local)

    def eval_pressure(self, coeffs: np.ndarray) -> np.ndarray:
        return np.einsum("qa,ta->tq", self.phi1, coeffs[self.dofmap.cell_vertices])

    def eval_pressure_grad(self, coeffs: np.ndarray) -> np.ndarray:
        return np.einsum("taj,ta->tj", self.dphi1, coeffs[self.dofmap.cell_vertices])
