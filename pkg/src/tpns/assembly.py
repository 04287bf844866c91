"""Global assembly of the bilinear and linear forms of the projection scheme.

All element integrals use the quadrature rule carried by the ``FeSystem``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .fem import ConstraintSet, FeSystem, Field, FieldKind
from .sparse import SparseMatrix, TripletBuilder, from_triplets


def _scatter(rows: np.ndarray, cols: np.ndarray, local: np.ndarray, shape, order=None):
    """Sum element matrices ``local`` (nt, nr, nc) into a CSR matrix."""
    if order is not None:
        rows, cols, local = rows[order], cols[order], local[order]
    b = TripletBuilder()
    r = np.broadcast_to(rows[:, :, None], local.shape)
    c = np.broadcast_to(cols[:, None, :], local.shape)
    b.add(r, c, local)
    return from_triplets(b, shape)


def _p2_weighted_mass(fe: FeSystem, weight: np.ndarray | None = None, order=None) -> SparseMatrix:
    w = fe.wq if weight is None else fe.wq * weight
    local = np.einsum("tq,qa,qb->tab", w, fe.phi2, fe.phi2)
    nodes = fe.dofmap.cell_nodes
    n = fe.dofmap.n_nodes
    return _scatter(nodes, nodes, local, (n, n), order)


def _vector_blocks(blocks) -> SparseMatrix:
    m = sp.bmat(blocks, format="csr")
    m.sort_indices()
    return m


def assemble_mass(fe: FeSystem, order=None) -> SparseMatrix:
    """Velocity mass matrix (u, v), block diagonal over the two components."""
    m = _p2_weighted_mass(fe, order=order)
    return _vector_blocks([[m, None], [None, m]])


def assemble_scalar_mass(fe: FeSystem, degree: int = 1) -> SparseMatrix:
    """Mass matrix of the scalar P1 (degree=1) or P2 (degree=2) space."""
    if degree == 2:
        return _p2_weighted_mass(fe)
    local = np.einsum("tq,qa,qb->tab", fe.wq, fe.phi1, fe.phi1)
    verts = fe.dofmap.cell_vertices
    n = fe.dofmap.n_pressure
    return _scatter(verts, verts, local, (n, n))


def assemble_a(fe: FeSystem, order=None) -> SparseMatrix:
    """The div-div plus curl-curl form a(u, v)."""
    d = fe.dphi2  # (nt, nq, 6, 2)
    dx, dy = d[..., 0], d[..., 1]
    lap = np.einsum("tq,tqa,tqb->tab", fe.wq, dx, dx) + np.einsum("tq,tqa,tqb->tab", fe.wq, dy, dy)
    # test x-component a, trial y-component b: dx(phi_a) dy(phi_b) - dy(phi_a) dx(phi_b)
    cross = np.einsum("tq,tqa,tqb->tab", fe.wq, dx, dy) - np.einsum("tq,tqa,tqb->tab", fe.wq, dy, dx)
    nodes = fe.dofmap.cell_nodes
    n = fe.dofmap.n_nodes
    k = _scatter(nodes, nodes, lap, (n, n), order)
    c = _scatter(nodes, nodes, cross, (n, n), order)
    return _vector_blocks([[k, c], [c.T.tocsr(), k]])


def vorticity_at(w: Field, fe: FeSystem) -> np.ndarray:
    g = fe.eval_velocity_grad(w.coeffs)
    return g[..., 1, 0] - g[..., 0, 1]


def assemble_convection(w: Field, fe: FeSystem, order=None) -> SparseMatrix:
    """N(w)[i, j] = integral of curl(w) * (phi_j x phi_i).

    With W = integral of curl(w) psi_a psi_b this is [[0, -W], [W, 0]],
    exactly skew-symmetric.
    """
    wmat = _p2_weighted_mass(fe, vorticity_at(w, fe), order)
    return _vector_blocks([[None, -wmat], [wmat, None]])


def assemble_pressure_stiffness(fe: FeSystem, order=None) -> SparseMatrix:
    local = np.einsum("t,tai,tbi->tab", fe.area, fe.dphi1, fe.dphi1)
    verts = fe.dofmap.cell_vertices
    n = fe.dofmap.n_pressure
    return _scatter(verts, verts, local, (n, n), order)


def assemble_grad_coupling(fe: FeSystem, order=None) -> SparseMatrix:
    """G[(comp, a), c] = integral of psi_a * d_comp(chi_c): the pairing (grad P, phi)."""
    mom = np.einsum("tq,qa->ta", fe.wq, fe.phi2)  # integral of psi_a per cell
    nodes, verts = fe.dofmap.cell_nodes, fe.dofmap.cell_vertices
    n, npr = fe.dofmap.n_nodes, fe.dofmap.n_pressure
    gx = _scatter(nodes, verts, np.einsum("ta,tc->tac", mom, fe.dphi1[..., 0]), (n, npr), order)
    gy = _scatter(nodes, verts, np.einsum("ta,tc->tac", mom, fe.dphi1[..., 1]), (n, npr), order)
    return _vector_blocks([[gx], [gy]])


def assemble_div_matrix(fe: FeSystem, order=None) -> SparseMatrix:
    """B[c, (comp, a)] = integral of chi_c * d_comp(psi_a); B @ u pairs div u with chi_c."""
    nodes, verts = fe.dofmap.cell_nodes, fe.dofmap.cell_vertices
    n, npr = fe.dofmap.n_nodes, fe.dofmap.n_pressure
    blocks = []
    for comp in range(2):
        local = np.einsum("tq,qc,tqa->tca", fe.wq, fe.phi1, fe.dphi2[..., comp])
        blocks.append(_scatter(verts, nodes, local, (npr, n), order))
    return _vector_blocks([blocks])


def assemble_div_rhs(ustar: Field, fe: FeSystem, div_matrix: SparseMatrix | None = None) -> np.ndarray:
    """Pressure right-hand side, entry c = -(div u*, chi_c)."""
    b = assemble_div_matrix(fe) if div_matrix is None else div_matrix
    return -(b @ ustar.coeffs)


def assemble_vector_rhs(values: np.ndarray, fe: FeSystem) -> np.ndarray:
    """(v, phi_i) for a vector field given at quadrature points (nt, nq, 2)."""
    local = np.einsum("tq,qa,tqc->tca", fe.wq, fe.phi2, values)  # (nt, 2, 6)
    out = np.zeros(fe.dofmap.n_velocity)
    np.add.at(out, fe.dofmap.cell_velocity_dofs(), local.reshape(-1, 12))
    return out


def assemble_load(f: Callable, t: float, fe: FeSystem) -> np.ndarray:
    """(f(t), phi_i) with f evaluated at the physical quadrature points."""
    fx, fy = f(fe.xq[..., 0], fe.xq[..., 1], t)
    shape = fe.xq.shape[:2]
    vals = np.stack([np.broadcast_to(fx, shape), np.broadcast_to(fy, shape)], axis=-1)
    return assemble_vector_rhs(vals, fe)


def apply_constraints(
    matrix: SparseMatrix, rhs: np.ndarray, constraints: ConstraintSet, values: np.ndarray | None = None
) -> tuple[SparseMatrix, np.ndarray]:
    """Impose Dirichlet values by elimination.

    Constrained rows become identity rows with the prescribed value on the
    right-hand side; the prescribed values are moved into the right-hand side
    of the free rows and the constrained columns are zeroed, which keeps a
    symmetric matrix symmetric.
    """
    n = matrix.shape[0]
    if matrix.shape[1] != n:
        raise ValueError("constraints need a square system")
    idx = constraints.indices
    if len(idx) and (idx.min() < 0 or idx.max() >= n):
        raise IndexError("constraint index out of range")
    g = np.zeros(n)
    if values is None:
        values = constraints.values()
    g[idx] = values
    free = np.ones(n)
    free[idx] = 0.0
    dfree = sp.diags(free)
    fixed = sp.diags(1.0 - free)
    m = (dfree @ matrix @ dfree + fixed).tocsr()
    m.eliminate_zeros()
    m.sort_indices()
    out = free * (rhs - matrix @ g) + g
    return m, out


@dataclass(frozen=True)
class AssembledForms:
    M: SparseMatrix
    A: SparseMatrix
    L: SparseMatrix
    G: SparseMatrix
    B: SparseMatrix  # divergence pairing, pressure rows x velocity columns


def assemble_forms(fe: FeSystem) -> AssembledForms:
    return AssembledForms(
        M=assemble_mass(fe),
        A=assemble_a(fe),
        L=assemble_pressure_stiffness(fe),
        G=assemble_grad_coupling(fe),
        B=assemble_div_matrix(fe),
    )
