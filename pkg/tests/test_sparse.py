import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from tpns.assembly import apply_constraints, assemble_pressure_stiffness
from tpns.fem import build_pressure_constraints
from tpns.sparse import (
    ConvergenceError,
    IndefiniteMatrixError,
    LUFactor,
    NumericalSingularityError,
    StructuralSingularityError,
    TripletBuilder,
    cg_solve,
    from_triplets,
    lu_solve,
    relative_residual,
    spmv,
)


def build(triplets, shape):
    b = TripletBuilder()
    if triplets:
        r, c, v = zip(*triplets)
        b.add(r, c, v)
    return from_triplets(b, shape)


def assert_canonical(m):
    for i in range(m.shape[0]):
        cols = m.indices[m.indptr[i]:m.indptr[i + 1]]
        assert np.all(np.diff(cols) > 0)


def test_empty_builder_gives_zero_matrix():
    m = build([], (3, 4))
    assert m.shape == (3, 4) and m.nnz == 0
    assert np.all(np.diff(m.indptr) == 0)


def test_duplicates_are_summed():
    m = build([(0, 0, 1.0), (0, 0, 1.0)], (2, 2))
    assert m.nnz == 1 and m[0, 0] == 2.0


@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5), st.floats(-10, 10)), max_size=40), st.randoms())
def test_shuffled_triplets_give_identical_csr(triplets, rnd):
    a = build(triplets, (6, 6))
    shuffled = list(triplets)
    rnd.shuffle(shuffled)
    b = build(shuffled, (6, 6))
    assert_canonical(a)
    assert np.array_equal(a.indptr, b.indptr) and np.array_equal(a.indices, b.indices)
    assert np.allclose(a.data, b.data, rtol=1e-13, atol=1e-12)


def test_out_of_range_triplet():
    with pytest.raises(IndexError):
        build([(3, 0, 1.0)], (3, 3))


def test_spmv_small_cases():
    v = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(spmv(sp.identity(3, format="csr"), v), v)
    assert np.array_equal(spmv(sp.csr_matrix((3, 3)), v), np.zeros(3))
    dense = np.array([[1.0, 2, 0], [0, 3, 4], [5, 0, 6]])
    assert np.array_equal(spmv(sp.csr_matrix(dense), v), [-3.0, 6.0, 23.0])
    with pytest.raises(ValueError):
        spmv(sp.identity(3, format="csr"), np.ones(2))


def test_lu_diagonal_and_pivoting():
    d = sp.diags([2.0, 4.0, 8.0]).tocsr()
    assert np.allclose(lu_solve(d, [2.0, 2.0, 2.0]), [1.0, 0.5, 0.25])
    swap = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(lu_solve(swap, [3.0, 7.0]), [7.0, 3.0])


def test_lu_random_roundtrip_and_reuse(rng):
    n = 60
    m = sp.random(n, n, density=0.1, random_state=1, format="csr") + sp.identity(n) * 5
    x = rng.standard_normal(n)
    got = lu_solve(m.tocsr(), m @ x)
    assert np.linalg.norm(got - x) <= 1e-9 * np.linalg.norm(x)
    lu = LUFactor(m.tocsr())
    b1, b2 = rng.standard_normal(n), rng.standard_normal(n)
    assert np.max(np.abs(lu.solve(b1) - LUFactor(m.tocsr()).solve(b1))) <= 1e-15 * np.max(np.abs(lu.solve(b1)))
    assert np.array_equal(lu.solve(b2), lu.solve(b2))


def test_singularities_reported_distinctly():
    empty_row = sp.csr_matrix(np.array([[1.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(StructuralSingularityError):
        LUFactor(empty_row)
    rank_one = sp.csr_matrix(np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(NumericalSingularityError):
        LUFactor(rank_one).solve(np.array([1.0, 2.0]))


def test_cg_identity_and_diagonal():
    assert np.allclose(cg_solve(sp.identity(5, format="csr"), np.arange(5.0), max_iter=1), np.arange(5.0))
    d = sp.diags(np.arange(1.0, 8.0)).tocsr()
    assert np.allclose(cg_solve(d, np.ones(7), max_iter=7), 1.0 / np.arange(1.0, 8.0))


def test_cg_errors():
    indefinite = sp.csr_matrix(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(IndefiniteMatrixError):
        cg_solve(indefinite, np.array([1.0, -1.0]))
    lap = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(50, 50)).tocsr()
    with pytest.raises(ConvergenceError):
        cg_solve(lap, np.ones(50), max_iter=3)


def test_cg_matches_lu_on_pressure_system(small_fe, problem):
    fe = small_fe
    cons = build_pressure_constraints(fe.mesh, fe.dofmap, problem.boundary_pb)
    stiff = assemble_pressure_stiffness(fe)
    rhs = np.sin(fe.mesh.vertices[:, 0]) * fe.dofmap.n_pressure ** -1
    m, b = apply_constraints(0.125 * stiff, rhs, cons, cons.values(0.3))
    x_lu = lu_solve(m, b)
    x_cg = cg_solve(m, b, tol=1e-13)
    assert relative_residual(m, x_lu, b) <= 1e-10
    assert np.max(np.abs(x_cg - x_lu)) <= 1e-8 * np.max(np.abs(x_lu))


def test_relative_residual_zero_rhs():
    m = sp.identity(2, format="csr")
    assert relative_residual(m, np.zeros(2), np.zeros(2)) == 0.0
