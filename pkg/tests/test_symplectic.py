import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splitflow.symplectic import (
    LagrangianFrame,
    SymplecticSpace,
    gap_distance,
    graph_lagrangian,
    intersection_basis,
    intersection_dim,
    lagrangian_from_span,
    orthonormal_columns,
    random_lagrangian,
    standard_space,
    transversal_connecting_path,
)

from _oracles import rank_intersection_dim


def test_standard_space_structure():
    sp = standard_space(6)
    assert np.abs(sp.J @ sp.J + np.eye(6)).max() < 1e-14
    assert np.abs(sp.J + sp.J.T).max() < 1e-14
    # omega(e_k, e_{-k}) = 1
    assert sp.omega(sp.ref[:, 0], sp.J @ sp.ref[:, 0]) == pytest.approx(1.0)


def test_bad_structure_rejected():
    with pytest.raises(ValueError):
        SymplecticSpace(np.eye(4))
    with pytest.raises(ValueError):
        SymplecticSpace(np.zeros((3, 3)))


def test_generic_space_from_schur(rng):
    q, _ = np.linalg.qr(rng.normal(size=(8, 8)))
    sp_std = standard_space(8)
    sp = SymplecticSpace(q @ sp_std.J @ q.T)
    f = random_lagrangian(sp, rng)
    assert np.abs(f.frame.T @ sp.J @ f.frame).max() < 1e-10


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), half=st.integers(1, 4))
def test_random_lagrangian_invariants(seed, half):
    sp = standard_space(2 * half)
    f = random_lagrangian(sp, np.random.default_rng(seed))
    assert np.abs(f.frame.T @ f.frame - np.eye(half)).max() < 1e-10
    assert np.abs(f.frame.T @ sp.J @ f.frame).max() < 1e-10


def test_frame_validation_rejects_non_lagrangian():
    sp = standard_space(4)
    bad = np.zeros((4, 2))
    bad[0, 0] = 1.0
    bad[2, 1] = 1.0  # contains the J-partner of the first column
    with pytest.raises(ValueError):
        LagrangianFrame(sp, bad)


def test_intersection_dim_self_and_rotated(rng):
    sp = standard_space(6)
    lam = random_lagrangian(sp, rng)
    assert intersection_dim(lam, lam) == 3
    jlam = lagrangian_from_span(sp, sp.J @ lam.frame)
    assert intersection_dim(lam, jlam) == 0


@pytest.mark.parametrize("seed", range(8))
def test_intersection_dim_matches_rank_oracle(seed):
    rng = np.random.default_rng(seed)
    sp = standard_space(6)
    a = random_lagrangian(sp, rng)
    if seed % 2:
        b = random_lagrangian(sp, rng)
    else:
        # force a shared direction
        shared = a.frame[:, :1]
        jrest = sp.J @ a.frame[:, 1:]
        b = lagrangian_from_span(sp, np.concatenate([shared, jrest], axis=1))
    assert intersection_dim(a, b) == rank_intersection_dim(a.frame, b.frame)
    basis = intersection_basis(a, b)
    assert basis.shape[1] == intersection_dim(a, b)


def test_graph_lagrangian_zero_map(rng):
    sp = standard_space(4)
    plus = LagrangianFrame(sp, sp.ref)
    minus = lagrangian_from_span(sp, sp.J @ sp.ref)
    g = graph_lagrangian(plus, minus, np.zeros((2, 2)))
    assert gap_distance(g, plus) < 1e-12


def test_graph_lagrangian_line_in_plane():
    sp = standard_space(2)
    plus = LagrangianFrame(sp, sp.ref)
    minus = lagrangian_from_span(sp, sp.J @ sp.ref)
    a = 0.83
    g = graph_lagrangian(plus, minus, np.array([[a]]))
    v = g.frame[:, 0]
    assert abs(v[1] / v[0] - a) < 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_graph_lagrangian_random_symmetric(seed):
    rng = np.random.default_rng(seed)
    sp = standard_space(4)
    plus = LagrangianFrame(sp, sp.ref)
    minus = lagrangian_from_span(sp, sp.J @ sp.ref)
    T = rng.normal(size=(2, 2))
    T = 0.5 * (T + T.T)
    g = graph_lagrangian(plus, minus, T)
    assert np.abs(g.frame.T @ sp.J @ g.frame).max() < 1e-10


def test_graph_lagrangian_rejects_nonsymmetric(rng):
    sp = standard_space(4)
    plus = LagrangianFrame(sp, sp.ref)
    minus = lagrangian_from_span(sp, sp.J @ sp.ref)
    T = np.array([[0.0, 1.0], [-1.0, 0.0]])
    with pytest.raises(ValueError):
        graph_lagrangian(plus, minus, T)


def test_orthonormal_columns_deterministic_and_rejects_rank_deficient(rng):
    a = rng.normal(size=(6, 3))
    qone = orthonormal_columns(a)
    q2 = orthonormal_columns(a)
    assert np.array_equal(qone, q2)
    with pytest.raises(ValueError):
        orthonormal_columns(np.column_stack([a[:, 0], a[:, 0]]))


def test_transversal_connecting_path_sweep(rng):
    sp = standard_space(4)
    plus = LagrangianFrame(sp, sp.ref)
    minus = lagrangian_from_span(sp, sp.J @ sp.ref)
    T = rng.normal(size=(2, 2))
    T = 0.5 * (T + T.T)
    path = transversal_connecting_path(plus, minus, T)
    graph_T = graph_lagrangian(plus, minus, T)
    for t in np.linspace(0, 1, 17):
        f = path.at(float(t))
        assert intersection_dim(f, graph_T) == 0
        assert intersection_dim(f, plus) == 0
    assert gap_distance(path.at(0.0), minus) < 1e-10
    mirror = graph_lagrangian(minus, plus, -T)
    assert gap_distance(path.at(1.0), mirror) < 1e-10


def test_transversal_connecting_path_zero_map():
    sp = standard_space(4)
    plus = LagrangianFrame(sp, sp.ref)
    minus = lagrangian_from_span(sp, sp.J @ sp.ref)
    path = transversal_connecting_path(plus, minus, np.zeros((2, 2)))
    for t, f in path.samples:
        assert gap_distance(f, minus) < 1e-12
