import math

import numpy as np
import pytest

from splitflow.symplectic import (
    LagrangianPath,
    lagrangian_from_span,
    maslov_crossing,
    maslov_unitary,
    random_lagrangian,
    random_path,
    standard_space,
)

from _oracles import grid_winding_maslov


def line(space, angle):
    return lagrangian_from_span(
        space, np.array([[math.cos(angle)], [math.sin(angle)]])
    )


@pytest.fixture(scope="module")
def plane():
    return standard_space(2)


def rotation_path(space, start=0.0, sweep=math.pi):
    return LagrangianPath.from_evaluator(
        space, lambda t: line(space, start + sweep * t), nsamples=9
    )


def test_rotation_path_pinned_by_grid_oracle(plane):
    path = rotation_path(plane)
    ref = line(plane, 0.0)
    oracle = grid_winding_maslov(plane, lambda t: line(plane, math.pi * t), ref)
    assert oracle == 1  # frozen: magnitude one, sign from the lcro convention
    assert maslov_crossing(path, ref).value == oracle
    assert maslov_unitary(path, ref).value == oracle


def test_constant_path_is_zero(plane):
    for ref_angle in (0.3, 0.7):
        cst = LagrangianPath.from_evaluator(plane, lambda t: line(plane, 0.3), nsamples=5)
        ref = line(plane, ref_angle)
        assert maslov_crossing(cst, ref).value == 0
        assert maslov_unitary(cst, ref).value == 0


def test_index_report_crossing_log(plane):
    path = rotation_path(plane)
    rep = maslov_crossing(path, line(plane, 0.4))
    assert rep.value == sum(c[2] for c in rep.crossings)
    assert all(0.0 <= t <= 1.0 for t, _, _ in rep.crossings)


@pytest.mark.parametrize("seed", range(12))
def test_cross_algorithm_equality(seed):
    rng = np.random.default_rng(seed)
    sp = standard_space(2 * (1 + seed % 4))
    path = random_path(sp, rng, loop=(seed % 3 == 0))
    ref = random_lagrangian(sp, rng)
    a = maslov_crossing(path, ref).value
    b = maslov_unitary(path, ref).value
    assert a == b


@pytest.mark.parametrize("seed", [0, 5])
def test_matches_grid_oracle_low_dim(seed):
    rng = np.random.default_rng(seed)
    sp = standard_space(4)
    path = random_path(sp, rng)
    ref = random_lagrangian(sp, rng)
    oracle = grid_winding_maslov(sp, path.evaluator, ref)
    assert maslov_unitary(path, ref).value == oracle


def test_concatenation_additivity(rng):
    sp = standard_space(4)
    p1 = random_path(sp, rng)
    mid = p1.at(1.0)
    q = np.linalg.qr(rng.normal(size=(2, 2)))[0]
    rates = rng.uniform(-2.5, 2.5, size=2)
    Z0 = sp.unitary_of(mid.frame)

    def ev(t):
        Zt = Z0 @ (q * np.exp(1j * rates * t)) @ q.T
        return lagrangian_from_span(sp, sp.frame_of(Zt))

    p2 = LagrangianPath.from_evaluator(sp, ev, nsamples=9)
    ref = random_lagrangian(sp, rng)
    cat = p1.concatenated(p2)
    assert (
        maslov_unitary(cat, ref).value
        == maslov_unitary(p1, ref).value + maslov_unitary(p2, ref).value
    )


def test_reversal_antisymmetry_and_roundtrip(rng):
    sp = standard_space(4)
    path = random_path(sp, rng)
    ref = random_lagrangian(sp, rng)
    v = maslov_unitary(path, ref).value
    assert maslov_unitary(path.reversed(), ref).value == -v
    loop = path.concatenated(path.reversed())
    assert maslov_unitary(loop, ref).value == 0
    assert maslov_crossing(loop, ref).value == 0


def test_homotopy_invariance_under_resampling(plane):
    # same smooth path, quadratic versus uniform sampling of the parameter
    ref = line(plane, 0.0)
    angle = lambda t: 0.15 + math.pi * t**2
    coarse = LagrangianPath.from_evaluator(
        plane, lambda t: line(plane, angle(t)), nsamples=7
    )
    frames = [line(plane, angle(t)) for t in np.linspace(0, 1, 41)]
    dense = LagrangianPath.from_frames(plane, frames)
    assert maslov_unitary(coarse, ref).value == maslov_unitary(dense, ref).value
    assert maslov_crossing(coarse, ref).value == maslov_crossing(dense, ref).value


def test_tangential_endpoint_crossing_is_diagnosed(plane):
    # a path starting on the cycle with zero angular velocity has a
    # singular crossing form; the crossing-form algorithm must say so
    # rather than guess, while the winding count remains well defined
    from splitflow.errors import MaslovError

    path = LagrangianPath.from_evaluator(
        plane, lambda t: line(plane, math.pi * t**2), nsamples=7
    )
    ref = line(plane, 0.0)
    assert maslov_unitary(path, ref).value == 1
    with pytest.raises(MaslovError):
        maslov_crossing(path, ref)


def test_loops_agree_between_algorithms():
    for seed in range(6):
        rng = np.random.default_rng(100 + seed)
        sp = standard_space(2 * (1 + seed % 3))
        path = random_path(sp, rng, loop=True)
        ref = random_lagrangian(sp, rng)
        assert maslov_crossing(path, ref).value == maslov_unitary(path, ref).value


def test_mirrored_convention(plane):
    path = rotation_path(plane)
    ref = line(plane, 0.0)
    lcro = maslov_unitary(path, ref, "lcro").value
    rclo = maslov_unitary(path, ref, "rclo").value
    assert rclo == -maslov_unitary(path.reversed(), ref, "lcro").value
    # interior crossings agree between conventions
    shifted = rotation_path(plane, start=0.2)
    assert (
        maslov_unitary(shifted, line(plane, 0.5), "lcro").value
        == maslov_unitary(shifted, line(plane, 0.5), "rclo").value
    )
    with pytest.raises(ValueError):
        maslov_unitary(path, ref, "bogus")


def test_path_invariants_enforced(plane):
    with pytest.raises(ValueError):
        LagrangianPath(plane, [(0.0, line(plane, 0.1)), (0.9, line(plane, 0.2))])
    path = rotation_path(plane)
    gaps = [
        np.linalg.svd(
            f1.frame - f0.frame @ (f0.frame.T @ f1.frame), compute_uv=False
        ).max()
        for (_, f0), (_, f1) in zip(path.samples, path.samples[1:])
    ]
    assert max(gaps) < 0.5
