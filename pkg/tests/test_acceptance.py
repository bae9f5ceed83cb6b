"""Acceptance suite.

Each test implements one acceptance criterion end to end, at the stated
tolerance, and prints a single pass/fail line (run with ``pytest -s`` to see
them as they complete).  All identity checks are exact integer equalities;
numerical tolerances appear only inside crossing detection and the
structural (non-integer) checks of criterion 8.
"""

import math
import time

import numpy as np
import pytest

from splitflow import formulas as F
from splitflow import modes as md
from splitflow import operators as op
from splitflow.families import (
    mirror_symmetric_family,
    ramp_family,
    random_loop_family,
    random_pwc_family,
)
from splitflow.symplectic import (
    LagrangianFrame,
    hormander_index,
    lagrangian_from_span,
    maslov_crossing,
    maslov_unitary,
    random_lagrangian,
    random_path,
    standard_space,
)

N_FAMILIES = 50
FAMILY_SEEDS = list(range(1000, 1000 + N_FAMILIES))


def _line(name: str, ok: bool, started: float, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    extra = f" [{detail}]" if detail else ""
    print(f"[{status}] {name}{extra} ({time.time() - started:.1f}s)")
    assert ok, f"{name}{extra}"


def test_criterion_1_splitting_formula():
    started = time.time()
    failures = []
    ramp = F.verify_splitting(ramp_family())
    if ramp.sf_total != 2 or ramp.residual != 0:
        failures.append(("ramp", ramp.sf_total, ramp.residual))
    for seed in FAMILY_SEEDS:
        rep = F.verify_splitting(random_pwc_family(seed))
        if rep.residual != 0:
            failures.append((seed, rep.sf_total, rep.residual))
    _line(
        "criterion 1: splitting formula on 50 seeded families + closed-form ramp",
        not failures,
        started,
        f"failures={failures}" if failures else f"{N_FAMILIES}+1 instances, residual 0",
    )


def test_criterion_2_aps_splitting_with_corrections():
    started = time.time()
    failures = []
    nonzero_corrections = 0
    for seed in FAMILY_SEEDS:
        rep = F.verify_aps_splitting(random_pwc_family(seed))
        if rep.residual != 0:
            failures.append((seed, rep.residual))
        nonzero_corrections += int(rep.hormander_minus != 0 or rep.hormander_plus != 0)
    loops_ok = True
    for seed in range(8):
        rep = F.verify_aps_splitting(random_loop_family(seed))
        if rep.residual != 0 or rep.hormander_minus != 0 or rep.hormander_plus != 0:
            loops_ok = False
            failures.append(("loop", seed, rep.residual))
    ok = not failures and loops_ok and nonzero_corrections > 0
    _line(
        "criterion 2: spectral-boundary splitting with index corrections",
        ok,
        started,
        f"{N_FAMILIES} instances + 8 loops; {nonzero_corrections} with nonzero corrections",
    )


def test_criterion_3_spectral_flow_equals_maslov():
    started = time.time()
    failures = []
    for seed in FAMILY_SEEDS:
        fam = random_pwc_family(seed)
        cases = (
            ("minus", op.domain_lagrangian_D0(fam)),
            ("minus", op.aps_boundary_lagrangian(fam, 0)),
            ("plus", op.domain_lagrangian_D1(fam)),
            ("plus", op.aps_boundary_lagrangian(fam, 1)),
        )
        for arc, bnd in cases:
            try:
                F.maslov_form_of_sf(fam, arc, bnd)
            except Exception as exc:  # mismatch or diagnostic
                failures.append((seed, arc, str(exc)))
    _line(
        "criterion 3: arc spectral flow equals the boundary Maslov index",
        not failures,
        started,
        f"{N_FAMILIES} instances x 2 sides x 2 boundary types"
        + (f"; failures={failures[:3]}" if failures else ""),
    )


def test_criterion_4_maslov_algorithms_agree():
    started = time.time()
    failures = []
    n_paths, n_loops = 100, 25
    for i in range(n_paths + n_loops):
        loop = i >= n_paths
        rng = np.random.default_rng(np.random.PCG64([5000 + i]))
        space = standard_space(2 * (1 + i % 4))
        path = random_path(space, rng, loop=loop)
        ref = random_lagrangian(space, rng)
        a = maslov_crossing(path, ref).value
        b = maslov_unitary(path, ref).value
        if a != b:
            failures.append((i, a, b))
    _line(
        "criterion 4: crossing-form and unitary-winding Maslov agree",
        not failures,
        started,
        f"{n_paths} paths + {n_loops} loops, dims 2-8"
        + (f"; failures={failures}" if failures else ""),
    )


def test_criterion_5_reduction_preserves_maslov():
    started = time.time()
    failures = []
    spec = md.circle_spectrum(64)
    setup = md.reduction_setup(spec)
    for i in range(100):
        rng = np.random.default_rng(np.random.PCG64([7000 + i]))
        path = md.block_rotation_path(spec, rng, n_active=3, max_turns=1, max_mode=6)
        before, after = md.split_and_reduce(setup, path)
        if before.value != after.value:
            failures.append((i, before.value, after.value))
    _line(
        "criterion 5: Maslov index survives the weighted reduction (K=64)",
        not failures,
        started,
        "100 block paths" + (f"; failures={failures}" if failures else ""),
    )


def test_criterion_6_projector_difference_stabilizes():
    started = time.time()

    def pair_at(K):
        spec = md.circle_spectrum(K)
        P = md.aps_projector(md.TraceSpace(spec, "minus"))
        Q = md.mode_cauchy_lagrangian(spec).projector()
        return P, Q

    report = md.projection_difference_report(pair_at, sweep=(16, 32, 64, 128))
    stab = md.stabilization_table(report, j_max=8)
    ranks_ok = True
    for K in (16, 32, 64, 128):
        spec = md.circle_spectrum(K)
        setup = md.reduction_setup(spec)
        setup = md.ReductionSetup(setup.big, setup.small, setup.diag, (1, 2))
        P = md.aps_projector(md.TraceSpace(spec, "minus"))
        Q = md.swapped_plane_projector(setup, role="plus")
        s = np.linalg.svd(P - Q, compute_uv=False)
        ranks_ok &= int(np.sum(s > 1e-10)) == 4
    ok = stab["max_relative_change"] < 0.05 and stab["counts_constant"] and ranks_ok
    _line(
        "criterion 6: projector-difference decay stabilizes across the sweep",
        ok,
        started,
        f"max rel change {stab['max_relative_change']:.2e}, "
        f"counts {stab['counts_above_half']}, rank bound exact={ranks_ok}",
    )


def _forced_defect(sp, rng, defect_modes):
    n = sp.half
    rest = [k for k in range(n) if k not in defect_modes]
    m = len(rest)
    T = rng.normal(size=(m, m))
    T = 0.5 * (T + T.T)
    cols = np.zeros((2 * n, n))
    for j, k in enumerate(defect_modes):
        cols[n + k, j] = 1.0
    for j, k in enumerate(rest):
        cols[k, len(defect_modes) + j] = 1.0
        for i, ki in enumerate(rest):
            cols[n + ki, len(defect_modes) + j] = T[i, j]
    return lagrangian_from_span(sp, cols)


def test_criterion_7_asymmetry_vanishing_and_skew():
    started = time.time()
    failures = []
    for seed in range(5):
        rep = F.asymmetry_report(mirror_symmetric_family(seed))
        if rep["symmetry_defect"] > 5e-8 or rep["value"] != 0:
            failures.append(("mirror", seed, rep["value"]))
    for i in range(100):
        rng = np.random.default_rng(np.random.PCG64([9000 + i]))
        dim = 4 + 2 * (i % 3)
        sp = standard_space(dim)
        plus = LagrangianFrame(sp, sp.ref)
        if i % 4 == 0:
            nu = _forced_defect(sp, rng, tuple(range(1 + i % 2)))
            trace = F.vanishing_certificate(plus, nu_plus=nu)
        else:
            T = rng.normal(size=(dim // 2, dim // 2))
            T = 0.5 * (T + T.T)
            trace = F.vanishing_certificate(plus, T=T)
        if trace["sigma_h"] != 0 or trace["direct_value"] != 0:
            failures.append(("certificate", i, trace["sigma_h"]))
    for i in range(100):
        rng = np.random.default_rng(np.random.PCG64([11000 + i]))
        sp = standard_space(2 * (1 + i % 3))
        n0, n1, lam, mu = (random_lagrangian(sp, rng) for _ in range(4))
        h = hormander_index(n0, n1, lam, mu)
        if hormander_index(lam, mu, n0, n1) != -h or hormander_index(n0, n1, mu, lam) != -h:
            failures.append(("skew", i))
    _line(
        "criterion 7: symmetric instances have zero asymmetry; index is skew",
        not failures,
        started,
        "5 mirror families, 100 certificates, 100 quadruples"
        + (f"; failures={failures[:3]}" if failures else ""),
    )


def test_criterion_8_structural_invariants():
    started = time.time()
    failures = []
    rng = np.random.default_rng(2024)
    bd = op.boundary_data()
    for seed in FAMILY_SEEDS[:10]:
        fam = random_pwc_family(seed)
        for arc in ("minus", "plus"):
            lam1, lam2 = rng.uniform(-1.0, 1.0, size=2)
            resid = op.green_form_residual(fam, arc, float(rng.uniform(0, 1)), lam1, lam2)
            if resid > 1e-8:
                failures.append(("green", seed, arc, resid))
    for seed in FAMILY_SEEDS[:10]:
        fam = random_pwc_family(seed)
        for _ in range(4):
            arc = "minus" if rng.uniform() < 0.5 else "plus"
            fr = op.cauchy_data_space(fam, arc, float(rng.uniform(0, 1)), float(rng.uniform(-2, 2)))
            if np.abs(fr.frame.T @ bd.minus.J @ fr.frame).max() > 1e-10:
                failures.append(("lagrangian", seed, arc))
    for seed in FAMILY_SEEDS:
        fam = random_pwc_family(seed)
        for arc in ("minus", "plus"):
            out = op.unique_continuation_check(fam, arc, 0.5)
            if out["min_singular"] <= 1e-8:
                failures.append(("uc", seed, arc))
    _line(
        "criterion 8: Green form, Lagrangian traces, unique continuation",
        not failures,
        started,
        "10 quadrature pairs, 40 trace checks, 100 continuation guards"
        + (f"; failures={failures[:3]}" if failures else ""),
    )
