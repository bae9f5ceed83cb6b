import numpy as np
import pytest

from splitflow.errors import DiagnosticError, MaslovError
from splitflow import formulas as F
from splitflow import operators as op
from splitflow.families import (
    constant_family,
    mirror_symmetric_family,
    ramp_family,
    random_loop_family,
    random_pwc_family,
    random_smooth_family,
    reflection_even_family,
)
from splitflow.symplectic import (
    LagrangianFrame,
    graph_lagrangian,
    lagrangian_from_span,
    standard_space,
)


def test_splitting_constant_family():
    rep = F.verify_splitting(constant_family())
    assert (rep.sf_total, rep.sf_minus, rep.sf_plus, rep.residual) == (0, 0, 0, 0)


def test_splitting_ramp_with_closed_form_left_side():
    rep = F.verify_splitting(ramp_family())
    assert rep.sf_total == 2  # closed-form monodromy value
    assert rep.residual == 0
    assert rep.sf_minus == 2 and rep.sf_plus == 0


@pytest.mark.parametrize("seed", range(5))
def test_splitting_random_pwc(seed):
    rep = F.verify_splitting(random_pwc_family(30 + seed))
    assert rep.residual == 0


def test_splitting_smooth_family():
    rep = F.verify_splitting(random_smooth_family(4))
    assert rep.residual == 0


@pytest.mark.parametrize("seed", range(4))
def test_aps_splitting_random(seed):
    rep = F.verify_aps_splitting(random_pwc_family(60 + seed))
    assert rep.residual == 0


def test_aps_splitting_sees_nonzero_corrections():
    seen = False
    for seed in range(6):
        rep = F.verify_aps_splitting(random_pwc_family(seed))
        assert rep.residual == 0
        seen |= rep.hormander_minus != 0 or rep.hormander_plus != 0
    assert seen


@pytest.mark.parametrize("seed", range(3))
def test_aps_splitting_loops_have_zero_corrections(seed):
    rep = F.verify_aps_splitting(random_loop_family(seed))
    assert rep.residual == 0
    assert rep.hormander_minus == 0 and rep.hormander_plus == 0


def test_aps_splitting_constant_trivial():
    rep = F.verify_aps_splitting(constant_family())
    assert rep.residual == 0
    assert rep.hormander_minus == rep.hormander_plus == 0


def test_maslov_form_of_sf_cases():
    fam = constant_family()
    assert F.maslov_form_of_sf(fam, "minus", op.domain_lagrangian_D0(fam)) == (0, 0)
    fam = random_pwc_family(1)
    for arc, which, dom in (
        ("minus", 0, op.domain_lagrangian_D0),
        ("plus", 1, op.domain_lagrangian_D1),
    ):
        for bnd in (dom(fam), op.aps_boundary_lagrangian(fam, which)):
            sf, mas = F.maslov_form_of_sf(fam, arc, bnd)
            assert sf == mas


def test_maslov_form_of_sf_reversal_negates():
    fam = random_pwc_family(5)
    bnd = op.aps_boundary_lagrangian(fam, 0)
    sf, _ = F.maslov_form_of_sf(fam, "minus", bnd)
    rsf, rmas = F.maslov_form_of_sf(fam.time_reversed(), "minus", bnd)
    assert rsf == rmas == -sf


# -- asymmetry and vanishing --------------------------------------------------


def test_asymmetry_vanishes_for_mirror_families():
    for seed in range(3):
        rep = F.asymmetry_report(mirror_symmetric_family(seed))
        assert rep["symmetry_defect"] < 5e-8
        assert rep["value"] == 0


def test_asymmetry_generic_family_is_path_stable():
    rep = F.asymmetry_report(random_pwc_family(13))
    assert isinstance(rep["value"], int)  # path independence checked inside


def test_asymmetry_degenerate_zero_mode_case():
    # vanishing collar parameter, constant potential: the solution spaces
    # meet the polarization (the defect data is logged) and the index is 0
    rep = F.asymmetry_report(constant_family(0.0))
    assert rep["value"] == 0
    assert rep["position_dims"]["nu_plus_vs_l_minus"] >= 1


def test_asymmetry_reflection_even_family():
    rep = F.asymmetry_report(reflection_even_family(1))
    assert isinstance(rep["value"], int)


def test_vanishing_certificate_trivial_map():
    sp = standard_space(4)
    plus = LagrangianFrame(sp, sp.ref)
    tr = F.vanishing_certificate(plus, T=np.zeros((2, 2)))
    assert tr["sigma_h"] == 0 and tr["branch"] == "transversal"


@pytest.mark.parametrize("dim,seed", [(4, 0), (4, 1), (6, 2), (6, 3), (8, 4)])
def test_vanishing_certificate_random_graphs(dim, seed):
    rng = np.random.default_rng(seed)
    sp = standard_space(dim)
    plus = LagrangianFrame(sp, sp.ref)
    T = rng.normal(size=(dim // 2, dim // 2))
    T = 0.5 * (T + T.T)
    tr = F.vanishing_certificate(plus, T=T)
    assert tr["sigma_h"] == 0
    assert tr["direct_value"] == 0
    assert tr["pair_swap_value"] == 0


def forced_defect_instance(sp, rng, defect_modes):
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


@pytest.mark.parametrize("dim,defects", [(6, (0,)), (8, (1, 3))])
def test_vanishing_certificate_forced_defect(dim, defects):
    rng = np.random.default_rng(dim)
    sp = standard_space(dim)
    plus = LagrangianFrame(sp, sp.ref)
    nu = forced_defect_instance(sp, rng, defects)
    tr = F.vanishing_certificate(plus, nu_plus=nu)
    assert tr["branch"] == "defect-split"
    assert tr["ell0_dim"] == len(defects)
    assert tr["sigma_h"] == 0 and tr["direct_value"] == 0


def test_vanishing_certificate_input_validation():
    sp = standard_space(4)
    plus = LagrangianFrame(sp, sp.ref)
    with pytest.raises(ValueError):
        F.vanishing_certificate(plus)
    with pytest.raises(ValueError):
        F.vanishing_certificate(plus, T=np.zeros((2, 2)), nu_plus=plus)
