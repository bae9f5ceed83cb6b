"""End-to-end verification of the splitting identities.

Every identity here is asserted as an exact integer equation; tolerances
live only inside crossing detection.  The verifications are

* the additivity of spectral flow across the cut, with the natural
  transmission boundary conditions on the two arcs,
* its spectral-boundary-condition variant, where the mismatch between the
  transmission domains and the spectral domains is paid for by two
  Hormander indices computed in the boundary symplectic space,
* the equality of arc spectral flow with the Maslov index of the moving
  Cauchy data space against the fixed boundary condition,
* the asymmetry index of the solution spaces of a single operator, and its
  vanishing certificate in the presence of the rotation symmetry, via an
  explicitly transversal connecting path (with the orthogonal splitting
  into the defect part and a graph part when the transversal position
  fails).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import conventions as conv
from .errors import DiagnosticError, MaslovError
from .families import OperatorFamily, SIGMA
from .operators import (
    aps_boundary_lagrangian,
    boundary_data,
    cauchy_frame,
    cauchy_path,
    domain_lagrangian_D0,
    domain_lagrangian_D1,
    spectral_flow_arc,
    spectral_flow_circle,
    unique_continuation_check,
)
from .symplectic import (
    LagrangianFrame,
    SymplecticSpace,
    gap_distance,
    graph_lagrangian,
    hormander_index,
    intersection_basis,
    intersection_dim,
    lagrangian_from_span,
    maslov_unitary,
    orthonormal_columns,
    transversal_connecting_path,
)

__all__ = [
    "SplittingReport",
    "verify_splitting",
    "verify_aps_splitting",
    "maslov_form_of_sf",
    "asymmetry_index",
    "asymmetry_report",
    "vanishing_certificate",
]


@dataclass
class SplittingReport:
    """Integer terms of a splitting identity and their crossing logs."""

    family: str
    sf_total: int = 0
    sf_minus: int = 0
    sf_plus: int = 0
    maslov_minus: int = 0
    maslov_plus: int = 0
    hormander_minus: int = 0
    hormander_plus: int = 0
    residual: int = 0
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "sf_total": self.sf_total,
            "sf_minus": self.sf_minus,
            "sf_plus": self.sf_plus,
            "maslov_minus": self.maslov_minus,
            "maslov_plus": self.maslov_plus,
            "hormander_minus": self.hormander_minus,
            "hormander_plus": self.hormander_plus,
            "residual": self.residual,
            "provenance": self.provenance,
        }


def _guard_family(fam: OperatorFamily):
    for arc in ("minus", "plus"):
        unique_continuation_check(fam, arc, 0.0)
        unique_continuation_check(fam, arc, 1.0)


def verify_splitting(
    fam: OperatorFamily,
    convention: str = conv.DEFAULT_CONVENTION,
    guard: bool = False,
) -> SplittingReport:
    """Spectral flow of the closed circle against the sum over the two arcs.

    The minus arc carries the boundary condition spanned by the traces of
    the t = 0 solutions on the plus arc, and vice versa with t = 1; the
    residual of the identity is reported (zero on passing runs).
    """
    _guard_family(fam)
    total = spectral_flow_circle(fam, convention, guard=guard)
    d0 = domain_lagrangian_D0(fam)
    d1 = domain_lagrangian_D1(fam)
    minus = spectral_flow_arc(fam, "minus", d0, convention, guard=guard)
    plus = spectral_flow_arc(fam, "plus", d1, convention, guard=guard)
    rep = SplittingReport(
        family=fam.name,
        sf_total=total.value,
        sf_minus=minus.value,
        sf_plus=plus.value,
        residual=total.value - minus.value - plus.value,
        provenance={
            "identity": "sf_total = sf_minus + sf_plus",
            "convention": convention,
            "sf_total": total.to_dict(),
            "sf_minus": minus.to_dict(),
            "sf_plus": plus.to_dict(),
        },
    )
    return rep


def verify_aps_splitting(
    fam: OperatorFamily,
    convention: str = conv.DEFAULT_CONVENTION,
    guard: bool = False,
) -> SplittingReport:
    """Splitting against spectral boundary conditions with index corrections.

    The two correction terms compare, at the endpoints of the deformation,
    the transmission domains with the spectral domains through the
    Hormander index of the four boundary Lagrangians; for loop families
    both corrections vanish.
    """
    _guard_family(fam)
    bd = boundary_data()
    total = spectral_flow_circle(fam, convention, guard=guard)
    aps0 = aps_boundary_lagrangian(fam, 0)
    aps1 = aps_boundary_lagrangian(fam, 1)
    s0 = spectral_flow_arc(fam, "minus", aps0, convention, guard=guard)
    s1 = spectral_flow_arc(fam, "plus", aps1, convention, guard=guard)
    km0 = cauchy_frame(fam, "minus", 0.0, 0.0)
    km1 = cauchy_frame(fam, "minus", 1.0, 0.0)
    kp0 = cauchy_frame(fam, "plus", 0.0, 0.0).in_space(bd.plus)
    kp1 = cauchy_frame(fam, "plus", 1.0, 0.0).in_space(bd.plus)
    d0 = domain_lagrangian_D0(fam)
    d1 = domain_lagrangian_D1(fam)
    h_minus = hormander_index(km0, km1, d0, aps0.in_space(bd.minus), convention)
    h_plus = hormander_index(kp0, kp1, d1.in_space(bd.plus), aps1.in_space(bd.plus), convention)
    residual = total.value - s0.value - s1.value - h_minus - h_plus
    return SplittingReport(
        family=fam.name,
        sf_total=total.value,
        sf_minus=s0.value,
        sf_plus=s1.value,
        hormander_minus=h_minus,
        hormander_plus=h_plus,
        residual=residual,
        provenance={
            "identity": "sf_total = sf_aps0 + sf_aps1 + hormander_minus + hormander_plus",
            "convention": convention,
            "sf_total": total.to_dict(),
            "sf_aps0": s0.to_dict(),
            "sf_aps1": s1.to_dict(),
        },
    )


def maslov_form_of_sf(
    fam: OperatorFamily,
    arc: str,
    boundary: LagrangianFrame,
    convention: str = conv.DEFAULT_CONVENTION,
) -> tuple[int, int]:
    """Arc spectral flow and the Maslov index of the Cauchy data path.

    The two integers must agree; a mismatch raises a diagnostic (it would
    mean the two independently implemented counts disagree).
    """
    sf = spectral_flow_arc(fam, arc, boundary, convention)
    path = cauchy_path(fam, arc)
    mas = maslov_unitary(path, boundary.in_space(path.space), convention)
    if sf.value != mas.value:
        raise DiagnosticError(
            f"spectral flow {sf.value} differs from Maslov index {mas.value} "
            f"on arc {arc} of {fam.name}"
        )
    return sf.value, mas.value


# ---------------------------------------------------------------------------
# asymmetry of the solution spaces and its vanishing certificate


def _l2_polarization(fam: OperatorFamily) -> tuple[LagrangianFrame, LagrangianFrame]:
    """The mode polarization of the boundary space from the t = 0 collar."""
    bd = boundary_data()
    if not fam.product_form:
        raise DiagnosticError("family has no collar structure; polarization undefined")
    b = fam.b0
    if b == 0.0:
        v = fam.zero_mode_plus / np.linalg.norm(fam.zero_mode_plus)
    else:
        v = np.array([1.0, 0.0]) if b > 0 else np.array([0.0, 1.0])
    plus = np.zeros((4, 2))
    plus[:2, 0] = v
    plus[2:, 1] = v
    l_plus = LagrangianFrame(bd.minus, plus)
    l_minus = lagrangian_from_span(bd.minus, bd.minus.J @ plus)
    return l_plus, l_minus


def asymmetry_report(fam: OperatorFamily, t: float = 0.0) -> dict:
    """Asymmetry index of the solution spaces across the cut, with guards.

    The index is the Hormander index of the two Cauchy data spaces against
    the mode polarization; it measures how far the two sides' solution
    spaces are from being rotation images of each other.  The report logs
    the Fredholm-position data (intersection dimensions, trivially finite
    here) and the symmetry defect.
    """
    bd = boundary_data()
    l_plus, l_minus = _l2_polarization(fam)
    nu_plus = cauchy_frame(fam, "plus", t, 0.0).in_space(bd.minus)
    nu_minus = cauchy_frame(fam, "minus", t, 0.0)
    pairs = {
        "nu_plus_vs_l_minus": intersection_dim(nu_plus, l_minus),
        "nu_minus_vs_l_plus": intersection_dim(nu_minus, l_plus),
        "nu_plus_vs_l_plus": intersection_dim(nu_plus, l_plus),
    }
    defect = gap_distance(
        lagrangian_from_span(bd.minus, bd.minus.J @ nu_plus.frame), nu_minus
    )
    value = hormander_index(nu_plus, l_plus, nu_minus, l_minus,
                            endpoint_weights="symmetric")
    alt = hormander_index(nu_plus, l_plus, nu_minus, l_minus,
                          path=_second_path(nu_plus, l_plus),
                          endpoint_weights="symmetric")
    if alt != value:
        raise DiagnosticError("asymmetry index depends on the connecting path")
    return {
        "family": fam.name,
        "t": t,
        "value": value,
        "position_dims": pairs,
        "symmetry_defect": defect,
    }


def _second_path(nu0, nu1):
    from .symplectic import connecting_path

    shift = np.zeros(nu0.space.half)
    shift[0] = 1.0
    return connecting_path(nu0, nu1, branch_shift=shift)


def asymmetry_index(fam: OperatorFamily, t: float = 0.0) -> int:
    return asymmetry_report(fam, t)["value"]


def _subspace_frame(space: SymplecticSpace, basis: np.ndarray) -> SymplecticSpace:
    J_sub = basis.T @ space.J @ basis
    return SymplecticSpace(J_sub)


def _restrict(space_sub: SymplecticSpace, basis: np.ndarray, vectors: np.ndarray) -> LagrangianFrame:
    return lagrangian_from_span(space_sub, basis.T @ vectors)


def vanishing_certificate(
    plus: LagrangianFrame,
    nu_plus: LagrangianFrame | None = None,
    T: np.ndarray | None = None,
) -> dict:
    """Certify that the asymmetry of a rotation-symmetric pair vanishes.

    ``plus`` spans one half of the polarization; the other half is its image
    under the complex structure.  The symmetric pair is (nu_plus, J nu_plus).
    In the transversal position nu_plus is the graph of a map from the plus
    half whose mirror path stays transversal to both nu_plus and the plus
    half, so both Maslov counts along it vanish identically; otherwise the
    defect part (the intersection with the minus half) is split off
    orthogonally, vanishes by the skew symmetry of the index, and the
    remainder is certified in the complementary symplectic subspace.

    A transversality failure along the mirror path is reported as an error:
    it means the symmetry hypothesis does not hold for the input.
    """
    space = plus.space
    minus = lagrangian_from_span(space, space.J @ plus.frame)
    if (nu_plus is None) == (T is None):
        raise ValueError("provide exactly one of nu_plus or T")
    if nu_plus is None:
        T = np.atleast_2d(np.asarray(T, dtype=float))
        nu_plus = graph_lagrangian(plus, minus, T)
    nu_minus = lagrangian_from_span(space, space.J @ nu_plus.frame)

    trace: dict = {"dim": space.dim}
    ell0_dim = intersection_dim(nu_plus, minus)
    trace["ell0_dim"] = ell0_dim

    if ell0_dim == 0:
        T_mat = _graph_coordinates(plus, minus, nu_plus)
        path = transversal_connecting_path(plus, minus, T_mat)
        mas_nu = maslov_unitary(path, nu_plus)
        mas_plus = maslov_unitary(path, plus)
        if mas_nu.crossings or mas_plus.crossings:
            raise MaslovError("mirror path met a reference despite transversality")
        trace.update(
            branch="transversal",
            path_samples=len(path.samples),
            maslov_vs_nu=mas_nu.value,
            maslov_vs_plus=mas_plus.value,
            sigma_h=0,
        )
    else:
        basis0, basis1, pieces = _defect_split(space, plus, minus, nu_plus)
        sub0 = _subspace_frame(space, basis0)
        sub1 = _subspace_frame(space, basis1)
        ell0_sub = _restrict(sub0, basis0, pieces["ell0"])
        jell0_sub = _restrict(sub0, basis0, pieces["j_ell0"])
        h0 = hormander_index(jell0_sub, ell0_sub, ell0_sub, jell0_sub,
                             endpoint_weights="symmetric")
        sub_plus = _restrict(sub1, basis1, pieces["ell_plus"])
        sub_nu = _restrict(sub1, basis1, pieces["nu"])
        inner = vanishing_certificate(sub_plus, nu_plus=sub_nu)
        trace.update(
            branch="defect-split",
            defect_term=h0,
            regular_term=inner["sigma_h"],
            inner=inner,
            sigma_h=h0 + inner["sigma_h"],
        )
        if h0 != 0:
            raise DiagnosticError("defect part of the index failed to vanish")

    direct = hormander_index(nu_plus, plus, nu_minus, minus,
                             endpoint_weights="symmetric")
    swapped = hormander_index(nu_minus, minus, nu_plus, plus,
                              endpoint_weights="symmetric")
    trace["direct_value"] = direct
    trace["pair_swap_value"] = swapped
    if direct != trace["sigma_h"] or swapped != -direct:
        raise DiagnosticError("certificate disagrees with the direct index")
    return trace


def _graph_coordinates(plus, minus, nu):
    X = plus.frame.T @ nu.frame
    Y = minus.frame.T @ nu.frame
    return Y @ np.linalg.inv(X)


def _defect_split(space, plus, minus, nu_plus):
    """Orthogonal pieces of the defect decomposition.

    ell0 = nu_plus ∩ minus; the symplectic subspace spanned by ell0 and its
    J-image is split off, and all four Lagrangians decompose accordingly.
    """
    ell0 = intersection_basis(nu_plus, minus)
    j_ell0 = space.J @ ell0
    basis0 = orthonormal_columns(np.concatenate([ell0, j_ell0], axis=1))
    # orthogonal complement
    full = np.eye(space.dim)
    proj = full - basis0 @ basis0.T
    u, s, _ = np.linalg.svd(proj @ full)
    basis1 = u[:, : space.dim - basis0.shape[1]]
    ell_plus = _complement_in(plus.frame, j_ell0)
    nu = _complement_in(nu_plus.frame, ell0)
    return basis0, basis1, {
        "ell0": ell0,
        "j_ell0": j_ell0,
        "ell_plus": ell_plus,
        "nu": nu,
    }


def _complement_in(frame: np.ndarray, part: np.ndarray) -> np.ndarray:
    """Orthogonal complement of ``part`` inside the span of ``frame``."""
    resid = frame - part @ (part.T @ frame)
    u, s, _ = np.linalg.svd(resid, full_matrices=False)
    keep = s > 1e-9
    return u[:, keep]
