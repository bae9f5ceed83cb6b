"""Boundary symplectics and spectral analysis of the cut circle model.

Boundary data of a section are pairs ``(f(0), f(pi))`` in R^4.  The Green
form of the minus arc ``[0, pi]`` is

    omega((x0, xp), (y0, yp)) = <sigma xp, yp> - <sigma x0, yp>,

realized by the complex structure ``J = diag(-sigma, sigma)``; the plus arc
carries the negated form.  Cauchy data spaces (boundary traces of all
solutions of the system on one arc) are Lagrangian for either sign because
the transfer flow is area preserving.

Eigenvalues of the selfadjoint realization on an arc with a Lagrangian
boundary condition are the spectral parameters at which the Cauchy data
space meets the boundary condition; they are located through the winding of
the relative unitary's eigenvalues, which moves monotonically in the
spectral parameter, so multiple eigenvalues are found reliably.  Spectral
flow is computed by counting eigenvalues in per-step windows chosen inside
spectral gaps, plus kernel corrections at the endpoints implementing the
package-wide endpoint convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import conventions as conv
from .errors import RejectedInstance, SolverError, TrackingError
from .families import ARCS, PI, SIGMA, TANGENTIAL, OperatorFamily
from .symplectic import (
    IndexReport,
    LagrangianFrame,
    LagrangianPath,
    SymplecticSpace,
    intersection_dim,
    lagrangian_from_span,
)

__all__ = [
    "BoundaryData",
    "boundary_data",
    "TransferSolution",
    "transfer_solution",
    "cauchy_frame",
    "cauchy_data_space",
    "cauchy_path",
    "domain_lagrangian_D0",
    "domain_lagrangian_D1",
    "aps_boundary_lagrangian",
    "eigenvalues_on_arc",
    "spectral_flow_arc",
    "spectral_flow_circle",
    "green_form_residual",
    "unique_continuation_check",
    "trace_map_min_singular",
]

_J_BOUNDARY = np.block([
    [-SIGMA, np.zeros((2, 2))],
    [np.zeros((2, 2)), SIGMA],
])
# reference Lagrangian for the boundary space: span{(e2, 0), (0, e1)}
_REF_BOUNDARY = np.array([
    [0.0, 0.0],
    [1.0, 0.0],
    [0.0, 1.0],
    [0.0, 0.0],
])


class BoundaryData:
    """The symplectic R^4 of boundary pairs, in both orientations."""

    def __init__(self):
        self.minus = SymplecticSpace(_J_BOUNDARY, _REF_BOUNDARY)
        self.plus = self.minus.negated()

    def space(self, arc: str) -> SymplecticSpace:
        return self.minus if arc == "minus" else self.plus

    def omega(self, x, y) -> float:
        return self.minus.omega(x, y)


_BOUNDARY = BoundaryData()


def boundary_data() -> BoundaryData:
    return _BOUNDARY


@dataclass
class TransferSolution:
    """Fundamental solution across an arc with per-step diagnostics."""

    arc: str
    t: float
    lam: float
    steps: list[np.ndarray]
    total: np.ndarray

    def condition_numbers(self) -> np.ndarray:
        return np.array([np.linalg.cond(s) for s in self.steps])

    def reversed_total(self) -> np.ndarray:
        out = np.eye(2)
        for s in self.steps:
            out = out @ np.linalg.inv(s)
        return out


def transfer_solution(fam: OperatorFamily, arc: str, t: float, lam: float) -> TransferSolution:
    """Stepwise fundamental solution (pwc: one step per segment)."""
    from .kernels import transfer_pwc, transfer_smooth

    a, b = ARCS[arc]
    if fam.kind == "pwc":
        lengths, pots = fam.segments_at(arc, t)
        steps = [
            transfer_pwc(np.array([h]), np.array([p]), np.array([lam]))[0]
            for h, p in zip(lengths, pots)
        ]
    else:
        u0, du, tab = fam.table_at(arc, t)
        cuts = np.linspace(a, b, 9)
        npart = max(1, fam.nsteps // 8)
        steps = [
            transfer_smooth(tab, u0, du, lo, hi, npart, np.array([lam]))[0]
            for lo, hi in zip(cuts, cuts[1:])
        ]
    total = np.eye(2)
    for s in steps:
        total = s @ total
    return TransferSolution(arc, t, lam, steps, total)


def _orthonormalize_batch(frames: np.ndarray) -> np.ndarray:
    """Two-column Gram-Schmidt over a (m, 4, 2) batch."""
    v1 = frames[:, :, 0]
    v1 = v1 / np.linalg.norm(v1, axis=1, keepdims=True)
    v2 = frames[:, :, 1] - np.sum(v1 * frames[:, :, 1], axis=1, keepdims=True) * v1
    v2 = v2 - np.sum(v1 * v2, axis=1, keepdims=True) * v1
    v2 = v2 / np.linalg.norm(v2, axis=1, keepdims=True)
    return np.stack([v1, v2], axis=2)


def _cauchy_frames_batch(fam: OperatorFamily, arc: str, t: float, lams: np.ndarray) -> np.ndarray:
    """Orthonormal boundary frames of the solution spaces, (m, 4, 2).

    Minus arc: {(v, T v)}; plus arc: {(T w, w)} with T the arc transfer, in
    the shared coordinates (value at cut 0, value at cut pi).
    """
    T = fam.transfer(arc, t, lams)
    m = T.shape[0]
    frames = np.zeros((m, 4, 2))
    if arc == "minus":
        frames[:, 0, 0] = 1.0
        frames[:, 1, 1] = 1.0
        frames[:, 2:, :] = T
    else:
        frames[:, 2, 0] = 1.0
        frames[:, 3, 1] = 1.0
        frames[:, :2, :] = T
    return _orthonormalize_batch(frames)


def cauchy_frame(fam: OperatorFamily, arc: str, t: float, lam: float) -> LagrangianFrame:
    space = _BOUNDARY.space(arc)
    frame = _cauchy_frames_batch(fam, arc, t, np.array([float(lam)]))[0]
    return LagrangianFrame(space, frame)


def cauchy_data_space(fam: OperatorFamily, arc: str, t: float, lam: float) -> LagrangianFrame:
    """Boundary traces of all solutions on the arc at spectral level ``lam``."""
    return cauchy_frame(fam, arc, t, lam)


def cauchy_path(fam: OperatorFamily, arc: str, lam: float = 0.0, budget: int = 60000) -> LagrangianPath:
    """The path t -> Cauchy data space at fixed spectral level."""
    space = _BOUNDARY.space(arc)

    def ev(t: float) -> LagrangianFrame:
        return cauchy_frame(fam, arc, t, lam)

    return LagrangianPath.from_evaluator(space, ev, nsamples=17, budget=budget)


def domain_lagrangian_D0(fam: OperatorFamily) -> LagrangianFrame:
    """Boundary Lagrangian of the natural transmission domain on the minus arc.

    Traces of the solutions of the t = 0 operator on the complementary plus
    arc, expressed in the minus orientation.
    """
    return cauchy_frame(fam, "plus", 0.0, 0.0).in_space(_BOUNDARY.minus)


def domain_lagrangian_D1(fam: OperatorFamily) -> LagrangianFrame:
    """Mirror of :func:`domain_lagrangian_D0`: t = 1 solutions on the minus arc."""
    return cauchy_frame(fam, "minus", 1.0, 0.0).in_space(_BOUNDARY.plus)


def aps_boundary_lagrangian(fam: OperatorFamily, which: int) -> LagrangianFrame:
    """Spectral boundary condition from the collar tangential matrix.

    ``which=0``: the span, at each cut point, of the positive eigenvector of
    ``b0 diag(1,-1)`` (the domain keeping only nonnegative tangential modes
    on the minus arc).  ``which=1``: the non-positive counterpart built from
    ``b1``.  For a vanishing collar parameter the configured zero-mode
    splitting is used instead.
    """
    if which not in (0, 1):
        raise ValueError("which must be 0 or 1")
    if not fam.product_form:
        raise SolverError(
            "family has no product structure at the cuts; spectral boundary "
            "conditions are undefined"
        )
    b = fam.tangential_parameter(which)
    if b == 0.0:
        v = fam.zero_mode_plus / np.linalg.norm(fam.zero_mode_plus)
        if which == 1:
            v = SIGMA @ v
    else:
        # eigenvectors of b*diag(1,-1): e1 for the positive eigenvalue of b>0
        positive_first = (b > 0) if which == 0 else (b < 0)
        v = np.array([1.0, 0.0]) if positive_first else np.array([0.0, 1.0])
    frame = np.zeros((4, 2))
    frame[:2, 0] = v
    frame[2:, 1] = v
    space = _BOUNDARY.minus if which == 0 else _BOUNDARY.plus
    return LagrangianFrame(space, frame)


# ---------------------------------------------------------------------------
# eigenvalue location through unitary winding


def _z_batch(space: SymplecticSpace, frames: np.ndarray) -> np.ndarray:
    """Batched unitary representatives: Z = P0^T (F - i J F)."""
    A = space.ref.T
    B = space.ref.T @ space.J
    return np.einsum("ij,mjk->mik", A, frames) - 1j * np.einsum("ij,mjk->mik", B, frames)


def _angles_of_frames(space: SymplecticSpace, frames: np.ndarray, wref_conj: np.ndarray) -> np.ndarray:
    """Eigenangles (m, 2) of U = -W(frame) conj(W_ref) for a frame batch."""
    Z = _z_batch(space, frames)
    W = Z @ np.transpose(Z, (0, 2, 1))
    U = -W @ wref_conj
    tr = U[:, 0, 0] + U[:, 1, 1]
    det = U[:, 0, 0] * U[:, 1, 1] - U[:, 0, 1] * U[:, 1, 0]
    disc = np.sqrt(tr * tr - 4.0 * det + 0j)
    e1 = 0.5 * (tr + disc)
    e2 = 0.5 * (tr - disc)
    return np.angle(np.stack([e1, e2], axis=1))


class _EigenScanner:
    """Eigenvalue locator for one arc problem or the full circle at fixed t.

    Eigenvalues are the spectral parameters where the relative unitary of
    the moving Cauchy data space(s) acquires eigenvalue -1; the winding is
    monotone in the parameter, and multiplicities are simultaneous branch
    crossings.
    """

    def __init__(self, fam: OperatorFamily, t: float, mode: str, ref: LagrangianFrame | None):
        self.fam = fam
        self.t = t
        self.mode = mode  # "minus" | "plus" | "circle"
        self.space = _BOUNDARY.minus
        if mode == "circle":
            self.ref_minus = None
            self.wref_conj = None
        else:
            self.ref_minus = ref.in_space(self.space)
            self.wref_conj = self.ref_minus.w_matrix().conj()

    def angles(self, lams: np.ndarray) -> np.ndarray:
        lams = np.atleast_1d(np.asarray(lams, dtype=float))
        if self.mode == "circle":
            fm = _cauchy_frames_batch(self.fam, "minus", self.t, lams)
            fp = _cauchy_frames_batch(self.fam, "plus", self.t, lams)
            Zm = _z_batch(self.space, fm)
            Zp = _z_batch(self.space, fp)
            Wm = Zm @ np.transpose(Zm, (0, 2, 1))
            Wp = Zp @ np.transpose(Zp, (0, 2, 1))
            U = -Wm @ Wp.conj()
            tr = U[:, 0, 0] + U[:, 1, 1]
            det = U[:, 0, 0] * U[:, 1, 1] - U[:, 0, 1] * U[:, 1, 0]
            disc = np.sqrt(tr * tr - 4.0 * det + 0j)
            return np.angle(np.stack([0.5 * (tr + disc), 0.5 * (tr - disc)], axis=1))
        frames = _cauchy_frames_batch(self.fam, self.mode, self.t, lams)
        return _angles_of_frames(self.space, frames, self.wref_conj)

    def kernel_dim(self, lam: float = 0.0) -> int:
        if self.mode == "circle":
            mono = self.fam.monodromy(self.t, np.array([lam]))[0]
            s = np.linalg.svd(mono - np.eye(2), compute_uv=False)
            return int(np.sum(s < 1e-7))
        frame = cauchy_frame(self.fam, self.mode, self.t, lam).in_space(self.space)
        return intersection_dim(frame, self.ref_minus)

    def eigenvalues(self, lo: float, hi: float) -> list[tuple[float, int]]:
        """Sorted (eigenvalue, multiplicity) in [lo, hi]."""
        lams = np.linspace(lo, hi, 25)
        raw = self.angles(lams)
        # lift branches along the lam grid, refining oversized steps
        for _round in range(40):
            lifted = [np.sort(raw[0])]
            split = None
            for i in range(1, len(lams)):
                nxt = _match_pair(lifted[-1], raw[i])
                if np.abs(nxt - lifted[-1]).max() > 1.1:
                    split = i
                    break
                lifted.append(nxt)
            if split is None:
                break
            mids = 0.5 * (lams[split - 1] + lams[split])
            if lams[split] - lams[split - 1] < 1e-12:
                raise TrackingError(f"eigenangle tracking stalled near lam={mids}")
            insert_at = split
            lams = np.insert(lams, insert_at, mids)
            raw = np.insert(raw, insert_at, self.angles(np.array([mids]))[0], axis=0)
        else:
            raise TrackingError("eigenangle refinement did not converge")
        lifted = np.array(lifted)
        lifted = _snap(lifted)
        roots: list[float] = []
        for m in range(2):
            for i in range(len(lams) - 1):
                a, b = lifted[i, m], lifted[i + 1, m]
                ca, cb = _count_levels(a), _count_levels(b)
                if ca == cb:
                    continue
                step = 1 if cb > ca else -1
                ks = range(ca + 1, cb + 1) if cb > ca else range(ca, cb, -1)
                for k in ks:
                    level = math.pi + 2.0 * math.pi * (k - 1)
                    roots.append(self._bisect(lams[i], a, lams[i + 1], b, level, m))
        roots.sort()
        out: list[tuple[float, int]] = []
        for r in roots:
            if out and abs(r - out[-1][0]) < 2e-7:
                out[-1] = (out[-1][0], out[-1][1] + 1)
            else:
                out.append((r, 1))
        return out

    def _bisect(self, l0, th0, l1, th1, level, branch, iters=44):
        if th0 == level:
            return l0
        if th1 == level:
            return l1
        for _ in range(iters):
            if l1 - l0 < 1e-11:
                break
            lm = 0.5 * (l0 + l1)
            refs = np.array([th0, th1])
            raws = self.angles(np.array([lm]))[0]
            guess = 0.5 * (th0 + th1)
            d = (raws - guess + math.pi) % (2.0 * math.pi) - math.pi
            thm = guess + d[np.argmin(np.abs(d))]
            if (th0 - level) * (thm - level) <= 0.0:
                l1, th1 = lm, thm
            else:
                l0, th0 = lm, thm
        return 0.5 * (l0 + l1)


def _match_pair(prev: np.ndarray, new: np.ndarray) -> np.ndarray:
    """Continue a lifted pair of angles by the closest circular matching."""
    two_pi = 2.0 * math.pi
    d0 = np.array([
        (new[0] - prev[0] + math.pi) % two_pi - math.pi,
        (new[1] - prev[1] + math.pi) % two_pi - math.pi,
    ])
    d1 = np.array([
        (new[1] - prev[0] + math.pi) % two_pi - math.pi,
        (new[0] - prev[1] + math.pi) % two_pi - math.pi,
    ])
    return prev + (d0 if np.abs(d0).max() <= np.abs(d1).max() else d1)


def _snap(lifted: np.ndarray) -> np.ndarray:
    k = np.round((lifted - math.pi) / (2.0 * math.pi))
    level = math.pi + 2.0 * math.pi * k
    return np.where(np.abs(lifted - level) < 1e-8, level, lifted)


def _count_levels(theta: float) -> int:
    r = (theta - math.pi) / (2.0 * math.pi)
    rr = round(r)
    if abs(r - rr) < 1e-12:
        r = rr
    return math.ceil(r)


def _make_scanner(fam, t, mode, ref) -> _EigenScanner:
    return _EigenScanner(fam, t, mode, ref)


def eigenvalues_on_arc(
    fam: OperatorFamily,
    arc: str,
    t: float,
    boundary: LagrangianFrame,
    window: tuple[float, float],
) -> list[tuple[float, int]]:
    """Eigenvalues (with multiplicity) of the arc realization in a window."""
    sc = _make_scanner(fam, t, arc, boundary)
    return sc.eigenvalues(window[0], window[1])


def circle_eigenvalues(fam: OperatorFamily, t: float, window: tuple[float, float]):
    """Eigenvalues of the closed-circle operator in a window."""
    sc = _make_scanner(fam, t, "circle", None)
    return sc.eigenvalues(window[0], window[1])


# ---------------------------------------------------------------------------
# spectral flow


_WINDOW = 0.85       # half-width of the scanned spectral window
_MARGIN = 0.05       # required spectral gap around the counting cutoff
_ZERO_TOL = 1e-9     # eigenvalues this close to zero count as kernel


def _count_below(eigs: list[tuple[float, int]], cutoff: float) -> int:
    return sum(m for lam, m in eigs if 0.0 <= lam < cutoff)


def _zero_snapped(eigs: list[tuple[float, int]]) -> list[tuple[float, int]]:
    return [(0.0 if abs(l) < _ZERO_TOL else l, m) for l, m in eigs]


def _pick_cutoff(e0, e1):
    """A cutoff in (0.1, WINDOW-MARGIN) away from all eigenvalues, or None."""
    vals = sorted({abs(l) for l, _ in e0} | {abs(l) for l, _ in e1})
    lo, hi = 0.12, _WINDOW - 2 * _MARGIN
    candidates = [lo, hi]
    vals_in = [v for v in vals if lo < v < hi]
    edges = [lo] + vals_in + [hi]
    for a, b in zip(edges, edges[1:]):
        candidates.append(0.5 * (a + b))
    best, best_gap = None, 0.0
    for c in candidates:
        gap = min((abs(abs(l) - c) for l, _ in e0 + e1), default=1.0)
        if gap > best_gap:
            best, best_gap = c, gap
    if best_gap < _MARGIN:
        return None
    return best


def _matched_motion(e0, e1) -> float:
    """Largest eigenvalue movement between two windows, edge-tolerant.

    Eigenvalues may enter or leave the scanned window through its edges;
    the surplus entries of the longer list are matched against the nearest
    edge instead of a partner.
    """
    a = sorted(l for l, m in e0 for _ in range(m))
    b = sorted(l for l, m in e1 for _ in range(m))
    move = 0.0
    while len(a) != len(b):
        longer = a if len(a) > len(b) else b
        first_slack = _WINDOW - abs(longer[0])
        last_slack = _WINDOW - abs(longer[-1])
        if first_slack < last_slack:
            move = max(move, first_slack)
            longer.pop(0)
        else:
            move = max(move, last_slack)
            longer.pop()
    for x, y in zip(a, b):
        move = max(move, abs(x - y))
    return move


class _FlowCounter:
    """Windowed eigenvalue counting over the deformation parameter.

    ``eigs_fn(t)`` must return the (eigenvalue, multiplicity) list in the
    scanned window at deformation time t, and ``kernel_fn(t)`` the exact
    kernel dimension; any eigenvalue provider with these two entry points
    gets the same counting logic (the Galerkin oracle reuses it).
    """

    def __init__(self, eigs_fn, kernel_fn, guard: bool):
        self.eigs_fn = eigs_fn
        self.kernel_fn = kernel_fn
        self.guard = guard
        self.cache: dict[float, list[tuple[float, int]]] = {}

    def eigs(self, t: float) -> list[tuple[float, int]]:
        key = round(t, 14)
        if key not in self.cache:
            raw = self.eigs_fn(t)
            if t in (0.0, 1.0):
                raw = _zero_snapped(raw)
            elif any(abs(l) < 5 * _ZERO_TOL for l, _ in raw):
                # nudge interior samples that land on an eigenvalue
                raw = self.eigs_fn(t + 3e-7)
            self.cache[key] = raw
        return self.cache[key]

    def kernel_dim(self, t: float) -> int:
        return self.kernel_fn(t)

    def flow(self, base_grid: int = 65) -> IndexReport:
        ts = list(np.linspace(0.0, 1.0, base_grid))
        total = 0
        crossings: list[tuple[float, int, int]] = []
        stack = list(zip(ts, ts[1:]))
        while stack:
            t0, t1 = stack.pop(0)
            e0, e1 = self.eigs(t0), self.eigs(t1)
            cutoff = _pick_cutoff(e0, e1)
            motion = _matched_motion(e0, e1)
            if self.guard and t1 - t0 > 1e-3:
                near0 = any(abs(l) < 1e-4 for l, _ in e0) and any(
                    abs(l) < 1e-4 for l, _ in e1
                )
                if near0:
                    raise RejectedInstance(
                        f"eigenvalue dwells near zero on [{t0:.4f}, {t1:.4f}]"
                    )
            if cutoff is None or motion > _MARGIN:
                if t1 - t0 < 4 * conv.MIN_PARAM_STEP:
                    raise TrackingError(
                        f"no admissible counting window on [{t0}, {t1}]"
                    )
                tm = 0.5 * (t0 + t1)
                stack.insert(0, (tm, t1))
                stack.insert(0, (t0, tm))
                continue
            diff = _count_below(e1, cutoff) - _count_below(e0, cutoff)
            if diff:
                total += diff
                crossings.append((0.5 * (t0 + t1), abs(diff), diff))
        m0 = self.kernel_dim(0.0)
        m1 = self.kernel_dim(1.0)
        total += m0 - m1
        if m0:
            crossings.append((0.0, m0, m0))
        if m1:
            crossings.append((1.0, m1, -m1))
        crossings.sort()
        return IndexReport(total, crossings, "windowed-counting")


def _scan_provider(fam, mode, ref):
    def eigs_fn(t):
        return _make_scanner(fam, t, mode, ref).eigenvalues(-_WINDOW, _WINDOW)

    def kernel_fn(t):
        return _make_scanner(fam, t, mode, ref).kernel_dim(0.0)

    return eigs_fn, kernel_fn


def spectral_flow_arc(
    fam: OperatorFamily,
    arc: str,
    boundary: LagrangianFrame,
    convention: str = conv.DEFAULT_CONVENTION,
    guard: bool = False,
) -> IndexReport:
    """Net signed count of arc eigenvalues crossing zero along the family.

    An eigenvalue moving from negative to nonnegative counts +1, the reverse
    -1; endpoint kernels follow the package endpoint convention.
    """
    conv.check_convention(convention)
    if convention == "rclo":
        rep = spectral_flow_arc(fam.time_reversed(), arc, boundary, "lcro", guard)
        return IndexReport(
            -rep.value, [(1.0 - t, d, -c) for t, d, c in reversed(rep.crossings)], rep.method
        )
    return _FlowCounter(*_scan_provider(fam, arc, boundary), guard).flow()


def spectral_flow_circle(
    fam: OperatorFamily,
    convention: str = conv.DEFAULT_CONVENTION,
    guard: bool = False,
) -> IndexReport:
    """Spectral flow of the closed-circle family (monodromy eigenvalue one)."""
    conv.check_convention(convention)
    if convention == "rclo":
        rep = spectral_flow_circle(fam.time_reversed(), "lcro", guard)
        return IndexReport(
            -rep.value, [(1.0 - t, d, -c) for t, d, c in reversed(rep.crossings)], rep.method
        )
    return _FlowCounter(*_scan_provider(fam, "circle", None), guard).flow()


# ---------------------------------------------------------------------------
# structural checks


def _quadrature_nodes(n: int = 24):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def green_form_residual(
    fam: OperatorFamily, arc: str, t: float, lam1: float, lam2: float
) -> float:
    """| <(A+C)f, g> - <f, (A+C)g> - omega(tr f, tr g) | for solution pairs.

    f and g solve the system at spectral levels lam1, lam2, so the pairing
    difference equals (lam1 - lam2) <f, g>; the L2 product is integrated by
    per-segment Gauss quadrature on the propagated solutions and compared
    with the boundary form of the traces.
    """
    a, b = ARCS[arc]
    x, w = _quadrature_nodes()
    f0 = np.array([1.0, 0.35])
    g0 = np.array([-0.2, 1.0])
    if fam.kind == "pwc":
        # panels aligned with the segment edges keep the integrand analytic
        lengths, _ = fam.segments_at(arc, t)
        edges = np.concatenate([[a], a + np.cumsum(lengths)])
        cuts = [a]
        for lo, hi in zip(edges, edges[1:]):
            sub = max(1, int(np.ceil((hi - lo) / 0.35)))
            cuts.extend(np.linspace(lo, hi, sub + 1)[1:])
        cuts = np.array(cuts)
    else:
        cuts = np.linspace(a, b, 25)
    inner = 0.0
    from .kernels import transfer_pwc, transfer_smooth

    def prop(lo, hi, lam, v):
        if fam.kind == "pwc":
            # integrate across whole segments between lo and hi
            lengths, pots = fam.segments_at(arc, t)
            edges = np.concatenate([[a], a + np.cumsum(lengths)])
            out = v.copy()
            for s in range(len(lengths)):
                s0, s1 = edges[s], edges[s + 1]
                ov0, ov1 = max(s0, lo), min(s1, hi)
                if ov1 <= ov0:
                    continue
                out = transfer_pwc(
                    np.array([ov1 - ov0]), np.array([pots[s]]), np.array([lam])
                )[0] @ out
            return out
        u0, du, tab = fam.table_at(arc, t)
        n = max(8, int(fam.nsteps * (hi - lo) / (b - a)))
        return transfer_smooth(tab, u0, du, lo, hi, n, np.array([lam]))[0] @ v

    fa, ga = f0, g0
    for lo, hi in zip(cuts, cuts[1:]):
        h = hi - lo
        for xi, wi in zip(x, w):
            um = lo + 0.5 * h * (xi + 1.0)
            fv = prop(lo, um, lam1, fa)
            gv = prop(lo, um, lam2, ga)
            inner += 0.5 * h * wi * float(fv @ gv)
        fa = prop(lo, hi, lam1, fa)
        ga = prop(lo, hi, lam2, ga)
    f_end, g_end = fa, ga
    if arc == "minus":
        tr_f = np.concatenate([f0, f_end])
        tr_g = np.concatenate([g0, g_end])
        omega = _BOUNDARY.omega(tr_f, tr_g)
    else:
        tr_f = np.concatenate([f_end, f0])
        tr_g = np.concatenate([g_end, g0])
        omega = -_BOUNDARY.omega(tr_f, tr_g)
    return abs((lam1 - lam2) * inner - omega)


def trace_map_min_singular(matrix: np.ndarray) -> float:
    """Smallest singular value of a solution-space trace map."""
    return float(np.linalg.svd(np.asarray(matrix, float), compute_uv=False).min())


def unique_continuation_check(
    fam: OperatorFamily,
    arc: str,
    t: float,
    shifts: np.ndarray | None = None,
    tol: float = 1e-8,
) -> dict:
    """No nonzero solution has vanishing full boundary trace.

    The trace map of the two-dimensional solution space is v -> (v, T v)
    (or (T v, v)); its smallest singular value is bounded below by one for
    any invertible transfer matrix, so this is a structural regression
    guard.  Sampled over a window of spectral shifts; a violation is a hard
    error.
    """
    if shifts is None:
        shifts = np.linspace(-0.5, 0.5, 9)
    worst = np.inf
    for s in shifts:
        T = fam.transfer(arc, t, np.array([float(s)]))[0]
        tr = np.vstack([np.eye(2), T]) if arc == "minus" else np.vstack([T, np.eye(2)])
        worst = min(worst, trace_map_min_singular(tr))
    if worst <= tol:
        raise SolverError(
            f"unique continuation violated on arc {arc}: min singular {worst:.3e}"
        )
    return {"arc": arc, "t": t, "min_singular": worst, "tolerance": tol}
