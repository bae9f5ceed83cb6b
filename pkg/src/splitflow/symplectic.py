"""Finite-dimensional real symplectic linear algebra.

A symplectic space is (R^{2n}, omega) with omega(x, y) = <J x, y> for a real
matrix J satisfying J^2 = -Id and J^T = -J (so J is orthogonal and the
Euclidean metric is compatible).  Lagrangian subspaces are stored as
orthonormal column frames.  The module provides

* construction and validation of Lagrangian frames, graphs and paths,
* the Maslov index of a path of Lagrangians against a fixed reference, by
  two independent algorithms (finite-difference crossing forms, and winding
  of eigenvalues of the associated unitaries through -1),
* the Hormander index of four Lagrangians as a Maslov difference along a
  connecting geodesic,
* the explicitly transversal mirror path used by the vanishing certificates.

Unitary picture
---------------
Fixing an orthonormal Lagrangian frame P0, the map z(x) = P0^T x - i P0^T J x
identifies R^{2n} with C^n, intertwining J with multiplication by i.  An
orthonormal Lagrangian frame F maps to a unitary Z = P0^T (F - i J F), and
the subspace itself is encoded by the symmetric unitary W = Z Z^T.  Two
Lagrangians intersect exactly where W_a conj(W_b) has eigenvalue 1, i.e.
where -W_a conj(W_b) has eigenvalue -1, and dim(a ∩ b) is the multiplicity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from . import conventions as conv
from .errors import MaslovError

__all__ = [
    "SymplecticSpace",
    "LagrangianFrame",
    "LagrangianPath",
    "IndexReport",
    "standard_space",
    "orthonormal_columns",
    "lagrangian_from_span",
    "graph_lagrangian",
    "intersection_dim",
    "intersection_basis",
    "gap_distance",
    "maslov_crossing",
    "maslov_unitary",
    "hormander_index",
    "connecting_path",
    "transversal_connecting_path",
    "random_lagrangian",
    "random_path",
]

_TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# spaces and frames


class SymplecticSpace:
    """R^dim with a compatible complex structure J (omega(x,y) = <Jx,y>)."""

    def __init__(self, J: np.ndarray, ref_frame: np.ndarray | None = None):
        J = np.asarray(J, dtype=float)
        dim = J.shape[0]
        if dim % 2 or J.shape != (dim, dim):
            raise ValueError("J must be square of even size")
        if np.abs(J @ J + np.eye(dim)).max() > conv.STRUCTURE_TOL * 10:
            raise ValueError("J^2 != -Id")
        if np.abs(J + J.T).max() > conv.STRUCTURE_TOL * 10:
            raise ValueError("J is not antisymmetric")
        self.J = J
        self.dim = dim
        self.half = dim // 2
        if ref_frame is None:
            ref_frame = _schur_lagrangian(J)
        self.ref = np.asarray(ref_frame, dtype=float)
        self.jref = J @ self.ref
        if (
            np.abs(self.ref.T @ self.ref - np.eye(self.half)).max() > conv.FRAME_TOL
            or np.abs(self.ref.T @ self.J @ self.ref).max() > conv.FRAME_TOL
        ):
            raise ValueError("reference frame is not an orthonormal Lagrangian frame")

    def omega(self, x: np.ndarray, y: np.ndarray) -> float:
        return float((self.J @ x) @ y)

    def negated(self) -> "SymplecticSpace":
        """Same underlying space with the symplectic form negated."""
        return SymplecticSpace(-self.J, self.jref)

    def unitary_of(self, frame: np.ndarray) -> np.ndarray:
        """Complex unitary representing a Lagrangian frame."""
        return self.ref.T @ frame - 1j * (self.ref.T @ (self.J @ frame))

    def frame_of(self, Z: np.ndarray) -> np.ndarray:
        """Real orthonormal Lagrangian frame of a complex unitary."""
        return self.ref @ Z.real + self.jref @ Z.imag

    def __repr__(self):
        return f"SymplecticSpace(dim={self.dim})"


def _schur_lagrangian(J: np.ndarray) -> np.ndarray:
    # Real Schur form of an orthogonal skew matrix is 2x2 rotation blocks;
    # the first column of each block spans a Lagrangian.
    T, Q = scipy.linalg.schur(J, output="real")
    return Q[:, ::2]


def standard_space(dim: int) -> SymplecticSpace:
    """Standard space with basis split (plus block, minus block).

    J e_k = e_{-k} and J e_{-k} = -e_k, where e_k is the k-th column of the
    first block and e_{-k} the k-th column of the second.
    """
    n = dim // 2
    J = np.zeros((dim, dim))
    J[n:, :n] = np.eye(n)
    J[:n, n:] = -np.eye(n)
    ref = np.zeros((dim, n))
    ref[:n] = np.eye(n)
    return SymplecticSpace(J, ref)


def orthonormal_columns(A: np.ndarray) -> np.ndarray:
    """Deterministic modified Gram-Schmidt (fixed column order, two passes).

    Column j is orthogonalized against all previous columns at once (the
    projections are evaluated with the already-final columns, so this is
    the modified scheme); a second pass restores orthogonality lost to
    cancellation.
    """
    Q = np.array(A, dtype=float)
    k = Q.shape[1]
    for _pass in range(2):
        for j in range(k):
            if j:
                Q[:, j] -= Q[:, :j] @ (Q[:, :j].T @ Q[:, j])
            nrm = np.linalg.norm(Q[:, j])
            if nrm < 1e-12:
                raise ValueError("rank-deficient spanning set")
            Q[:, j] /= nrm
    return Q


@dataclass(frozen=True)
class LagrangianFrame:
    """A Lagrangian subspace stored as an orthonormal column frame."""

    space: SymplecticSpace
    frame: np.ndarray

    def __post_init__(self):
        F = self.frame
        n = self.space.half
        if F.shape != (self.space.dim, n):
            raise ValueError("frame has wrong shape")
        if np.abs(F.T @ F - np.eye(n)).max() > conv.FRAME_TOL:
            raise ValueError("frame columns are not orthonormal")
        if np.abs(F.T @ self.space.J @ F).max() > conv.FRAME_TOL:
            raise ValueError("frame does not span a Lagrangian subspace")

    def unitary(self) -> np.ndarray:
        return self.space.unitary_of(self.frame)

    def w_matrix(self) -> np.ndarray:
        Z = self.unitary()
        return Z @ Z.T

    def projector(self) -> np.ndarray:
        return self.frame @ self.frame.T

    def in_space(self, space: SymplecticSpace) -> "LagrangianFrame":
        """The same subspace viewed in another space over the same R^dim."""
        return LagrangianFrame(space, self.frame)


def lagrangian_from_span(space: SymplecticSpace, vectors: np.ndarray) -> LagrangianFrame:
    """Orthonormalize a spanning set and validate the Lagrangian property."""
    return LagrangianFrame(space, orthonormal_columns(vectors))


def graph_lagrangian(
    plus: LagrangianFrame, minus: LagrangianFrame, T: np.ndarray | float
) -> LagrangianFrame:
    """Lagrangian graph {x + T x : x in plus} of a map T: plus -> minus.

    ``T`` is given in frame coordinates (scalar allowed when the frames are
    one-dimensional).  The graph is Lagrangian iff (P+^T J P-) T is
    symmetric, which is the frame expression of the selfadjointness of the
    composition of the complex structure with T; violations beyond 1e-10 are
    rejected.
    """
    space = plus.space
    n = space.half
    T = np.atleast_2d(np.asarray(T, dtype=float))
    if T.shape != (n, n):
        raise ValueError("graph generator has wrong shape")
    if intersection_dim(plus, minus) != 0:
        raise ValueError("plus and minus frames are not transversal")
    B = plus.frame.T @ space.J @ minus.frame
    BT = B @ T
    if np.abs(BT - BT.T).max() > 1e-10 * max(1.0, np.abs(BT).max()):
        raise ValueError("graph generator does not define a Lagrangian graph")
    return lagrangian_from_span(space, plus.frame + minus.frame @ T)


def intersection_dim(a: LagrangianFrame, b: LagrangianFrame) -> int:
    """dim(a ∩ b), counted as singular values of (Id - aa^T) b below 1e-8."""
    if a.space.dim != b.space.dim:
        raise ValueError("frames live in spaces of different dimension")
    resid = b.frame - a.frame @ (a.frame.T @ b.frame)
    s = np.linalg.svd(resid, compute_uv=False)
    return int(np.sum(s < conv.RANK_TOL))


def intersection_basis(a: LagrangianFrame, b: LagrangianFrame) -> np.ndarray:
    """Orthonormal basis (columns) of a ∩ b; empty (dim, 0) if transversal."""
    resid = b.frame - a.frame @ (a.frame.T @ b.frame)
    _, s, vt = np.linalg.svd(resid)
    cols = [b.frame @ vt[i] for i in range(len(s)) if s[i] < conv.RANK_TOL]
    if not cols:
        return np.zeros((a.space.dim, 0))
    return orthonormal_columns(np.column_stack(cols))


def gap_distance(a: LagrangianFrame, b: LagrangianFrame) -> float:
    """Gap metric ||P_a - P_b||_2 (the sine of the largest principal angle)."""
    resid = b.frame - a.frame @ (a.frame.T @ b.frame)
    s = np.linalg.svd(resid, compute_uv=False)
    return float(s.max(initial=0.0))


# ---------------------------------------------------------------------------
# paths


@dataclass
class LagrangianPath:
    """A path of Lagrangian subspaces sampled on [0, 1].

    ``samples`` is an ordered list of (t, frame) with t strictly increasing,
    t0 = 0 and t_last = 1.  When an ``evaluator`` is available new samples
    are produced by it; otherwise midpoints are filled in along the geodesic
    between neighbouring samples.  On construction the sample list is
    refined until successive frames are closer than 0.5 in the gap metric.
    """

    space: SymplecticSpace
    samples: list[tuple[float, LagrangianFrame]]
    evaluator: object = None
    budget: int = 4000
    _spent: int = field(default=0, repr=False)

    def __post_init__(self):
        ts = [t for t, _ in self.samples]
        if len(ts) < 2 or ts[0] != 0.0 or ts[-1] != 1.0:
            raise ValueError("path samples must start at t=0 and end at t=1")
        if any(t1 >= t2 for t1, t2 in zip(ts, ts[1:])):
            raise ValueError("path sample parameters must increase strictly")
        self.refine_to(conv.PATH_GAP_BOUND)

    @classmethod
    def from_evaluator(cls, space, evaluator, nsamples: int = 9, budget: int = 4000):
        ts = np.linspace(0.0, 1.0, nsamples)
        samples = [(float(t), evaluator(float(t))) for t in ts]
        return cls(space, samples, evaluator=evaluator, budget=budget)

    @classmethod
    def from_frames(cls, space, frames, budget: int = 4000):
        ts = np.linspace(0.0, 1.0, len(frames))
        return cls(space, [(float(t), f) for t, f in zip(ts, frames)], budget=budget)

    def at(self, t: float) -> LagrangianFrame:
        """Evaluate the path, interpolating geodesically if sample-backed."""
        if self.evaluator is not None:
            self._spend()
            return self.evaluator(float(t))
        ts = [s for s, _ in self.samples]
        i = int(np.searchsorted(ts, t))
        if i < len(ts) and ts[i] == t:
            return self.samples[i][1]
        if i == 0:
            return self.samples[0][1]
        if i == len(ts):
            return self.samples[-1][1]
        t0, f0 = self.samples[i - 1]
        t1, f1 = self.samples[i]
        self._spend()
        return _geodesic_point(f0, f1, (t - t0) / (t1 - t0))

    def _spend(self):
        self._spent += 1
        if self._spent > self.budget:
            raise MaslovError("path refinement budget exhausted")

    def insert(self, t: float) -> None:
        ts = [s for s, _ in self.samples]
        i = int(np.searchsorted(ts, t))
        if i < len(ts) and abs(ts[i] - t) < 1e-15:
            return
        self.samples.insert(i, (float(t), self.at(t)))

    def refine_to(self, max_gap: float, max_rounds: int = 40) -> None:
        """Insert midpoints until successive samples are gap-closer than max_gap."""
        for _ in range(max_rounds):
            new_ts = []
            for (t0, f0), (t1, f1) in zip(self.samples, self.samples[1:]):
                if gap_distance(f0, f1) > max_gap and t1 - t0 > conv.MIN_PARAM_STEP:
                    new_ts.append(0.5 * (t0 + t1))
            if not new_ts:
                return
            for t in new_ts:
                self.insert(t)
        raise MaslovError("gap refinement did not converge")

    def reversed(self) -> "LagrangianPath":
        rev_samples = [(1.0 - t, f) for t, f in reversed(self.samples)]
        ev = None
        if self.evaluator is not None:
            base = self.evaluator
            ev = lambda t: base(1.0 - t)
        return LagrangianPath(self.space, rev_samples, evaluator=ev, budget=self.budget)

    def concatenated(self, other: "LagrangianPath") -> "LagrangianPath":
        if gap_distance(self.samples[-1][1], other.samples[0][1]) > 1e-8:
            raise ValueError("paths do not match at the junction")
        first = [(0.5 * t, f) for t, f in self.samples]
        second = [(0.5 + 0.5 * t, f) for t, f in other.samples[1:]]
        ev = None
        if self.evaluator is not None and other.evaluator is not None:
            e1, e2 = self.evaluator, other.evaluator
            ev = lambda t: e1(2.0 * t) if t <= 0.5 else e2(2.0 * t - 1.0)
        return LagrangianPath(self.space, first + second, evaluator=ev, budget=self.budget + other.budget)


def _takagi_angles(W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Real orthogonal Q and angles theta with W = Q exp(i diag(theta)) Q^T.

    Exists for any symmetric unitary W: each eigenspace is invariant under
    complex conjugation (W vbar = lambda vbar when W v = lambda v and
    |lambda| = 1), so it admits a real orthonormal basis.  Eigenvalues are
    clustered, and a real basis of each cluster's invariant subspace is
    extracted from the real and imaginary parts of the eigenvectors.
    """
    n = W.shape[0]
    vals, vecs = np.linalg.eig(W)
    order = np.argsort(np.angle(vals))
    vals, vecs = vals[order], vecs[:, order]
    cols: list[np.ndarray] = []
    angles: list[float] = []
    i = 0
    while i < n:
        j = i + 1
        while j < n and abs(vals[j] - vals[i]) < 3e-8:
            j += 1
        V = vecs[:, i:j]
        R = np.concatenate([V.real, V.imag], axis=1)
        u, s, _ = np.linalg.svd(R, full_matrices=False)
        k = j - i
        if np.sum(s > 0.5 * s[0]) < k:
            raise MaslovError("failed to extract a real eigenbasis of a symmetric unitary")
        theta = float(np.angle(np.mean(vals[i:j])))
        for c in range(k):
            cols.append(u[:, c])
            angles.append(theta)
        i = j
    Q = orthonormal_columns(np.column_stack(cols))
    return Q, np.array(angles)


def _geodesic_point(f0: LagrangianFrame, f1: LagrangianFrame, s: float) -> LagrangianFrame:
    space = f0.space
    Z0 = f0.unitary()
    N = Z0.conj().T @ f1.unitary()
    Q, theta = _takagi_angles(N @ N.T)
    Zs = Z0 @ (Q * np.exp(0.5j * s * theta)) @ Q.T
    return lagrangian_from_span(space, space.frame_of(Zs))


def connecting_path(
    nu0: LagrangianFrame,
    nu1: LagrangianFrame,
    branch_shift: np.ndarray | None = None,
    nsamples: int = 17,
) -> LagrangianPath:
    """Geodesic path from nu0 to nu1 through the unitary representation.

    ``branch_shift`` adds multiples of 2*pi to the relative angles, selecting
    a homotopy class; any choice connects the same endpoints.
    """
    space = nu0.space
    Z0 = nu0.unitary()
    N = Z0.conj().T @ nu1.unitary()
    Q, theta = _takagi_angles(N @ N.T)
    if branch_shift is not None:
        theta = theta + _TWO_PI * np.asarray(branch_shift, dtype=float)

    def ev(t: float) -> LagrangianFrame:
        Zt = Z0 @ (Q * np.exp(0.5j * t * theta)) @ Q.T
        return lagrangian_from_span(space, space.frame_of(Zt))

    return LagrangianPath.from_evaluator(space, ev, nsamples=nsamples)


# ---------------------------------------------------------------------------
# reports


@dataclass
class IndexReport:
    """Integer index with its crossing log.

    ``crossings`` holds (t, crossing dimension, signed contribution); the
    value always equals the sum of the contributions.
    """

    value: int
    crossings: list[tuple[float, int, int]]
    method: str

    def __post_init__(self):
        if self.value != sum(c[2] for c in self.crossings):
            raise ValueError("index value does not match its crossing log")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "crossings": [
                {"t": t, "dim": d, "contribution": c} for t, d, c in self.crossings
            ],
        }


def _mirror_report(report: IndexReport) -> IndexReport:
    crossings = [(1.0 - t, d, -c) for t, d, c in reversed(report.crossings)]
    return IndexReport(-report.value, crossings, report.method)


# ---------------------------------------------------------------------------
# Maslov index, unitary-winding algorithm


def _eigenangles(U: np.ndarray) -> np.ndarray:
    return np.angle(np.linalg.eigvals(U))


def _match_angles(prev: np.ndarray, new: np.ndarray) -> np.ndarray:
    """Lift ``new`` (mod 2*pi) continuing the lifted branch values ``prev``."""
    n = len(prev)
    diff = new[None, :] - prev[:, None]
    wrapped = np.abs((diff + math.pi) % _TWO_PI - math.pi)
    rows, cols = linear_sum_assignment(wrapped)
    lifted = np.empty(n)
    for r, c in zip(rows, cols):
        d = (new[c] - prev[r] + math.pi) % _TWO_PI - math.pi
        lifted[r] = prev[r] + d
    return lifted


_ANGLE_STEP = 1.2  # max accepted eigenangle movement per sample step


class _AnglePath:
    """Lifted eigenangle branches of U(t) = -W_c(t) conj(W_ref) along a path."""

    def __init__(self, path: LagrangianPath, ref: LagrangianFrame):
        self.path = path
        self.wref_conj = ref.w_matrix().conj()
        self.cache: dict[float, np.ndarray] = {}

    def raw(self, t: float, frame: LagrangianFrame | None = None) -> np.ndarray:
        key = round(t, 15)
        if key not in self.cache:
            f = frame if frame is not None else self.path.at(t)
            self.cache[key] = _eigenangles(-(f.w_matrix() @ self.wref_conj))
        return self.cache[key]

    def lifted_track(self) -> tuple[np.ndarray, np.ndarray]:
        """Angles lifted along the stored samples, refining until steps are small."""
        for _round in range(60):
            ts = np.array([t for t, _ in self.path.samples])
            raws = [self.raw(t, f) for t, f in self.path.samples]
            lifted = [np.sort(raws[0])]
            split_at = None
            for i in range(1, len(ts)):
                nxt = _match_angles(lifted[-1], raws[i])
                if np.abs(nxt - lifted[-1]).max() > _ANGLE_STEP:
                    split_at = i
                    break
                lifted.append(nxt)
            if split_at is None:
                return ts, np.array(lifted)
            t_mid = 0.5 * (ts[split_at - 1] + ts[split_at])
            if ts[split_at] - ts[split_at - 1] <= conv.MIN_PARAM_STEP:
                raise MaslovError("eigenangle tracking failed", t=t_mid)
            self.path.insert(t_mid)
        raise MaslovError("eigenangle tracking did not stabilize")

    def branch_at(self, t: float, guess: float) -> float:
        """Lifted value near ``guess`` of the branch passing through it."""
        raw = self.raw(t)
        d = (raw - guess + math.pi) % _TWO_PI - math.pi
        return guess + d[np.argmin(np.abs(d))]


def _snap_levels(lifted: np.ndarray) -> np.ndarray:
    """Snap lifted angles within 1e-8 of a crossing level pi + 2*pi*k."""
    k = np.round((lifted - math.pi) / _TWO_PI)
    level = math.pi + _TWO_PI * k
    return np.where(np.abs(lifted - level) < 1e-8, level, lifted)


def _level_count(theta: float) -> int:
    """Number of crossing levels in (-inf, theta]; differences count crossings."""
    r = (theta - math.pi) / _TWO_PI
    rr = round(r)
    if abs(r - rr) < 1e-12:
        r = rr
    return math.ceil(r)


def maslov_unitary(
    path: LagrangianPath,
    ref: LagrangianFrame,
    convention: str = conv.DEFAULT_CONVENTION,
) -> IndexReport:
    """Maslov index as net winding of unitary eigenvalues through -1.

    Each Lagrangian c(t) is written as U(t) * ref with U(t) unitary on the
    complexification; intersections with the reference occur where an
    eigenvalue of the relative unitary sits at -1, and the index is the net
    signed count of eigenvalues passing through -1 (counterclockwise minus
    clockwise), with the endpoint convention of :mod:`splitflow.conventions`.
    """
    conv.check_convention(convention)
    if convention == "rclo":
        return _mirror_report(maslov_unitary(path.reversed(), ref, "lcro"))
    tracker = _AnglePath(path, ref)
    ts, lifted = tracker.lifted_track()
    lifted = _snap_levels(lifted)
    crossings: list[tuple[float, int, int]] = []
    nbranch = lifted.shape[1]
    for m in range(nbranch):
        for i in range(len(ts) - 1):
            a, b = lifted[i, m], lifted[i + 1, m]
            dc = _level_count(b) - _level_count(a)
            if dc == 0:
                continue
            step = 1 if dc > 0 else -1
            ca, cb = _level_count(a), _level_count(b)
            levels = range(ca + 1, cb + 1) if dc > 0 else range(ca, cb, -1)
            for k in levels:
                level = math.pi + _TWO_PI * (k - 1)
                t_star = _locate_level(tracker, ts[i], a, ts[i + 1], b, level)
                crossings.append((t_star, 1, step))
    crossings.sort()
    merged = _merge_crossings(crossings)
    value = sum(c[2] for c in merged)
    return IndexReport(value, merged, "unitary-winding")


def _locate_level(tracker, t0, th0, t1, th1, level, iters: int = 48) -> float:
    if th0 == level:
        return t0
    if th1 == level:
        return t1
    for _ in range(iters):
        if t1 - t0 < 1e-12:
            break
        tm = 0.5 * (t0 + t1)
        thm = tracker.branch_at(tm, 0.5 * (th0 + th1))
        if (th0 - level) * (thm - level) <= 0.0:
            t1, th1 = tm, thm
        else:
            t0, th0 = tm, thm
    return 0.5 * (t0 + t1)


def _merge_crossings(crossings, tol: float = 1e-7):
    merged: list[tuple[float, int, int]] = []
    for t, d, c in crossings:
        if merged and abs(merged[-1][0] - t) < tol:
            t0, d0, c0 = merged[-1]
            merged[-1] = (t0, d0 + d, c0 + c)
        else:
            merged.append((t, d, c))
    return merged


# ---------------------------------------------------------------------------
# Maslov index, crossing-form algorithm


def _min_sine(frame: LagrangianFrame, ref: LagrangianFrame) -> float:
    resid = frame.frame - ref.frame @ (ref.frame.T @ frame.frame)
    s = np.linalg.svd(resid, compute_uv=False)
    return float(s.min())


def _graph_chart(base: LagrangianFrame, frame: LagrangianFrame) -> np.ndarray:
    """Symmetric matrix of the graph of ``frame`` over ``base`` in the J-chart."""
    space = base.space
    X = base.frame.T @ frame.frame
    Y = (space.J @ base.frame).T @ frame.frame
    A = Y @ np.linalg.inv(X)
    return 0.5 * (A + A.T)


def _crossing_form(path: LagrangianPath, t_star: float, vectors: np.ndarray, h: float):
    """Finite-difference derivative of the chart form on intersection vectors."""
    base = path.at(min(max(t_star, 0.0), 1.0))
    xi = base.frame.T @ vectors
    if t_star - h < 0.0:
        stencil = [(t_star, -3.0), (t_star + h, 4.0), (t_star + 2 * h, -1.0)]
        scale = 1.0 / (2.0 * h)
    elif t_star + h > 1.0:
        stencil = [(t_star, 3.0), (t_star - h, -4.0), (t_star - 2 * h, 1.0)]
        scale = 1.0 / (2.0 * h)
    else:
        stencil = [(t_star - h, -1.0), (t_star + h, 1.0)]
        scale = 1.0 / (2.0 * h)
    Q = np.zeros((vectors.shape[1], vectors.shape[1]))
    for t, w in stencil:
        A = _graph_chart(base, path.at(t))
        Q += w * (xi.T @ A @ xi)
    return Q * scale


def _detect_crossings(path: LagrangianPath, ref: LagrangianFrame):
    """Crossing points and persistent stretches of the path in the Maslov cycle.

    Returns a pair ``(points, regions)``: isolated parameters where the path
    meets the cycle of ``ref``, and maximal intervals along which the
    intersection persists (e.g. for a constant path equal to the reference).
    Intervals are split adaptively until the minimum of the principal-angle
    sine is either provably positive (via an empirical speed bound: the sine
    is 1-Lipschitz in the gap metric) or pinned to a crossing.
    """
    path.refine_to(conv.DETECT_GAP)
    ts = [t for t, _ in path.samples]
    gs = [_min_sine(f, ref) for _, f in path.samples]
    speed = 4.0 * max(
        gap_distance(f0, f1) / (t1 - t0)
        for (t0, f0), (t1, f1) in zip(path.samples, path.samples[1:])
    )
    speed = max(speed, 1e-6)
    in_cycle = lambda t: _min_sine(path.at(t), ref) < conv.RANK_TOL

    # Persistent regions: maximal runs of in-cycle samples whose gaps stay in
    # the cycle as well; boundaries located by bisection.
    flagged = [g < conv.RANK_TOL for g in gs]
    regions: list[tuple[float, float]] = []
    i = 0
    while i < len(ts):
        if not flagged[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(ts) and flagged[j + 1] and in_cycle(0.5 * (ts[j] + ts[j + 1])):
            j += 1
        if j > i:
            a = ts[i] if i == 0 else _bisect_edge(in_cycle, ts[i - 1], ts[i])
            b = ts[j] if j == len(ts) - 1 else _bisect_edge(in_cycle, ts[j + 1], ts[j])
            regions.append((a, b))
        i = j + 1

    def in_region(t):
        return any(a - 1e-9 <= t <= b + 1e-9 for a, b in regions)

    candidates: list[tuple[float, float]] = []

    def scan(t0, g0, t1, g1, depth):
        if min(g0, g1) > 0.6 * speed * (t1 - t0) + 10 * conv.RANK_TOL:
            return
        if in_region(t0) and in_region(t1):
            return
        if t1 - t0 < 2e-4 or depth > 24:
            candidates.append((t0, t1))
            return
        tm = 0.5 * (t0 + t1)
        gm = _min_sine(path.at(tm), ref)
        scan(t0, g0, tm, gm, depth + 1)
        scan(tm, gm, t1, g1, depth + 1)

    def _pin(a, b):
        # golden-section polish of the sine minimum on [a, b]
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc = _min_sine(path.at(c), ref)
        fd = _min_sine(path.at(d), ref)
        while b - a > 1e-12:
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = _min_sine(path.at(c), ref)
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = _min_sine(path.at(d), ref)
        return 0.5 * (a + b)

    found: list[float] = []

    def hunt(a, b, depth):
        # one golden pin per candidate stretch; exclude the hit, look beside
        if b - a < 1e-9 or depth > 3:
            return
        t_star = _pin(a, b)
        if _min_sine(path.at(t_star), ref) < 1e-9 and not in_region(t_star):
            found.append(t_star)
            hunt(a, t_star - 1e-7, depth + 1)
            hunt(t_star + 1e-7, b, depth + 1)

    for e, g in ((0.0, gs[0]), (1.0, gs[-1])):
        if g < conv.RANK_TOL and not in_region(e):
            found.append(e)
    for i in range(len(ts) - 1):
        scan(ts[i], gs[i], ts[i + 1], gs[i + 1], 0)
    candidates.sort()
    merged: list[list[float]] = []
    for a, b in candidates:
        if merged and a - merged[-1][1] < 2e-4:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    for a, b in merged:
        hunt(max(0.0, a - 1e-4), min(1.0, b + 1e-4), 0)
    found.sort()
    dedup: list[float] = []
    for t in found:
        if (not dedup or t - dedup[-1] > 1e-7) and not in_region(t):
            dedup.append(t)
    return dedup, regions


def _bisect_edge(pred, t_false, t_true, iters: int = 48):
    """Boundary between pred-false at ``t_false`` and pred-true at ``t_true``."""
    a, b = t_false, t_true
    for _ in range(iters):
        if abs(b - a) < 1e-12:
            break
        m = 0.5 * (a + b)
        if pred(m):
            b = m
        else:
            a = m
    return 0.5 * (a + b)


def maslov_crossing(
    path: LagrangianPath,
    ref: LagrangianFrame,
    convention: str = conv.DEFAULT_CONVENTION,
) -> IndexReport:
    """Maslov index by quadratic crossing forms in local graph charts.

    At every parameter where the path meets the Maslov cycle of ``ref`` the
    quadratic form (d/dt of the graph chart over the current plane,
    restricted to the intersection) is differentiated by finite differences;
    interior crossings add their signature, with the endpoint rule of
    :mod:`splitflow.conventions`.  Directions along which the intersection
    persists on both sides contribute nothing and are excluded; a singular
    crossing form on the remaining directions raises :class:`MaslovError`.
    """
    conv.check_convention(convention)
    if convention == "rclo":
        return _mirror_report(maslov_crossing(path.reversed(), ref, "lcro"))
    crossings: list[tuple[float, int, int]] = []
    points, regions = _detect_crossings(path, ref)
    for t_star in points:
        frame = path.at(t_star)
        vectors = intersection_basis(frame, ref)
        m = vectors.shape[1]
        if m == 0:
            continue
        cross_vecs, _ = _strip_persistent(path, ref, t_star, vectors)
        contrib = 0
        if cross_vecs.shape[1] > 0:
            contrib = _signed_contribution(path, t_star, cross_vecs)
        crossings.append((t_star, m, contrib))
    for a, b in regions:
        # A stretch inside the cycle contributes only where the intersection
        # appears or disappears: arrivals from above count -1 at the entry,
        # departures upward count +1 at the exit (the lcro rule for an
        # eigenvalue branch dwelling at the crossing level).
        if a > 1e-9:
            vecs = intersection_basis(path.at(a), ref)
            if vecs.shape[1]:
                Q = _one_sided_form(path, a, vecs, before=True)
                crossings.append((a, vecs.shape[1], -int(np.sum(np.linalg.eigvalsh(Q) < 0))))
        if b < 1.0 - 1e-9:
            vecs = intersection_basis(path.at(b), ref)
            if vecs.shape[1]:
                Q = _one_sided_form(path, b, vecs, before=False)
                crossings.append((b, vecs.shape[1], int(np.sum(np.linalg.eigvalsh(Q) > 0))))
    crossings.sort()
    value = sum(c[2] for c in crossings)
    return IndexReport(value, crossings, "crossing-form")


def _one_sided_form(path, t_star, vectors, before: bool, h: float = 1e-5):
    base = path.at(t_star)
    xi = base.frame.T @ vectors
    sgn = -1.0 if before else 1.0
    pts = [(t_star, -3.0), (t_star + sgn * h, 4.0), (t_star + 2 * sgn * h, -1.0)]
    Q = np.zeros((vectors.shape[1], vectors.shape[1]))
    for t, w in pts:
        A = _graph_chart(base, path.at(t))
        Q += w * (xi.T @ A @ xi)
    return Q * (sgn / (2.0 * h))


def _strip_persistent(path, ref, t_star, vectors, probe: float = 2e-4):
    """Split intersection directions into persistent and genuinely crossing."""
    keep = []
    n_persist = 0
    sides = []
    for tp in (t_star - probe, t_star + probe):
        if 0.0 <= tp <= 1.0:
            sides.append(intersection_basis(path.at(tp), ref))
    for j in range(vectors.shape[1]):
        v = vectors[:, j]
        persistent = bool(sides) and all(
            S.shape[1] > 0 and np.linalg.norm(v - S @ (S.T @ v)) < 1e-5 for S in sides
        )
        if persistent:
            n_persist += 1
        else:
            keep.append(v)
    if not keep:
        return np.zeros((vectors.shape[0], 0)), n_persist
    return np.column_stack(keep), n_persist


def _signed_contribution(path, t_star, vectors) -> int:
    last_err = None
    for h in (1e-5, 1e-4, 3e-6):
        Q = _crossing_form(path, t_star, vectors, h)
        evals = np.linalg.eigvalsh(Q)
        scale = max(1.0, np.abs(evals).max())
        if np.abs(evals).min() < conv.CROSSING_REG_TOL * scale:
            last_err = MaslovError("non-regular crossing", t=t_star)
            continue
        n_pos = int(np.sum(evals > 0))
        n_neg = int(np.sum(evals < 0))
        if t_star < 1e-9:
            return n_pos
        if t_star > 1.0 - 1e-9:
            return -n_neg
        return n_pos - n_neg
    raise last_err


# ---------------------------------------------------------------------------
# Hormander index and the transversal mirror path


def hormander_index(
    nu0: LagrangianFrame,
    nu1: LagrangianFrame,
    lam: LagrangianFrame,
    mu: LagrangianFrame,
    convention: str = conv.DEFAULT_CONVENTION,
    path: LagrangianPath | None = None,
    endpoint_weights: str = "path",
) -> int:
    """Hormander index of four Lagrangians as a Maslov difference.

    With ``endpoint_weights="path"`` this is literally
    Mas(c, lam) - Mas(c, mu) along any path c from nu0 to nu1, evaluated
    under the package endpoint convention; the difference does not depend
    on the connecting path (a geodesic through the unitary representation
    by default), because the asymmetric endpoint weights contribute terms
    depending only on the endpoint positions.

    With ``endpoint_weights="symmetric"`` the endpoint crossings are
    reweighted to half signatures, which adds the half-dimension correction

        -(dim(nu0 ∩ lam) - dim(nu1 ∩ lam) - dim(nu0 ∩ mu) + dim(nu1 ∩ mu))/2.

    The two agree whenever the endpoints are transversal to both
    references.  The symmetric weighting is the classical four-Lagrangian
    index; it is skew under swapping the pair (nu0, nu1) with (lam, mu) in
    all positions, degenerate ones included, which is what the vanishing
    certificates rely on.
    """
    if path is None:
        path = connecting_path(nu0, nu1)
    a = maslov_unitary(path, lam, convention)
    b = maslov_unitary(path, mu, convention)
    raw = a.value - b.value
    if endpoint_weights == "path":
        return raw
    if endpoint_weights != "symmetric":
        raise ValueError("endpoint_weights must be 'path' or 'symmetric'")
    bracket = (
        intersection_dim(nu0, lam)
        - intersection_dim(nu1, lam)
        - intersection_dim(nu0, mu)
        + intersection_dim(nu1, mu)
    )
    twice = 2 * raw - bracket
    if twice % 2:
        raise MaslovError("symmetric index failed to be an integer")
    return twice // 2


def transversal_connecting_path(
    plus: LagrangianFrame, minus: LagrangianFrame, T: np.ndarray | float
) -> LagrangianPath:
    """Path of graphs over ``minus`` joining ``minus`` to the mirror of graph(T).

    ``minus`` must be the J-image of ``plus``; ``T`` generates a Lagrangian
    graph over ``plus`` (symmetric in frame coordinates).  The path
    t -> graph(-t JTJ) stays transversal to graph(T) and to ``plus`` for all
    t in [0, 1]; each sample is checked and a violation raises a diagnostic.
    """
    space = plus.space
    n = space.half
    T = np.atleast_2d(np.asarray(T, dtype=float))
    if gap_distance(LagrangianFrame(space, orthonormal_columns(space.J @ plus.frame)), minus) > 1e-9:
        raise ValueError("minus frame must be the J-image of the plus frame")
    if np.abs(T - T.T).max() > 1e-10 * max(1.0, np.abs(T).max()):
        raise ValueError("graph generator must be symmetric for a J-paired graph")
    P_plus = plus.frame
    P_minus = space.J @ P_plus  # use the exact J-image as the minus frame
    graph_T = lagrangian_from_span(space, P_plus + P_minus @ T)

    def ev(t: float) -> LagrangianFrame:
        return lagrangian_from_span(space, P_minus - t * (P_plus @ T))

    path = LagrangianPath.from_evaluator(space, ev, nsamples=9)
    plus_ref = LagrangianFrame(space, orthonormal_columns(P_plus))
    for t, f in path.samples:
        if intersection_dim(f, graph_T) != 0 or intersection_dim(f, plus_ref) != 0:
            raise MaslovError("mirror path lost transversality", t=t)
    return path


# ---------------------------------------------------------------------------
# seeded generators (used by tests, sweeps and the CLI)


def random_lagrangian(space: SymplecticSpace, rng: np.random.Generator) -> LagrangianFrame:
    n = space.half
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Z, _ = np.linalg.qr(g)
    return lagrangian_from_span(space, space.frame_of(Z))


def random_path(
    space: SymplecticSpace,
    rng: np.random.Generator,
    loop: bool = False,
    swing: float = 2.5,
) -> LagrangianPath:
    """Seeded smooth random path (a loop when ``loop`` is set)."""
    n = space.half
    Z0 = random_lagrangian(space, rng).unitary()
    q = np.linalg.qr(rng.normal(size=(n, n)))[0]
    if loop:
        rates = math.pi * rng.integers(-2, 3, size=n)
    else:
        rates = rng.uniform(-swing, swing, size=n)
    amp = rng.uniform(-0.8, 0.8, size=n)

    def ev(t: float) -> LagrangianFrame:
        ang = rates * t + amp * math.sin(math.pi * t)
        Zt = Z0 @ (q * np.exp(1j * ang)) @ q.T
        return lagrangian_from_span(space, space.frame_of(Zt))

    return LagrangianPath.from_evaluator(space, ev, nsamples=9, budget=8000)
