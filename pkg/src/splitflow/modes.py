"""Truncated sequence model of the boundary trace spaces.

A tangential spectrum is a finite symmetric family {l_k} (k = 1..K, with
l_{-k} = -l_k) together with a count of zero-mode pairs; the bundle
rotation pairs mode k with mode -k.  Trace spaces are modelled in weighted
coordinates: the abstract coefficient c_k of mode k carries the coordinate
w_k c_k where

    side "minus":  w_k = l_k^{1/2} (k > 0),  w_{-k} = l_k^{-1/2},
    side "plus":   the exponents swapped,
    side "l2":     all weights one,

and zero modes always weigh one.  In these coordinates every side carries
the standard symplectic form (the weight products across a pair equal one),
so one Lagrangian/Maslov toolkit serves all sides, and the analytic content
sits in the diagonal comparison maps between sides, whose entries decay
like the weight ratios.

The half-cylinder solution model: each mode pair evolves under the same
rank-2 system as the circle model with collar parameter l_k, so boundary
traces of solution spaces are computed pair-by-pair with the transfer
kernels and assembled into block Lagrangians.  Their projectors are
compared against the spectral (nonnegative-mode) projector over a sweep of
truncation orders; stabilization of the fixed-rank singular values is the
truncation-level evidence that the two boundary conditions differ compactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import conventions as conv
from .errors import ConfigError, DiagnosticError
from .kernels import transfer_pwc
from .symplectic import (
    IndexReport,
    LagrangianFrame,
    LagrangianPath,
    SymplecticSpace,
    intersection_dim,
    lagrangian_from_span,
    maslov_unitary,
    orthonormal_columns,
    standard_space,
)

__all__ = [
    "TangentialSpectrum",
    "TraceSpace",
    "ModeVector",
    "ReductionSetup",
    "circle_spectrum",
    "spectrum_to_json",
    "spectrum_from_json",
    "sobolev_norm",
    "aps_projector",
    "reduction_setup",
    "reduce_lagrangian",
    "split_and_reduce",
    "choose_finite_correction",
    "projection_difference_report",
    "mode_cauchy_lagrangian",
    "block_rotation_path",
    "stabilization_table",
]


@dataclass(frozen=True)
class TangentialSpectrum:
    """Symmetric eigenvalue family of the tangential operator, truncated.

    ``ells[k-1]`` is the eigenvalue of mode k for k = 1..K; mode -k carries
    ``-ells[k-1]``.  The first ``n_zero`` pairs are zero modes; the bundle
    rotation sends mode k to mode -k and mode -k to -(mode k).
    """

    K: int
    ells: np.ndarray
    n_zero: int = 0

    def __post_init__(self):
        ells = np.asarray(self.ells, dtype=float)
        object.__setattr__(self, "ells", ells)
        if ells.shape != (self.K,):
            raise ConfigError("spectrum needs one eigenvalue per positive mode")
        if np.any(ells[: self.n_zero] != 0.0):
            raise ConfigError("zero-mode eigenvalues must vanish")
        if np.any(ells[self.n_zero :] <= 0.0):
            raise ConfigError("nonzero modes must carry positive eigenvalues")

    def ell(self, k: int) -> float:
        if k == 0 or abs(k) > self.K:
            raise KeyError(f"mode {k} outside the truncation")
        return float(self.ells[k - 1]) if k > 0 else -float(self.ells[-k - 1])

    def truncated(self, K: int) -> "TangentialSpectrum":
        if K > self.K:
            raise ConfigError("cannot extend a truncated spectrum")
        return TangentialSpectrum(K, self.ells[:K], min(self.n_zero, K))


def circle_spectrum(K: int, n_zero: int = 0) -> TangentialSpectrum:
    """Integer tangential spectrum l_k = k - n_zero (zero modes first)."""
    ells = np.concatenate([np.zeros(n_zero), np.arange(1, K - n_zero + 1, dtype=float)])
    return TangentialSpectrum(K, ells, n_zero)


def spectrum_to_json(spec: TangentialSpectrum) -> str:
    return json.dumps(
        {
            "K": spec.K,
            "N0": spec.n_zero,
            "entries": [[k + 1, spec.ells[k]] for k in range(spec.K)],
        },
        indent=1,
    )


def spectrum_from_json(text: str) -> TangentialSpectrum:
    try:
        data = json.loads(text)
        unknown = set(data) - {"K", "N0", "entries"}
        if unknown:
            raise ConfigError(f"unknown spectrum keys: {sorted(unknown)}")
        K = int(data["K"])
        ells = np.zeros(K)
        for k, l in data["entries"]:
            if k < 0:
                continue
            ells[int(k) - 1] = float(l)
        return TangentialSpectrum(K, ells, int(data.get("N0", 0)))
    except (KeyError, ValueError, TypeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"malformed spectrum file: {exc}") from exc


_SIDES = ("minus", "plus", "l2")


@dataclass(frozen=True)
class TraceSpace:
    """One weighted realization of the truncated boundary space.

    Coordinates are ordered (modes +1..+K, modes -1..-K); in them the
    symplectic form is standard, and the nonnegative/negative coordinate
    planes are the two canonical transversal Lagrangians.
    """

    spectrum: TangentialSpectrum
    side: str

    def __post_init__(self):
        if self.side not in _SIDES:
            raise ConfigError(f"unknown trace-space side {self.side!r}")

    @property
    def dim(self) -> int:
        return 2 * self.spectrum.K

    def weights(self) -> np.ndarray:
        """Per-mode weights, ordered (+1..+K, -1..-K)."""
        l = np.abs(self.spectrum.ells)
        safe = np.where(l > 0, l, 1.0)
        if self.side == "l2":
            wp = np.ones_like(safe)
            wm = np.ones_like(safe)
        elif self.side == "minus":
            wp = np.sqrt(safe)
            wm = 1.0 / np.sqrt(safe)
        else:
            wp = 1.0 / np.sqrt(safe)
            wm = np.sqrt(safe)
        wp = np.where(l > 0, wp, 1.0)
        wm = np.where(l > 0, wm, 1.0)
        return np.concatenate([wp, wm])

    def space(self) -> SymplecticSpace:
        return standard_space(self.dim)

    def plus_plane(self) -> LagrangianFrame:
        K = self.spectrum.K
        f = np.zeros((2 * K, K))
        f[:K] = np.eye(K)
        return LagrangianFrame(self.space(), f)

    def minus_plane(self) -> LagrangianFrame:
        K = self.spectrum.K
        f = np.zeros((2 * K, K))
        f[K:] = np.eye(K)
        return LagrangianFrame(self.space(), f)


@dataclass(frozen=True)
class ModeVector:
    """Finite coefficient vector over the modes (+1..+K, -1..-K)."""

    spectrum: TangentialSpectrum
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        object.__setattr__(self, "coeffs", c)
        if c.shape != (2 * self.spectrum.K,):
            raise ConfigError("coefficient vector has wrong length")

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def trace_norm(self, side: str) -> float:
        w = TraceSpace(self.spectrum, side).weights()
        return float(np.linalg.norm(w * self.coeffs))


def sobolev_norm(v: ModeVector, s: float) -> float:
    """Sobolev norm of order s; zero modes weigh like eigenvalue one."""
    l = np.abs(v.spectrum.ells)
    scale = np.maximum(l, 1.0) ** (2.0 * s)
    scale = np.concatenate([scale, scale])
    return float(math.sqrt(np.sum(v.coeffs**2 * scale)))


def aps_projector(space: TraceSpace) -> np.ndarray:
    """Orthogonal projector onto the nonnegative-mode coordinate plane.

    Zero-mode pairs are split by the fixed rule sending modes +1..+n_zero to
    the plus side and their rotation images to the minus side, so the range
    is the full span of the positive-index modes.
    """
    K = space.spectrum.K
    P = np.zeros((2 * K, 2 * K))
    P[:K, :K] = np.eye(K)
    return P


# ---------------------------------------------------------------------------
# reduction between two weighted realizations


@dataclass(frozen=True)
class ReductionSetup:
    """Polarized comparison of two weighted realizations of the same modes.

    ``diag`` holds the entries of the two injections in weighted
    coordinates: plus modes of the small space map into plus modes of the
    big space, and minus modes of the big space map into minus modes of the
    small one, both with the same diagonal (which is what makes the pairing
    identity omega_big(i_plus a, x) = omega_small(a, i_minus x) hold).
    """

    big: TraceSpace
    small: TraceSpace
    diag: np.ndarray
    correction_modes: tuple[int, ...] = field(default_factory=tuple)

    @property
    def K(self) -> int:
        return self.big.spectrum.K

    def i_plus_matrix(self) -> np.ndarray:
        """Small plus-part into big plus-part (weighted coordinates)."""
        return np.diag(self.diag)

    def i_minus_matrix(self) -> np.ndarray:
        """Big minus-part into small minus-part (weighted coordinates)."""
        return np.diag(self.diag)

    def pairing_residual(self, rng: np.random.Generator, samples: int = 1000) -> float:
        """max |omega_big(i+ a, x) - omega_small(a, i- x)| over random pairs."""
        K = self.K
        Jb = self.big.space().J
        Js = self.small.space().J
        worst = 0.0
        for _ in range(samples):
            a = rng.normal(size=K)
            x = rng.normal(size=K)
            u = np.concatenate([self.diag * a, np.zeros(K)])
            v = np.concatenate([np.zeros(K), x])
            lhs = float((Jb @ u) @ v)
            u2 = np.concatenate([a, np.zeros(K)])
            v2 = np.concatenate([np.zeros(K), self.diag * x])
            rhs = float((Js @ u2) @ v2)
            worst = max(worst, abs(lhs - rhs))
        return worst


def reduction_setup(spec: TangentialSpectrum, big: str = "plus", small: str = "minus") -> ReductionSetup:
    """Canonical reduction pair between two weighted realizations.

    The injections must be contractions on the truncation (the compactness
    direction); pairs needing the opposite mode polarity (e.g. the minus
    realization against the flat one) are the same setup after relabelling
    the modes k <-> -k, so only the contracting orientation is built.
    """
    bs = TraceSpace(spec, big)
    ss = TraceSpace(spec, small)
    K = spec.K
    wb, ws = bs.weights(), ss.weights()
    d_plus = wb[:K] / ws[:K]
    d_minus = ws[K:] / wb[K:]
    if np.abs(d_plus - d_minus).max() > 1e-12:
        raise ConfigError("weight systems do not admit a compatible reduction pair")
    if np.any(d_plus > 1.0 + 1e-12):
        raise ConfigError(
            "injections must contract; swap the mode polarity of this pair"
        )
    return ReductionSetup(bs, ss, d_plus)


def reduce_lagrangian(
    setup: ReductionSetup, frame: LagrangianFrame, log_position: bool = True
) -> LagrangianFrame:
    """Carry a Lagrangian of the big realization into the small one.

    Solves, mode block by mode block, the membership constraints: a vector
    b + a of the small space belongs to the image exactly when some
    x in the big minus-plane satisfies i_plus(b) + x in the subspace and
    a = i_minus(x).  With invertible truncated injections this eliminates to
    rescaling the plus block by 1/d and the minus block by d.
    """
    K = setup.K
    F = frame.frame
    if F.shape != (2 * K, K):
        raise ConfigError("frame does not match the reduction setup")
    pre = np.vstack([F[:K] / setup.diag[:, None], F[K:] * setup.diag[:, None]])
    try:
        return lagrangian_from_span(setup.small.space(), pre)
    except ValueError as exc:
        position = ""
        if log_position:
            m = intersection_dim(frame, setup.big.minus_plane().in_space(frame.space))
            position = f"; reference intersection {m}"
        raise DiagnosticError(
            f"reduction constraint system is rank deficient ({exc}{position})"
        ) from exc


def _block_angles(frame: np.ndarray, K: int) -> np.ndarray:
    """Principal direction angle (mod pi) of each mode-pair block."""
    top = frame[:K]
    bot = frame[K:]
    a = np.sum(top * top, axis=1)
    b = np.sum(top * bot, axis=1)
    c = np.sum(bot * bot, axis=1)
    return 0.5 * np.arctan2(2.0 * b, a - c)


def reduce_path(setup: ReductionSetup, path: LagrangianPath, max_sub: int = 512) -> LagrangianPath:
    """The image path under the reduction, sampled densely enough to track.

    Rescaling by the diagonal injections speeds up the angular motion of a
    mode-pair block by at most max(d_k^2, 1/d_k^2); a block can sweep half a
    turn (returning to the same line) inside an interval that looks short to
    the gap metric.  Each sample interval of the input is therefore
    subdivided according to the measured per-block rotation times the known
    amplification, which restores a faithful sampling of the image.
    """
    K = setup.K
    amp = np.maximum(setup.diag**2, 1.0 / setup.diag**2)
    small_space = setup.small.space()

    def reduced(t: float) -> LagrangianFrame:
        return reduce_lagrangian(setup, path.at(t), log_position=False)

    ts = [t for t, _ in path.samples]
    angles = [_block_angles(f.frame, K) for _, f in path.samples]
    times = [ts[0]]
    for (t0, a0), (t1, a1) in zip(zip(ts, angles), zip(ts[1:], angles[1:])):
        d = np.abs((a1 - a0 + 0.5 * math.pi) % math.pi - 0.5 * math.pi)
        need = int(np.ceil((amp * d).max() / 0.7))
        n = min(max(need, 1), max_sub)
        times.extend(t0 + (t1 - t0) * (np.arange(1, n + 1) / n))
    samples = [(float(t), reduced(float(t))) for t in times]
    budget = max(path.budget, 8 * len(samples))
    return LagrangianPath(small_space, samples, evaluator=reduced, budget=budget)


def split_and_reduce(
    setup: ReductionSetup,
    path: LagrangianPath,
    convention: str = conv.DEFAULT_CONVENTION,
) -> tuple[IndexReport, IndexReport]:
    """Maslov index against the minus plane, before and after reduction.

    Returns the pair of reports; the two integers agree (the reduction is a
    symplectic carrier of the intersection pattern).
    """
    big_ref = setup.big.minus_plane()
    before = maslov_unitary(path, big_ref, convention)
    rpath = reduce_path(setup, path)
    after = maslov_unitary(rpath, setup.small.minus_plane(), convention)
    return before, after


def choose_finite_correction(
    setup: ReductionSetup, target: LagrangianFrame, max_dim: int | None = None
) -> ReductionSetup:
    """Select paired finite defect spaces making the swapped plane transversal.

    Greedily grows a set S of mode pairs; the deformed minus-type plane
    keeps the minus modes outside S and swaps in the plus modes of S.  The
    procedure stops when that plane is transversal to ``target`` and records
    S on the returned setup (dim F = dim G = |S|).
    """
    K = setup.K
    space = setup.big.space()
    max_dim = K if max_dim is None else max_dim
    S: set[int] = set()
    for _ in range(max_dim + 1):
        plane = _swapped_plane(space, K, S)
        m = intersection_dim(target, plane)
        if m == 0:
            return ReductionSetup(setup.big, setup.small, setup.diag, tuple(sorted(S)))
        vecs = _intersection_vectors(target, plane)
        k_best, best = None, -1.0
        for v in vecs.T:
            for k in range(1, K + 1):
                weight = abs(v[K + k - 1]) if k not in S else abs(v[k - 1])
                if weight > best:
                    best, k_best = weight, k
        if k_best in S:
            S.remove(k_best)
        else:
            S.add(k_best)
    raise DiagnosticError("finite correction search exceeded the dimension bound")


def _swapped_plane(space, K, S) -> LagrangianFrame:
    cols = []
    for k in range(1, K + 1):
        e = np.zeros(2 * K)
        if k in S:
            e[k - 1] = 1.0
        else:
            e[K + k - 1] = 1.0
        cols.append(e)
    return LagrangianFrame(space, np.column_stack(cols))


def _intersection_vectors(a: LagrangianFrame, b: LagrangianFrame) -> np.ndarray:
    resid = b.frame - a.frame @ (a.frame.T @ b.frame)
    _, s, vt = np.linalg.svd(resid)
    cols = [b.frame @ vt[i] for i in range(len(s)) if s[i] < conv.RANK_TOL]
    return np.column_stack(cols) if cols else np.zeros((a.space.dim, 0))


def swapped_plane_projector(setup: ReductionSetup, role: str = "minus") -> np.ndarray:
    """Projector onto a coordinate plane with the correction modes swapped.

    ``role="minus"``: the deformed minus-type plane (minus modes outside the
    correction set, plus modes inside) used for the transversality repair.
    ``role="plus"``: its complement (plus modes outside, minus modes
    inside), whose projector differs from the nonnegative-mode projector by
    a rank 2*dim(correction) operator exactly.
    """
    K = setup.K
    P = np.zeros((2 * K, 2 * K))
    swap = role == "minus"
    for k in range(1, K + 1):
        inside = k in setup.correction_modes
        plus_index = inside if swap else not inside
        idx = (k - 1) if plus_index else (K + k - 1)
        P[idx, idx] = 1.0
    return P


# ---------------------------------------------------------------------------
# half-cylinder solution traces, mode by mode


_COLLAR_PACKED = np.array([0.0, 1.0, 0.0])  # (p, q, r) of [[0,1],[1,0]]


def mode_cauchy_lagrangian(
    spec: TangentialSpectrum,
    side: str = "minus",
    length: float = 1.0,
    bump: float = 4.0,
    tilt: float = 1.15,
    far_angle: float = 0.25 * math.pi,
) -> LagrangianFrame:
    """Boundary traces of the decaying half-cylinder solution spaces.

    Each mode pair evolves under the rank-2 system with collar parameter
    l_k plus a fixed interior bump whose stable flow direction is tilted by
    ``tilt`` away from the plus mode; the solution space on [0, length] is
    cut down by a far-end line at angle ``far_angle``, and its trace at the
    near end is a line per pair.  High modes align exponentially fast with
    the plus mode, so the resulting Lagrangian is a compact perturbation of
    the nonnegative-mode plane; low modes rotate substantially.
    """
    K = spec.K
    ts = TraceSpace(spec, side)
    w = ts.weights()
    lengths = np.array([0.25 * length, 0.5 * length, 0.25 * length])
    far = np.array([math.cos(far_angle), math.sin(far_angle)])
    rot = np.array([[math.cos(tilt), -math.sin(tilt)], [math.sin(tilt), math.cos(tilt)]])
    sigma = np.array([[0.0, -1.0], [1.0, 0.0]])
    vb = bump * sigma @ rot @ np.diag([1.0, -1.0]) @ rot.T
    vb_packed = np.array([vb[0, 0], vb[0, 1], vb[1, 1]])
    cols = np.zeros((2 * K, K))
    for k in range(1, K + 1):
        ell = spec.ells[k - 1]
        pots = np.array([
            ell * _COLLAR_PACKED,
            ell * _COLLAR_PACKED + vb_packed,
            ell * _COLLAR_PACKED,
        ])
        T = transfer_pwc(lengths, pots, np.array([0.0]))[0]
        # T has unit determinant, so its inverse is the adjugate; solving
        # directly is unstable once the hyperbolic growth exp(l_k length)
        # dwarfs the unit determinant.
        line = np.array([
            T[1, 1] * far[0] - T[0, 1] * far[1],
            -T[1, 0] * far[0] + T[0, 0] * far[1],
        ])
        if not np.all(np.isfinite(line)) or np.linalg.norm(line) == 0.0:
            line = np.array([1.0, 0.0])
        v = np.array([w[k - 1] * line[0], w[K + k - 1] * line[1]])
        v = v / np.linalg.norm(v)
        cols[k - 1, k - 1] = v[0]
        cols[K + k - 1, k - 1] = v[1]
    return LagrangianFrame(ts.space(), cols)


def block_rotation_path(
    spec: TangentialSpectrum,
    rng: np.random.Generator,
    n_active: int = 3,
    max_turns: int = 2,
    max_mode: int | None = None,
) -> LagrangianPath:
    """Seeded block-diagonal path: a line per mode pair, a few pairs rotating.

    ``max_mode`` restricts the rotating pairs to low modes, which keeps the
    post-reduction angular amplification (and hence the sampling cost of the
    reduced path) bounded.
    """
    K = spec.K
    ts = TraceSpace(spec, "plus")
    space = ts.space()
    base = rng.uniform(0.0, math.pi, size=K)
    rates = np.zeros(K)
    pool = K if max_mode is None else min(max_mode, K)
    active = rng.choice(pool, size=min(n_active, pool), replace=False)
    rates[active] = math.pi * rng.integers(-max_turns, max_turns + 1, size=len(active))
    rates[active] += rng.uniform(-0.4, 0.4, size=len(active))

    def ev(t: float) -> LagrangianFrame:
        ang = base + rates * t
        cols = np.zeros((2 * K, K))
        cols[np.arange(K), np.arange(K)] = np.cos(ang)
        cols[K + np.arange(K), np.arange(K)] = np.sin(ang)
        return LagrangianFrame(space, cols)

    return LagrangianPath.from_evaluator(space, ev, nsamples=17, budget=20000)


# ---------------------------------------------------------------------------
# projector comparison over a truncation sweep


def projection_difference_report(
    pair_at: "callable",
    sweep: tuple[int, ...] = (16, 32, 64, 128),
    top: int = 12,
) -> dict:
    """Singular-value table of P - Q across a truncation sweep.

    ``pair_at(K)`` returns the two projector matrices at truncation K,
    consistently defined across the sweep (same underlying family).  The
    report carries, per K: the operator norm, the leading singular values,
    and the count above one half; plus the numerical rank of the difference
    (singular values above 1e-10).
    """
    rows = []
    for K in sweep:
        P, Q = pair_at(K)
        if P.shape != Q.shape:
            raise ConfigError("projector pair shapes differ within the sweep")
        s = np.linalg.svd(P - Q, compute_uv=False)
        rows.append(
            {
                "K": K,
                "op_norm": float(s[0]) if len(s) else 0.0,
                "singular_values": [float(x) for x in s[:top]],
                "count_above_half": int(np.sum(s > 0.5)),
                "numerical_rank": int(np.sum(s > 1e-10)),
            }
        )
    return {"sweep": list(sweep), "rows": rows}


def stabilization_table(report: dict, j_max: int = 8) -> dict:
    """Relative change of the j-th singular value over the last sweep step."""
    rows = report["rows"]
    if len(rows) < 2:
        raise ConfigError("stabilization needs at least two truncation orders")
    a = rows[-2]["singular_values"]
    b = rows[-1]["singular_values"]
    changes = {}
    for j in range(min(j_max, len(a), len(b))):
        denom = max(abs(b[j]), 1e-300)
        changes[j + 1] = abs(a[j] - b[j]) / denom if b[j] > 1e-12 else 0.0
    counts = [r["count_above_half"] for r in rows]
    return {
        "relative_changes": changes,
        "max_relative_change": max(changes.values()) if changes else 0.0,
        "counts_above_half": counts,
        "counts_constant": len(set(counts)) == 1,
    }
