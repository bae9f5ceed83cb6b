"""One-parameter families of rank-2 selfadjoint systems on the circle.

The base operator is ``sigma d/du`` on the 2pi-circle with
``sigma = [[0,-1],[1,0]]``; the family adds a symmetric potential
``C(u, t)``, continuous in the deformation parameter ``t`` and piecewise
constant or smooth in ``u``.  The circle is cut at ``u = 0`` and ``u = pi``
into the arcs ``minus = [0, pi]`` and ``plus = [pi, 2pi]``.

Product structure at the cuts: on collar windows covering 10% of each arc on
both sides of each cut, ``C`` is constant in ``u`` and of the form
``beta * [[0,1],[1,0]]``, which makes the operator equal to
``sigma (d/du + beta diag(1,-1))`` there.  The family stores the collar
parameters ``b0`` (at t = 0) and ``b1`` (at t = 1); the spectral boundary
conditions are built from the eigenvectors of ``b diag(1,-1)``.  Families
violating the collar structure (e.g. the closed-form ramp ``C = t Id``) are
supported with ``product_form=False``; they are valid for the plain
splitting identity but carry no spectral boundary data.

``C(u, t)`` is stored as a sum of components ``g(t) * P(u)`` with shape
functions ``g`` from a fixed catalogue, so families are exactly
time-reversible and JSON-serializable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError

__all__ = [
    "SIGMA",
    "TANGENTIAL",
    "COLLAR_MATRIX",
    "ARCS",
    "OperatorFamily",
    "ArcProfile",
    "ramp_family",
    "constant_family",
    "random_pwc_family",
    "random_loop_family",
    "random_smooth_family",
    "mirror_symmetric_family",
    "reflection_even_family",
    "family_from_config",
    "family_to_config",
    "builtin_family",
]

SIGMA = np.array([[0.0, -1.0], [1.0, 0.0]])
TANGENTIAL = np.array([[1.0, 0.0], [0.0, -1.0]])  # diag(1,-1) at the cuts
COLLAR_MATRIX = SIGMA @ TANGENTIAL  # [[0,1],[1,0]]: sigma * tangential

PI = math.pi
ARCS = {"minus": (0.0, PI), "plus": (PI, 2.0 * PI)}
COLLAR_FRAC = 0.1

# catalogue of t-shape functions; all are exactly representable after the
# substitution t -> 1-t, which keeps family reversal exact
_TSHAPES = {
    "one": lambda t: 1.0,
    "t": lambda t: t,
    "1-t": lambda t: 1.0 - t,
    "bump": lambda t: 0.5 * (1.0 - math.cos(2.0 * PI * t)),
    "swirl": lambda t: math.sin(2.0 * PI * t),
}
_TSHAPE_REVERSED = {"one": ("one", 1.0), "t": ("1-t", 1.0), "1-t": ("t", 1.0),
                    "bump": ("bump", 1.0), "swirl": ("swirl", -1.0)}


def _sym(p, q, r):
    return np.array([[p, q], [q, r]])


@dataclass
class ArcProfile:
    """Potential profile of one component on one arc.

    Piecewise constant profiles store breakpoints as fractions of the arc
    (first and last pieces are the collar windows) and one ``(p, q, r)``
    triple per piece for the symmetric matrix ``[[p, q], [q, r]]``.  Smooth
    profiles store a table sampled on a uniform grid slightly overhanging
    the arc, consumed by the cubic-interpolating Magnus propagator.
    """

    kind: str  # "pwc" | "smooth"
    edges: np.ndarray | None = None  # pwc: fractions, increasing, 0..1
    vals: np.ndarray | None = None   # pwc: (nseg, 3)
    table: np.ndarray | None = None  # smooth: (ntab, 3)
    u0: float = 0.0                  # smooth: grid start
    du: float = 0.0                  # smooth: grid spacing
    meta: dict = field(default_factory=dict)  # rebuild info for serialization

    def value_at(self, arc: str, u: float) -> np.ndarray:
        a, b = ARCS[arc]
        if self.kind == "pwc":
            frac = (u - a) / (b - a)
            idx = int(np.searchsorted(self.edges, frac, side="right")) - 1
            idx = min(max(idx, 0), len(self.vals) - 1)
            return _sym(*self.vals[idx])
        x = (u - self.u0) / self.du
        n = self.table.shape[0]
        k = min(max(int(math.floor(x)), 1), n - 3)
        s = x - k
        w = np.array([
            -s * (s - 1.0) * (s - 2.0) / 6.0,
            (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
            -(s + 1.0) * s * (s - 2.0) / 2.0,
            (s + 1.0) * s * (s - 1.0) / 6.0,
        ])
        v = w @ self.table[k - 1 : k + 3]
        return _sym(*v)


def _smooth_table(arc: str, func, ntab: int = 2400) -> ArcProfile:
    a, b = ARCS[arc]
    du = (b - a) / (ntab - 5)
    u0 = a - 2 * du
    us = u0 + du * np.arange(ntab)
    tab = np.array([func(u) for u in us])
    return ArcProfile(kind="smooth", table=tab, u0=u0, du=du)


class OperatorFamily:
    """A family ``sigma d/du + C(u, t)`` on the circle, cut at {0, pi}."""

    def __init__(
        self,
        kind: str,
        b0: float,
        b1: float,
        components: list[tuple[str, dict]],
        product_form: bool = True,
        nsteps: int = 768,
        name: str = "",
        zero_mode_plus: np.ndarray | None = None,
    ):
        if kind not in ("pwc", "smooth"):
            raise ConfigError(f"unknown family kind {kind!r}")
        for tmode, _arcs in components:
            if tmode not in _TSHAPES:
                raise ConfigError(f"unknown t-shape {tmode!r}")
        self.kind = kind
        self.b0 = float(b0)
        self.b1 = float(b1)
        self.components = components
        self.product_form = product_form
        self.nsteps = nsteps
        self.name = name
        # zero-mode rule: Lagrangian used by spectral boundary conditions
        # when the collar parameter vanishes (spanning vector per cut point)
        self.zero_mode_plus = (
            np.array([1.0, 0.0]) if zero_mode_plus is None else np.asarray(zero_mode_plus, float)
        )
        self._table_cache: dict = {}
        if product_form:
            self._check_collars()

    # -- potential evaluation ------------------------------------------------

    def potential(self, u: float, t: float) -> np.ndarray:
        u = u % (2.0 * PI)
        arc = "minus" if u <= PI else "plus"
        out = np.zeros((2, 2))
        for tmode, arcs in self.components:
            out += _TSHAPES[tmode](t) * arcs[arc].value_at(arc, u)
        return out

    def potential_samples(self, us: np.ndarray, t: float) -> np.ndarray:
        """Vectorized potential evaluation, (len(us), 2, 2)."""
        us = np.asarray(us, dtype=float) % (2.0 * PI)
        out_packed = np.zeros((len(us), 3))
        for arc, (a, b) in ARCS.items():
            mask = (us <= PI) if arc == "minus" else (us > PI)
            if not np.any(mask):
                continue
            uu = us[mask]
            acc = np.zeros((len(uu), 3))
            for tmode, arcs in self.components:
                prof = arcs[arc]
                g = _TSHAPES[tmode](t)
                if prof.kind == "pwc":
                    frac = (uu - a) / (b - a)
                    idx = np.clip(
                        np.searchsorted(prof.edges, frac, side="right") - 1,
                        0,
                        len(prof.vals) - 1,
                    )
                    acc += g * prof.vals[idx]
                else:
                    x = (uu - prof.u0) / prof.du
                    n = prof.table.shape[0]
                    k = np.clip(np.floor(x).astype(int), 1, n - 3)
                    s = x - k
                    wm = -s * (s - 1.0) * (s - 2.0) / 6.0
                    w0 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0
                    w1 = -(s + 1.0) * s * (s - 2.0) / 2.0
                    w2 = (s + 1.0) * s * (s - 1.0) / 6.0
                    acc += g * (
                        wm[:, None] * prof.table[k - 1]
                        + w0[:, None] * prof.table[k]
                        + w1[:, None] * prof.table[k + 1]
                        + w2[:, None] * prof.table[k + 2]
                    )
            out_packed[mask] = acc
        out = np.zeros((len(us), 2, 2))
        out[:, 0, 0] = out_packed[:, 0]
        out[:, 0, 1] = out_packed[:, 1]
        out[:, 1, 0] = out_packed[:, 1]
        out[:, 1, 1] = out_packed[:, 2]
        return out

    def segments_at(self, arc: str, t: float) -> tuple[np.ndarray, np.ndarray]:
        """(lengths, pots) of the piecewise-constant potential at time t."""
        if self.kind != "pwc":
            raise ConfigError("segments_at is only defined for pwc families")
        a, b = ARCS[arc]
        edges = self.components[0][1][arc].edges
        lengths = np.diff(edges) * (b - a)
        pots = np.zeros((len(lengths), 3))
        for tmode, arcs in self.components:
            pots += _TSHAPES[tmode](t) * arcs[arc].vals
        return lengths, pots

    def table_at(self, arc: str, t: float) -> tuple[float, float, np.ndarray]:
        if self.kind != "smooth":
            raise ConfigError("table_at is only defined for smooth families")
        key = (arc, round(t, 14))
        hit = self._table_cache.get(key)
        if hit is not None:
            return hit
        prof0 = self.components[0][1][arc]
        tab = np.zeros_like(prof0.table)
        for tmode, arcs in self.components:
            tab += _TSHAPES[tmode](t) * arcs[arc].table
        out = (prof0.u0, prof0.du, tab)
        if len(self._table_cache) > 512:
            self._table_cache.clear()
        self._table_cache[key] = out
        return out

    # -- propagation ---------------------------------------------------------

    def transfer(self, arc: str, t: float, lams: np.ndarray) -> np.ndarray:
        """Batch of transfer matrices across an arc (start to end)."""
        lams = np.atleast_1d(np.asarray(lams, dtype=float))
        if self.kind == "pwc":
            lengths, pots = self.segments_at(arc, t)
            return kernels.transfer_pwc(lengths, pots, lams)
        u0, du, tab = self.table_at(arc, t)
        a, b = ARCS[arc]
        return kernels.transfer_smooth(tab, u0, du, a, b, self.nsteps, lams)

    def monodromy(self, t: float, lams: np.ndarray) -> np.ndarray:
        """Transfer once around the circle, starting and ending at u = 0."""
        return self.transfer("plus", t, lams) @ self.transfer("minus", t, lams)

    # -- structure -----------------------------------------------------------

    def collar_value(self, t: float) -> np.ndarray:
        return self.potential(0.0, t)

    def tangential_parameter(self, which: int) -> float:
        return self.b0 if which == 0 else self.b1

    def time_reversed(self) -> "OperatorFamily":
        comps = []
        for tmode, arcs in self.components:
            new_mode, sign = _TSHAPE_REVERSED[tmode]
            if sign == 1.0:
                comps.append((new_mode, arcs))
            else:
                comps.append((new_mode, {
                    a: _scaled_profile(p, sign) for a, p in arcs.items()
                }))
        return OperatorFamily(
            self.kind, self.b1, self.b0, comps,
            product_form=self.product_form, nsteps=self.nsteps,
            name=self.name + "~reversed", zero_mode_plus=self.zero_mode_plus,
        )

    def _check_collars(self):
        w = COLLAR_FRAC * PI
        probes = {
            0.0: [0.2 * w, 0.8 * w, 2 * PI - 0.2 * w, 2 * PI - 0.8 * w],
            PI: [PI - 0.8 * w, PI - 0.2 * w, PI + 0.2 * w, PI + 0.8 * w],
        }
        for t in (0.0, 0.25, 0.5, 0.8, 1.0):
            beta = None
            for cut, us in probes.items():
                vals = [self.potential(u, t) for u in us]
                for v in vals[1:]:
                    if np.abs(v - vals[0]).max() > 1e-9:
                        raise ConfigError(
                            f"potential not constant on the collar of cut {cut} at t={t}"
                        )
                v = vals[0]
                if abs(v[0, 0]) > 1e-9 or abs(v[1, 1]) > 1e-9:
                    raise ConfigError(
                        f"collar value at cut {cut}, t={t} does not anticommute "
                        "with the bundle rotation (diagonal part present)"
                    )
                if beta is None:
                    beta = v[0, 1]
                elif abs(v[0, 1] - beta) > 1e-9:
                    raise ConfigError("collar parameters differ between the two cuts")
            if t == 0.0 and abs(beta - self.b0) > 1e-9:
                raise ConfigError("collar value at t=0 does not match b0")
            if t == 1.0 and abs(beta - self.b1) > 1e-9:
                raise ConfigError("collar value at t=1 does not match b1")


def _scaled_profile(p: ArcProfile, sign: float) -> ArcProfile:
    if p.kind == "pwc":
        return ArcProfile("pwc", edges=p.edges, vals=sign * p.vals, meta=p.meta)
    return ArcProfile("smooth", table=sign * p.table, u0=p.u0, du=p.du, meta=p.meta)


# ---------------------------------------------------------------------------
# built-in and random families


def _pwc_edges(n_interior: int) -> np.ndarray:
    interior = np.linspace(COLLAR_FRAC, 1.0 - COLLAR_FRAC, n_interior + 1)
    return np.concatenate([[0.0], interior, [1.0]])


def _pinned_pwc_profile(rng, beta: float, n_interior: int, amp: float) -> ArcProfile:
    edges = _pwc_edges(n_interior)
    vals = np.zeros((n_interior + 2, 3))
    vals[0] = (0.0, beta, 0.0)
    vals[-1] = (0.0, beta, 0.0)
    vals[1:-1] = rng.uniform(-amp, amp, size=(n_interior, 3))
    return ArcProfile("pwc", edges=edges, vals=vals)


def constant_family(b: float = 0.7) -> OperatorFamily:
    """t-independent product-form family (trivial flows)."""
    edges = _pwc_edges(1)
    vals = np.tile([0.0, b, 0.0], (3, 1))
    prof = {a: ArcProfile("pwc", edges=edges, vals=vals.copy()) for a in ARCS}
    return OperatorFamily("pwc", b, b, [("one", prof)], name="constant")


def ramp_family() -> OperatorFamily:
    """C(u, t) = t * Id on the whole circle.

    The monodromy at level lam is the rotation by 2*pi*(t - lam), so the
    circle spectrum is {t + k : k integer}, each eigenvalue of multiplicity
    two, and the spectral flow over t in [0, 1] is +2.  The identity part
    does not anticommute with the bundle rotation, so this family carries no
    product structure at the cuts (``product_form=False``) and no spectral
    boundary conditions.
    """
    edges = np.array([0.0, 1.0])
    vals = np.array([[1.0, 0.0, 1.0]])
    prof = {a: ArcProfile("pwc", edges=edges, vals=vals.copy()) for a in ARCS}
    return OperatorFamily("pwc", 0.0, 0.0, [("t", prof)], product_form=False, name="ramp")


def random_pwc_family(seed: int, n_interior: int = 3, amp: float = 1.8) -> OperatorFamily:
    """Seeded random product-form family, linear in t between two draws."""
    rng = np.random.default_rng(np.random.PCG64(seed))
    sgn = rng.choice([-1.0, 1.0], size=2)
    b0 = sgn[0] * rng.uniform(0.4, 1.4)
    b1 = sgn[1] * rng.uniform(0.4, 1.4)
    start = {a: _pinned_pwc_profile(rng, b0, n_interior, amp) for a in ARCS}
    end = {a: _pinned_pwc_profile(rng, b1, n_interior, amp) for a in ARCS}
    return OperatorFamily(
        "pwc", b0, b1, [("1-t", start), ("t", end)], name=f"random-pwc-{seed}"
    )


def random_loop_family(seed: int, n_interior: int = 3, amp: float = 1.6) -> OperatorFamily:
    """Seeded loop family: C(., 0) = C(., 1), deviations vanish on collars."""
    rng = np.random.default_rng(np.random.PCG64([seed, 1]))
    b = rng.choice([-1.0, 1.0]) * rng.uniform(0.4, 1.3)
    base = {a: _pinned_pwc_profile(rng, b, n_interior, 0.9 * amp) for a in ARCS}

    def interior_only():
        prof = {}
        for a in ARCS:
            edges = _pwc_edges(n_interior)
            vals = np.zeros((n_interior + 2, 3))
            vals[1:-1] = rng.uniform(-amp, amp, size=(n_interior, 3))
            prof[a] = ArcProfile("pwc", edges=edges, vals=vals)
        return prof

    return OperatorFamily(
        "pwc", b, b,
        [("one", base), ("bump", interior_only()), ("swirl", interior_only())],
        name=f"random-loop-{seed}",
    )


def _window(s: np.ndarray) -> np.ndarray:
    # vanishes to third order at both interior boundaries
    return np.sin(PI * np.clip(s, 0.0, 1.0)) ** 2


def _smooth_interior_func(coeffs: np.ndarray, beta: float):
    # coeffs: (3 entries, nharm); interior deviation windowed onto the arc
    lo, hi = COLLAR_FRAC, 1.0 - COLLAR_FRAC
    nharm = coeffs.shape[1]

    def func_factory(arc):
        a, b = ARCS[arc]

        def func(u):
            frac = (u - a) / (b - a)
            s = (frac - lo) / (hi - lo)
            if s <= 0.0 or s >= 1.0:
                return np.array([0.0, beta, 0.0])
            w = math.sin(PI * s) ** 2
            harm = np.array([math.sin((j + 1) * PI * s) for j in range(nharm)])
            dev = coeffs @ harm * w
            return np.array([dev[0], beta + dev[1], dev[2]])

        return func

    return func_factory


def random_smooth_family(seed: int, amp: float = 1.6, nharm: int = 3) -> OperatorFamily:
    """Seeded random smooth product-form family, linear in t."""
    rng = np.random.default_rng(np.random.PCG64([seed, 2]))
    sgn = rng.choice([-1.0, 1.0], size=2)
    b0 = sgn[0] * rng.uniform(0.4, 1.2)
    b1 = sgn[1] * rng.uniform(0.4, 1.2)

    def draw(beta):
        prof = {}
        for arc in ARCS:
            coeffs = rng.uniform(-amp, amp, size=(3, nharm))
            factory = _smooth_interior_func(coeffs, beta)
            prof[arc] = _smooth_table(arc, factory(arc))
        return prof

    fam = OperatorFamily(
        "smooth", b0, b1, [("1-t", draw(b0)), ("t", draw(b1))],
        name=f"random-smooth-{seed}",
    )
    return fam


def reflection_even_family(seed: int, amp: float = 1.5) -> OperatorFamily:
    """Trace-free family even under the reflection u -> 2pi - u.

    For such potentials the map f -> sigma f(2pi - .) carries solutions on
    one arc to solutions on the other, so the two Cauchy data spaces are
    pointwise-sigma images of each other.  The family is t-independent.
    """
    rng = np.random.default_rng(np.random.PCG64([seed, 3]))
    b = rng.choice([-1.0, 1.0]) * rng.uniform(0.4, 1.2)
    n_interior = 3
    edges = _pwc_edges(n_interior)
    vals_minus = np.zeros((n_interior + 2, 3))
    vals_minus[0] = (0.0, b, 0.0)
    vals_minus[-1] = (0.0, b, 0.0)
    for i in range(1, n_interior + 1):
        p, q = rng.uniform(-amp, amp, size=2)
        vals_minus[i] = (p, q, -p)  # trace-free
    # evenness: value on the plus arc at 2pi - u equals the minus-arc value
    prof_minus = ArcProfile("pwc", edges=edges, vals=vals_minus)
    prof_plus = ArcProfile("pwc", edges=edges, vals=vals_minus[::-1].copy())
    return OperatorFamily(
        "pwc", b, b, [("one", {"minus": prof_minus, "plus": prof_plus})],
        name=f"reflection-even-{seed}",
    )


def mirror_symmetric_family(seed: int, amp: float = 1.4, nharm: int = 2) -> OperatorFamily:
    """Family whose two Cauchy data spaces are images of each other under the
    complex structure of the boundary form.

    The plus-arc potential is drawn at random (smooth, collar-pinned); the
    minus-arc potential is the gauge transport

        C_minus(u) = theta'(u) Id - R(theta(u)) C_plus(2pi - u) R(-theta(u)),

    with a rotation angle theta running from -pi/2 to +pi/2 across the arc
    interior (constant on the collars).  Solutions map to solutions under
    g(u) = R(theta(u) ) f(2pi - u) composed with the quarter turn, and the
    boundary traces pick up exactly the complex structure of the Green form.
    The family is t-independent; its symmetry is re-checked numerically
    before any vanishing assertion.
    """
    rng = np.random.default_rng(np.random.PCG64([seed, 4]))
    b = rng.choice([-1.0, 1.0]) * rng.uniform(0.4, 1.1)
    coeffs = rng.uniform(-amp, amp, size=(3, nharm))
    plus_func = _smooth_interior_func(coeffs, b)("plus")

    lo, hi = COLLAR_FRAC * PI, PI - COLLAR_FRAC * PI

    def theta(u):
        # -pi/2 on the leading collar, +pi/2 on the trailing one, quintic ramp
        s = (u - lo) / (hi - lo)
        s = min(max(s, 0.0), 1.0)
        ramp = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
        return -0.5 * PI + PI * ramp

    def theta_prime(u):
        s = (u - lo) / (hi - lo)
        if s <= 0.0 or s >= 1.0:
            return 0.0
        return PI * 30.0 * s * s * (1.0 - s) ** 2 / (hi - lo)

    def rot(a):
        return np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])

    def minus_func(u):
        cp = plus_func(2.0 * PI - u)
        C = _sym(*cp)
        R = rot(theta(u))
        M = theta_prime(u) * np.eye(2) - R @ C @ R.T
        return np.array([M[0, 0], M[0, 1], M[1, 1]])

    prof = {
        "plus": _smooth_table("plus", plus_func),
        "minus": _smooth_table("minus", minus_func),
    }
    return OperatorFamily(
        "smooth", b, b, [("one", prof)], name=f"mirror-{seed}"
    )


# ---------------------------------------------------------------------------
# configuration I/O

_BUILTINS = {
    "ramp": lambda seed=0: ramp_family(),
    "constant": lambda seed=0: constant_family(),
    "random-pwc": random_pwc_family,
    "random-loop": random_loop_family,
    "random-smooth": random_smooth_family,
    "reflection-even": reflection_even_family,
    "mirror": mirror_symmetric_family,
}


def builtin_family(name: str, seed: int = 0) -> OperatorFamily:
    if name not in _BUILTINS:
        raise ConfigError(f"unknown builtin family {name!r}; have {sorted(_BUILTINS)}")
    return _BUILTINS[name](seed)


def family_to_config(fam: OperatorFamily) -> dict:
    if fam.kind != "pwc":
        raise ConfigError("only pwc families have a direct table serialization; "
                          "smooth families are configured by name and seed")
    comps = []
    for tmode, arcs in fam.components:
        comps.append({
            "tmode": tmode,
            "arcs": {
                a: {"edges": p.edges.tolist(), "vals": p.vals.tolist()}
                for a, p in arcs.items()
            },
        })
    return {
        "kind": "pwc",
        "b0": fam.b0,
        "b1": fam.b1,
        "product_form": fam.product_form,
        "components": comps,
        "name": fam.name,
    }


_FAMILY_KEYS = {"kind", "b0", "b1", "product_form", "components", "name", "builtin", "seed", "nsteps"}


def family_from_config(cfg: dict) -> OperatorFamily:
    unknown = set(cfg) - _FAMILY_KEYS
    if unknown:
        raise ConfigError(f"unknown family config keys: {sorted(unknown)}")
    if "builtin" in cfg:
        return builtin_family(cfg["builtin"], int(cfg.get("seed", 0)))
    try:
        comps = []
        for c in cfg["components"]:
            arcs = {
                a: ArcProfile(
                    "pwc",
                    edges=np.asarray(spec["edges"], float),
                    vals=np.asarray(spec["vals"], float),
                )
                for a, spec in c["arcs"].items()
            }
            comps.append((c["tmode"], arcs))
        return OperatorFamily(
            cfg.get("kind", "pwc"), float(cfg["b0"]), float(cfg["b1"]), comps,
            product_form=bool(cfg.get("product_form", True)),
            nsteps=int(cfg.get("nsteps", 768)),
            name=str(cfg.get("name", "")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed family config: {exc}") from exc
