"""Constructors for the explicit surface families.

Every family is returned as a generated chart ``(x(u, v), u)``.  Families
defined through profile ODEs (A for the umbilical generators, V and the
Cartan frame for null scrolls) are tabulated on RK4 nodes and evaluated by
one step from the nearest node, so chart values are smooth in (u, v) and can
be differentiated by finite differences.
"""

from __future__ import annotations

import functools
import math
import warnings
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import exprlang
from .cartan import (
    canonical_initial_frame,
    flat_bscroll_e31,
    flat_nullscroll_h31,
    frame_rhs,
)
from .exprlang import Expr
from .immersion import SurfaceChart
from .numkit import NodalFlow, gauss_legendre
from .spaceforms import model
from .spacetime import ConfigError, Warping

__all__ = [
    "FAMILIES",
    "ClippedDomainWarning",
    "FamilyConfig",
    "ProfileField",
    "build_family",
    "default_config",
    "family_ids",
    "isothermal_change",
    "solve_profile_A",
    "solve_profile_V",
]


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class Grid:
    u_range: tuple[float, float] = (-0.5, 0.5)
    v_range: tuple[float, float] = (-1.0, 1.0)
    nu: int = 21
    nv: int = 21


EXPECTABLE = ("lightlike_T", "class_a", "pseudo_umbilical", "totally_umbilical", "flat_normal_bundle")


@dataclass(frozen=True)
class FamilyConfig:
    family_id: str
    c: int
    warping: Warping
    params: Mapping[str, float] = field(default_factory=dict)
    profiles: Mapping[str, Expr] = field(default_factory=dict)
    grid: Grid = field(default_factory=Grid)
    step: float = 1e-3
    branch: str = "primary"
    expect: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> FamilyConfig:
        """Validate a parsed TOML/JSON mapping; errors name the offending key path."""
        data = dict(data)
        fid = data.pop("family", data.pop("family_id", None))
        if fid not in FAMILIES:
            raise ConfigError(f"family: unknown family id {fid!r}")
        spec = FAMILIES[fid]
        wdat = dict(data.pop("warping", {}))
        try:
            w = Warping.from_text(
                str(wdat.pop("f", "exp(z)")),
                tuple(wdat.pop("interval", (-1.0, 1.0))),
                float(wdat.pop("z0", 0.0)),
            )
        except (exprlang.ExprSyntaxError, ConfigError, TypeError, ValueError) as exc:
            raise ConfigError(f"warping: {exc}") from None
        _no_extra("warping", wdat)
        c = data.pop("c", spec.c if spec.c is not None else 0)
        if c not in (-1, 0, 1):
            raise ConfigError(f"c: must be -1, 0 or 1, got {c!r}")
        if spec.c is not None and c != spec.c:
            raise ConfigError(f"c: family {fid} lives in c={spec.c}")
        params = dict(spec.params)
        for k, val in dict(data.pop("params", {})).items():
            if k not in spec.params:
                raise ConfigError(f"params.{k}: not a parameter of {fid}")
            try:
                params[k] = float(val)
            except (TypeError, ValueError):
                raise ConfigError(f"params.{k}: expected a number, got {val!r}") from None
        profiles = {}
        given = dict(data.pop("profiles", {}))
        for k, (var, default) in spec.profiles.items():
            text = given.pop(k, default)
            try:
                profiles[k] = exprlang.as_expr(text, var)
            except exprlang.ExprSyntaxError as exc:
                raise ConfigError(f"profiles.{k}: {exc}") from None
        _no_extra("profiles", given)
        gdat = dict(data.pop("grid", {}))
        try:
            grid = Grid(
                tuple(map(float, gdat.pop("u_range", Grid.u_range))),
                tuple(map(float, gdat.pop("v_range", Grid.v_range))),
                int(gdat.pop("nu", 21)),
                int(gdat.pop("nv", 21)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"grid: {exc}") from None
        _no_extra("grid", gdat)
        if grid.nu < 2 or grid.nv < 2:
            raise ConfigError("grid.nu: grids need at least 2 points per direction")
        for key, rng in (("u_range", grid.u_range), ("v_range", grid.v_range)):
            if len(rng) != 2 or not rng[0] < rng[1]:
                raise ConfigError(f"grid.{key}: expected [lo, hi] with lo < hi")
        lo, hi = w.interval
        if grid.u_range[0] < lo or grid.u_range[1] > hi:
            raise ConfigError(f"grid.u_range: {grid.u_range} must lie in I={w.interval}")
        odat = dict(data.pop("ode", {}))
        step = float(odat.pop("step", data.pop("step", 1e-3)))
        _no_extra("ode", odat)
        if not step > 0:
            raise ConfigError("ode.step: must be positive")
        branch = str(data.pop("branch", "primary"))
        if branch not in ("primary", "atan"):
            raise ConfigError("branch: expected 'primary' or 'atan'")
        expect = {}
        for k, val in dict(data.pop("expect", {})).items():
            if k not in EXPECTABLE:
                raise ConfigError(f"expect.{k}: not a property flag; choose from {', '.join(EXPECTABLE)}")
            if val not in ("pass", "fail", "undefined"):
                raise ConfigError(f"expect.{k}: expected 'pass', 'fail' or 'undefined', got {val!r}")
            expect[k] = val
        _no_extra("", data)
        cfg = cls(fid, int(c), w, params, profiles, grid, step, branch, expect)
        spec.validate(cfg)
        return cfg


def _no_extra(section: str, rest: Mapping):
    if rest:
        key = next(iter(rest))
        path = f"{section}.{key}" if section else key
        raise ConfigError(f"{path}: unknown key")


def default_config(family_id: str, **overrides) -> FamilyConfig:
    data: dict[str, Any] = {"family": family_id}
    data.update(overrides)
    return FamilyConfig.from_mapping(data)


# ---------------------------------------------------------------------------
# helpers


@functools.lru_cache(maxsize=256)
def _compiled(e: Expr):
    return exprlang.compile(e)


def _ev(e: Expr, x):
    return _compiled(e)(x)


def _dexpr(e: Expr, var: str, order: int = 1) -> Expr:
    for _ in range(order):
        e = exprlang.differentiate(e, var)
    return e


def _start(cfg: FamilyConfig) -> float:
    lo, hi = cfg.grid.u_range
    return float(min(max(cfg.warping.z0, lo), hi))


def _generated(base: Callable, cfg: FamilyConfig, meta=None) -> SurfaceChart:
    def phi(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        return np.concatenate([base(u, v), u[..., None]], -1)

    g = cfg.grid
    return SurfaceChart(
        phi,
        model(cfg.c),
        cfg.warping,
        (tuple(g.u_range), tuple(g.v_range)),
        name=cfg.family_id,
        generated=True,
        meta=dict(meta or {}),
    )


_CENTRAL8 = (4 / 5, -1 / 5, 4 / 105, -1 / 280)


def _by_unique(fn, u):
    """Evaluate a function of u alone once per distinct value in ``u``."""
    uu, inv = np.unique(u, return_inverse=True)
    return fn(uu)[inv.reshape(u.shape)]


@dataclass(frozen=True)
class ProfileField:
    """Solution of a Riccati profile equation y_u = P(u) y^2 + Q(u) with y(u0) = init(v).

    The flow of a Riccati equation is a Moebius map of the initial value, so
    ``y = (M00 y0 + M01)/(M10 y0 + M11)`` where M solves the linear system
    M_u = [[0, Q], [-P, 0]] M, M(u0) = I.  M depends on u only and is
    tabulated once on RK4 nodes and read off by one step from the nearest node.
    """

    P: Callable
    Q: Callable
    init: Callable  # init(v)
    u0: float
    u_range: tuple[float, float]
    step: float
    name: str = "profile"
    nonvanishing: bool = False

    @functools.cached_property
    def flow(self) -> NodalFlow:
        return NodalFlow(self.mobius_rhs, _EYE2, self.u0, self.u_range, self.step)

    def rhs(self, u, y):
        u = np.asarray(u, dtype=float)
        return np.asarray(self.P(u))[..., None] * y**2 + np.asarray(self.Q(u))[..., None]

    def mobius_rhs(self, u, m):
        p = np.asarray(self.P(u), dtype=float)[..., None]
        q = np.asarray(self.Q(u), dtype=float)[..., None]
        return np.concatenate([q * m[..., 2:], -p * m[..., :2]], -1)

    def mobius(self, u) -> np.ndarray:
        """Rows (M00, M01, M10, M11) at each u."""
        u = np.asarray(u, dtype=float)
        return _by_unique(self.flow, u)

    def apply(self, m, v):
        y0 = np.asarray(self.init(v), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (m[..., 0] * y0 + m[..., 1]) / (m[..., 2] * y0 + m[..., 3])

    def at(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        return self.apply(self.mobius(u), v)

    def residual(self, u, v, h: float = 1e-3) -> np.ndarray:
        """|d_u y - rhs(u, y)| with d_u y from an eighth-order central difference."""
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        d = sum(ck * (self.at(u + k * h, v) - self.at(u - k * h, v)) for k, ck in enumerate(_CENTRAL8, 1)) / h
        return np.abs(d - self.rhs(u, self.at(u, v)[..., None])[..., 0])

    def valid(self, u, v, bound: float = 1e6) -> np.ndarray:
        """Points reached without escaping to infinity (the Moebius denominator stays positive)."""
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        m = self.mobius(u)
        den = m[..., 2] * np.asarray(self.init(v), dtype=float) + m[..., 3]
        vals = self.apply(m, v)
        ok = (den > 0) & np.isfinite(vals) & (np.abs(vals) < bound)
        return ok & (np.abs(vals) > 1e-6) if self.nonvanishing else ok


_EYE2 = np.array([1.0, 0.0, 0.0, 1.0])


def solve_profile_A(sign: int, r: float, w: Warping, a: Expr, A0: Expr, u_range, u0: float, step: float):
    """Profile of the umbilical generators: A_u = sign A^2/(2 r^2 f^2 a') - a'(A^2 + 1)/2.

    ``sign`` is -1 for the de Sitter and Minkowski families and +1 for the
    anti de Sitter family.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    da = _dexpr(a, "u")
    us = np.linspace(*u_range, 257)
    if np.any(np.abs(_ev(da, us)) < 1e-12):
        raise ConfigError("profiles.a: a' must not vanish on the u-range")

    def P(u):
        ap = _ev(da, u)
        return sign / (2 * r * r * w.value(u) ** 2 * ap) - 0.5 * ap

    return ProfileField(P, lambda u: -0.5 * _ev(da, u), lambda v: _ev(A0, v), u0, tuple(u_range), step, "A", True)


def solve_profile_V(U: Expr, b_of_u: Callable, c: int, w: Warping, V0: Expr, u_range, u0: float, step: float):
    """Profile of the null-scroll families: V_u = (U' V^2 (b^2 + c) + 1/(f^2 U'))/2.

    ``b_of_u`` is b composed with U, as a function of u.
    """
    dU = _dexpr(U, "u")
    us = np.linspace(*u_range, 257)
    if np.any(np.abs(_ev(dU, us)) < 1e-12):
        raise ConfigError("profiles.U: U' must not vanish on the u-range")

    def P(u):
        b = np.asarray(b_of_u(u), dtype=float)
        return 0.5 * _ev(dU, u) * (b * b + c)

    def Q(u):
        return 0.5 / (w.value(u) ** 2 * _ev(dU, u))

    return ProfileField(P, Q, lambda v: _ev(V0, v), u0, tuple(u_range), step, "V")


def isothermal_change(c1: float, c2: float, w: Warping):
    """(u, v) -> (U, V) = (F/(2 c1) - v/c1 + c2, c1 F) and its Jacobian.

    Returns ``(change, jacobian)``; ``jacobian(u, v)`` has rows (U_u, U_v) and
    (V_u, V_v).
    """
    if c1 == 0:
        raise ConfigError("params.c1: must be non-zero")

    def change(u, v):
        F = w.antiderivative(u)
        return F / (2 * c1) - np.asarray(v) / c1 + c2, c1 * F

    def jacobian(u, v):
        f = w.value(u)
        one = np.ones(np.broadcast(np.asarray(u), np.asarray(v)).shape)
        return np.stack(
            [np.stack([one / (2 * c1 * f), -one / c1], -1), np.stack([c1 * one / f, 0 * one], -1)], -2
        )

    return change, jacobian


def _quadric_h31(a: float):
    """The flat quadric of anti de Sitter space in isothermal null coordinates."""
    r2 = math.sqrt(2)

    def psi(U, V):
        return np.stack(
            [(U + V) / r2, a * (2 * U * V - 1) - 1 / (4 * a), a * (2 * U * V - 1) + 1 / (4 * a), (U - V) / r2],
            -1,
        )

    return psi


def _torus(theta: float):
    ct, st = math.cos(theta), math.sin(theta)
    r2 = math.sqrt(2)

    def psi(U, V):
        p = (U + V) / (r2 * ct)
        q = (U - V) / (r2 * st)
        return np.stack([ct * np.sinh(p), ct * np.cosh(p), st * np.cos(q), st * np.sin(q)], -1)

    return psi


# ---------------------------------------------------------------------------
# builders


def _umbilic_base(cfg: FamilyConfig, which: str):
    r = cfg.params["r"]
    a, A0 = cfg.profiles["a"], cfg.profiles["A0"]
    sign = 1 if which == "h31" else -1
    prof = solve_profile_A(sign, r, cfg.warping, a, A0, cfg.grid.u_range, _start(cfg), cfg.step)
    tail = math.sqrt(abs(1 - r * r))

    def base(u, v):
        A = prof.at(u, v)
        al = _ev(a, u)
        if cfg.branch == "atan":
            # alternate branch s2 = a - 2 atan(A) of the same generator
            al = al - 2 * np.arctan(A)
        cs, sn = np.cos(al), np.sin(al)
        p1, p2 = r * (cs / A - sn), r * (sn / A + cs)
        if which == "s31":
            return np.stack([r / A, p1, p2, np.full(u.shape, tail)], -1)
        if which == "h31":
            return np.stack([p1, p2, r / A, np.full(u.shape, tail)], -1)
        return np.stack([r / A, p1, p2], -1)

    return base, prof


def _umbilic(which: str):
    def build(cfg: FamilyConfig):
        base, prof = _umbilic_base(cfg, which)
        return _generated(base, cfg, {"profile": prof}), prof

    return build


def _iso_composed(psi_of: Callable):
    def build(cfg: FamilyConfig):
        psi = psi_of(cfg)
        change, _ = isothermal_change(cfg.params["c1"], cfg.params["c2"], cfg.warping)

        def base(u, v):
            U, V = change(u, v)
            return psi(U, V)

        return _generated(base, cfg, {"base_surface": psi}), None

    return build


def _e31_bscroll(cfg: FamilyConfig):
    c1, c2, w = cfg.params["c1"], cfg.params["c2"], cfg.warping

    def base(u, v):
        F = w.antiderivative(u)
        s = c1 * F + c2
        t = (3 * F - 6 * v) / c1
        k = 6 * math.sqrt(2)
        return np.stack([(s**3 + 6 * s + t) / k, 0.5 * s**2, (s**3 - 6 * s + t) / k], -1)

    return _generated(base, cfg, {"base_surface": flat_bscroll_e31}), None


def _e31_cone(cfg: FamilyConfig):
    b1, b2, w = cfg.profiles["b1"], cfg.profiles["b2"], cfg.warping

    def base(u, v):
        return np.stack([w.antiderivative(u) - v, _ev(b1, v), _ev(b2, v)], -1)

    return _generated(base, cfg), None


def _s31_torus(cfg: FamilyConfig):
    th, c2, w = cfg.params["theta"], cfg.params["c2"], cfg.warping
    ct, st = math.cos(th), math.sin(th)
    root = math.sqrt(1 / math.cos(2 * th))
    r2 = math.sqrt(2)

    def base(u, v):
        F = w.antiderivative(u)
        p = -c2 / (r2 * ct) - F * ct * root + v / (ct * root)
        q = -c2 / (r2 * st) + F * st * root + v / (st * root)
        return np.stack([-ct * np.sinh(p), ct * np.cosh(p), st * np.cos(q), -st * np.sin(q)], -1)

    return _generated(base, cfg, {"base_surface": _torus(th), "c1": math.sqrt(0.5 / math.cos(2 * th))}), None


def _h31_totumb(cfg: FamilyConfig):
    k, k2, w = cfg.params["k"], cfg.params["k2"], cfg.warping
    r2 = math.sqrt(2)

    def base(u, v):
        F = w.antiderivative(u)
        ang = F + k2 / k
        cs, sn = np.cos(ang), np.sin(ang)
        L = 2 * k * v + k2
        return np.stack(
            [
                (L * cs - 2 * k * sn) / (2 * k),
                (-k * (2 * k * k + 1) * cs - L * sn) / (2 * r2 * k * k),
                (k * (2 * k * k - 1) * cs - L * sn) / (2 * r2 * k * k),
                L * cs / (2 * k),
            ],
            -1,
        )

    return _generated(base, cfg, {"base_surface": flat_nullscroll_h31(k)}), None


def _sheared_bscroll(cfg: FamilyConfig):
    """Flat B-scroll with U = u + s v and V' = 1/(2 f^2): E = -s/2, h3 != 0."""
    s, w = cfg.params["s"], cfg.warping
    z0 = w.z0

    def base(u, v):
        V = gauss_legendre(lambda t: 0.5 / w.value(t) ** 2, z0, u)
        return flat_bscroll_e31(u + s * v, V)

    return _generated(base, cfg), None


def _memo_last(fn):
    """Cache the result for the most recent argument object (RK4 stages reuse it)."""
    last: list = [None, None]

    def wrapped(u):
        if last[0] is not u:
            last[0], last[1] = u, fn(u)
        return last[1]

    return wrapped


def _nullscroll(kind: str):
    """Null-scroll families: classA/nullscroll and the pseudo-umbilical scrolls."""

    def build(cfg: FamilyConfig):
        w, c = cfg.warping, cfg.c
        U = cfg.profiles["U"]
        dU, ddU = _dexpr(U, "u"), _dexpr(U, "u", 2)
        if kind == "general":
            a_e, b_e = cfg.profiles["a"], cfg.profiles["b"]

            def coeffs(u):
                Uu = _ev(U, u)
                return _ev(a_e, Uu), _ev(b_e, Uu), _ev(dU, u), w.value(u)

        elif kind == "e31":
            c3 = cfg.params["c3"]

            def coeffs(u):
                f, fp, up, upp = w.value(u), w.d1(u), _ev(dU, u), _ev(ddU, u)
                a = (-(c3**2) * f * f * up + f * fp * upp + fp * fp * up) / (c3 * f**3 * up**3)
                return a, c3 * f, up, f

        else:  # s31
            c3 = cfg.params["c3"]

            def coeffs(u):
                f, fp, up, upp = w.value(u), w.d1(u), _ev(dU, u), _ev(ddU, u)
                root = np.sqrt(c3 * f * f - 1)
                a = (up * (-c3 * f * f + fp * fp + 1) + f * fp * upp) / (f * f * root * up**3)
                return a, root, up, f

        coeffs = _memo_last(coeffs)
        a_u = lambda u: coeffs(u)[0]
        b_u = lambda u: coeffs(u)[1]
        u0 = _start(cfg)
        prof = solve_profile_V(U, b_u, c, w, cfg.profiles["V0"], cfg.grid.u_range, u0, cfg.step)
        frame = frame_rhs(a_u, b_u, model(c), speed=lambda u: coeffs(u)[2])
        init = np.concatenate([canonical_initial_frame(model(c)).pack(), _EYE2])
        n = (len(init) - 4) // 4

        def rhs(u, y):
            _, b, up, f = coeffs(u)
            p = (0.5 * up * (b * b + c))[..., None]
            q = (0.5 / (f * f * up))[..., None]
            m = y[..., -4:]
            return np.concatenate([frame(u, y[..., :-4]), q * m[..., 2:], -p * m[..., :2]], -1)

        along = NodalFlow(rhs, init, u0, cfg.grid.u_range, cfg.step)

        def base(u, v):
            y = _by_unique(along, u)
            V = prof.apply(y[..., -4:], v)
            return y[..., :n] + V[..., None] * y[..., 2 * n : 3 * n]

        meta = {"profile": prof, "a_of_u": a_u, "b_of_u": b_u}
        return _generated(base, cfg, meta), prof

    return build


# ---------------------------------------------------------------------------
# catalog


@dataclass(frozen=True)
class FamilySpec:
    c: int | None
    builder: Callable
    params: Mapping[str, float]
    profiles: Mapping[str, tuple[str, str]]
    description: str
    check: Callable | None = None

    def validate(self, cfg: FamilyConfig):
        if self.check is not None:
            self.check(cfg)


def _check_r(lo, hi):
    def check(cfg):
        r = cfg.params["r"]
        if not lo < r * r < hi:
            raise ConfigError(f"params.r: need {lo} < r^2 < {hi}, got r={r}")

    return check


def _check_nonzero(*keys):
    def check(cfg):
        for k in keys:
            if cfg.params[k] == 0:
                raise ConfigError(f"params.{k}: must be non-zero")

    return check


def _check_theta(cfg):
    th = cfg.params["theta"]
    if not 0 < th < math.pi / 4:
        raise ConfigError(f"params.theta: need 0 < theta < pi/4, got {th}")


def _check_cone(cfg):
    vs = np.linspace(*cfg.grid.v_range, 257)
    d1 = _ev(_dexpr(cfg.profiles["b1"], "v"), vs)
    d2 = _ev(_dexpr(cfg.profiles["b2"], "v"), vs)
    if np.max(np.abs(d1**2 + d2**2 - 1)) > 1e-9:
        raise ConfigError("profiles.b1: need b1'^2 + b2'^2 = 1 on the v-range")


def _check_s31_scroll(cfg):
    _check_nonzero("c3")(cfg)
    us = np.linspace(*cfg.grid.u_range, 257)
    if np.any(cfg.params["c3"] * cfg.warping.value(us) ** 2 <= 1):
        raise ConfigError("params.c3: need c3 f^2 > 1 on the u-range")


_UMB = {"r": 0.5}
_UMB_PROFILES = {"a": ("u", "u"), "A0": ("v", "1 + 0.3*v")}
_SCROLL_PROFILES = {"U": ("u", "u"), "V0": ("v", "1 + 0.3*v")}

FAMILIES: dict[str, FamilySpec] = {
    "classA/s31": FamilySpec(1, _umbilic("s31"), _UMB, _UMB_PROFILES,
                             "generated by a de Sitter plane S^2_1(1/r^2), 0 < r^2 < 1", _check_r(0, 1)),
    "classA/h31": FamilySpec(-1, _umbilic("h31"), {"r": 1.5}, _UMB_PROFILES,
                             "generated by H^2_1(-1/r^2) in anti de Sitter space, r^2 > 1", _check_r(1, math.inf)),
    "classA/h31-quadric": FamilySpec(-1, _iso_composed(lambda cfg: _quadric_h31(cfg.params["a"])),
                                     {"a": 1.0, "c1": 1.0, "c2": 0.0}, {},
                                     "generated by the flat quadric of anti de Sitter space",
                                     _check_nonzero("a", "c1")),
    "classA/e31": FamilySpec(0, _umbilic("e31"), _UMB, _UMB_PROFILES,
                             "generated by a de Sitter plane in Minkowski space", _check_r(0, math.inf)),
    "classA/nullscroll": FamilySpec(None, _nullscroll("general"), {},
                                    {**_SCROLL_PROFILES, "a": ("U", "1"), "b": ("U", "U")},
                                    "generated by a null scroll alpha(U) + V B(U)"),
    "pseudoumb/e31-bscroll": FamilySpec(0, _e31_bscroll, {"c1": 1.0, "c2": 0.0}, {},
                                        "generated by the flat B-scroll (b = 0)", _check_nonzero("c1")),
    "pseudoumb/e31-nullscroll": FamilySpec(0, _nullscroll("e31"), {"c3": 1.0}, _SCROLL_PROFILES,
                                           "null scroll with b = c3 f", _check_nonzero("c3")),
    "pseudoumb/e31-cone": FamilySpec(0, _e31_cone, {}, {"b1": ("v", "cos(v)"), "b2": ("v", "sin(v)")},
                                     "generated by a cone; flat, not class A", _check_cone),
    "pseudoumb/s31-nullscroll": FamilySpec(1, _nullscroll("s31"), {"c3": 4.0}, _SCROLL_PROFILES,
                                           "null scroll with b = sqrt(c3 f^2 - 1)", _check_s31_scroll),
    "pseudoumb/s31-torus": FamilySpec(1, _s31_torus, {"theta": math.pi / 6, "c2": 0.0}, {},
                                      "generated by the flat isoparametric torus", _check_theta),
    "totumb/h31": FamilySpec(-1, _h31_totumb, {"k": 1.0, "k2": 0.0}, {},
                             "totally umbilical surface of anti de Sitter space-time", _check_nonzero("k")),
    "generator/umbilic-s31": FamilySpec(1, _umbilic("s31"), _UMB, _UMB_PROFILES,
                                        "umbilical de Sitter generator", _check_r(0, 1)),
    "generator/umbilic-h31": FamilySpec(-1, _umbilic("h31"), {"r": 1.5}, _UMB_PROFILES,
                                        "umbilical anti de Sitter generator", _check_r(1, math.inf)),
    "generator/umbilic-h31-flat": FamilySpec(-1, _iso_composed(lambda cfg: _quadric_h31(cfg.params["a"])),
                                             {"a": 1.0, "c1": 1.0, "c2": 0.0}, {},
                                             "flat umbilical quadric via the isothermal change",
                                             _check_nonzero("a", "c1")),
    "generator/umbilic-e31": FamilySpec(0, _umbilic("e31"), _UMB, _UMB_PROFILES,
                                        "umbilical Minkowski generator", _check_r(0, math.inf)),
    "generator/scroll-e31-flat": FamilySpec(0, _iso_composed(lambda cfg: flat_bscroll_e31),
                                            {"c1": 1.0, "c2": 0.0}, {},
                                            "flat B-scroll of Minkowski space via the isothermal change",
                                            _check_nonzero("c1")),
    "generator/scroll-h31-flat": FamilySpec(-1, _iso_composed(lambda cfg: flat_nullscroll_h31(cfg.params["k"])),
                                            {"k": 0.7, "c1": 1.0, "c2": 0.0}, {},
                                            "flat anti de Sitter B-scroll via the isothermal change",
                                            _check_nonzero("k", "c1")),
    "fixture/sheared-bscroll": FamilySpec(0, _sheared_bscroll, {"s": -2.0}, {},
                                          "flat B-scroll with sheared coordinates; h3 != 0, E != f",
                                          _check_nonzero("s")),
}


class ClippedDomainWarning(UserWarning):
    """The profile ODE escapes to infinity inside the configured u-range."""


def family_ids() -> list[str]:
    return sorted(FAMILIES)


def build_family(cfg: FamilyConfig | str, warn: bool = True) -> SurfaceChart:
    """Build the chart of a catalog family.

    For ODE-defined families the chart domain is clipped to the sub-rectangle
    where the profile stays finite and non-vanishing; the clipping is
    recorded in ``chart.meta["valid_rect"]`` and reported as a
    :class:`ClippedDomainWarning`.
    """
    if isinstance(cfg, str):
        cfg = default_config(cfg)
    spec = FAMILIES[cfg.family_id]
    chart, prof = spec.builder(cfg)
    meta = dict(chart.meta)
    meta["config"] = cfg
    domain = chart.domain
    if prof is not None:
        domain = _valid_rectangle(prof, cfg)
        if warn and domain != chart.domain:
            msg = f"{cfg.family_id}: profile valid only on u in {domain[0]}"
            warnings.warn(msg, ClippedDomainWarning, stacklevel=2)
    meta["valid_rect"] = domain
    return SurfaceChart(chart.map, chart.model, chart.warping, domain, chart.name, chart.generated, meta)


def _valid_rectangle(prof: ProfileField, cfg: FamilyConfig):
    g = cfg.grid
    us = np.linspace(*g.u_range, 8 * g.nu + 1)
    vs = np.linspace(*g.v_range, g.nv)
    V, U = np.meshgrid(vs, us, indexing="ij")
    ok = np.all(prof.valid(U, V), axis=0)
    u0 = _start(cfg)
    i0 = int(np.argmin(np.abs(us - u0)))
    if not ok[i0]:
        raise ConfigError(f"{cfg.family_id}: profile invalid at the initial u")
    lo = i0
    while lo > 0 and ok[lo - 1]:
        lo -= 1
    hi = i0
    while hi < len(us) - 1 and ok[hi + 1]:
        hi += 1
    # keep a margin so that finite-difference stencils stay inside the valid set
    pad = 2 if (lo > 0 or hi < len(us) - 1) else 0
    lo_u = us[min(lo + pad, i0)] if lo > 0 else us[0]
    hi_u = us[max(hi - pad, i0)] if hi < len(us) - 1 else us[-1]
    return ((float(lo_u), float(hi_u)), tuple(g.v_range))
