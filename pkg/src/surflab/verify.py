"""Residual suites: structure equations, closed-form comparisons and numeric oracles.

Every check produces a record ``{suite, case, quantity, residual, tolerance,
verdict}`` with verdict in {pass, fail, indeterminate, informative}.
Records are emitted in a fixed order and all sampling is seeded, so two
runs give byte-identical reports.
"""

from __future__ import annotations

import json
import math
import os
from collections.abc import Callable, Iterable, Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import classify as cl
from . import exprlang
from .cartan import (
    flat_bscroll_e31,
    flat_nullscroll_h31,
    integrate_cartan_frame,
    null_scroll_chart,
    state_from_scroll,
)
from .families import (
    FamilyConfig,
    build_family,
    default_config,
    family_ids,
    isothermal_change,
)
from .immersion import (
    SurfaceChart,
    adapted_frame,
    analyze,
    base_shape_operator,
    covariant_derivatives,
    gaussian_curvature,
    generator_coefficients,
    generator_gaussian_curvature,
    generator_metric,
    generator_shape_closed_form,
    normal_curvature,
    shape_matrix,
)
from .numkit import field_partials, jet1, jet2, rk4_endpoint
from .spaceforms import model, tangent_projection
from .spacetime import Warping, curvature, curvature_fd, metric, split

__all__ = [
    "H_COMPONENTS",
    "SUITES",
    "Record",
    "check_lemma_closed_forms",
    "check_structure_equations",
    "mutation_checks",
    "report_json",
    "run_suite",
]

PASS, FAIL, INFORMATIVE = "pass", "fail", "informative"
H_COMPONENTS = ("h3_11", "h3_12", "h3_22", "h4_11", "h4_12", "h4_22")
STRUCTURE_TOL = 1e-4
LEMMA_TOL = 1e-5


@dataclass(frozen=True)
class Record:
    suite: str
    case: str
    quantity: str
    residual: float | None
    tolerance: float
    verdict: str

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "case": self.case,
            "quantity": self.quantity,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
        }


def _num(x) -> float | None:
    x = float(np.max(np.abs(x))) if np.size(x) else 0.0
    return x if math.isfinite(x) else None


def _below(suite, case, quantity, residual, tol) -> Record:
    r = _num(residual)
    return Record(suite, case, quantity, r, tol, PASS if r is not None and r < tol else FAIL)


def _above(suite, case, quantity, residual, tol) -> Record:
    """Pass when the residual exceeds ``tol`` (negative results and mutation detection)."""
    r = _num(residual)
    return Record(suite, case, quantity, r, tol, PASS if r is not None and r > tol else FAIL)


def _info(suite, case, quantity, residual, tol=LEMMA_TOL) -> Record:
    return Record(suite, case, quantity, _num(residual), tol, INFORMATIVE)


def _flag_record(suite, case, flag: cl.Flag, expected: str) -> Record:
    verdict = PASS if flag.verdict == expected else FAIL
    r = flag.residual if math.isfinite(flag.residual) else None
    return Record(suite, case, f"{flag.name}={expected}", r, flag.tolerance, verdict)


# ---------------------------------------------------------------------------
# structure equations


@dataclass(frozen=True)
class _StructureData:
    """Everything the Gauss, Codazzi and Ricci identities consume, at sample points."""

    comps: dict[str, np.ndarray]
    d_T: dict[str, np.ndarray]  # T-derivatives of the h components
    d_U: dict[str, np.ndarray]
    K: np.ndarray
    rperp: np.ndarray
    ratio: np.ndarray  # f'/f
    R_TUUT: np.ndarray  # <R(T,U)U, T>
    R_TUT: np.ndarray  # normal components (e3, e4) of R(T,U)T
    R_TUU: np.ndarray
    R_TU34: np.ndarray  # <R(T,U)e3, e4>
    E_ratio: np.ndarray | None  # E_u/E on generated charts
    A4_closed: np.ndarray | None  # A_e4 from the generator coefficients


def _h_fields(chart: SurfaceChart):
    def fn(uu, vv):
        _, _, sh = analyze(chart, uu, vv)
        return np.stack([getattr(sh, k) for k in H_COMPONENTS], -1)

    return fn


def _structure_data(chart: SurfaceChart, u, v) -> _StructureData:
    w, m = chart.warping, chart.model
    loc, fr, sh = analyze(chart, u, v)
    z = loc.z
    ip = lambda a, b: metric(a, b, z, w, m)
    R = lambda X, Y, Z: curvature(loc.x, z, X, Y, Z, w, m)
    _, hu, hv = field_partials(_h_fields(chart), u, v)
    t, s = fr.t_coords, fr.u_coords
    dT = t[..., :1] * hu + t[..., 1:] * hv
    dU = s[..., :1] * hu + s[..., 1:] * hv
    rtut, rtuu = R(fr.T, fr.U, fr.T), R(fr.T, fr.U, fr.U)
    E_ratio = A4 = None
    if chart.generated:
        gc = generator_coefficients(chart, u, v)
        E_ratio, A4 = gc.E_u / gc.E, generator_shape_closed_form(gc, w.value(z))
    return _StructureData(
        comps={k: getattr(sh, k) for k in H_COMPONENTS},
        d_T={k: dT[..., i] for i, k in enumerate(H_COMPONENTS)},
        d_U={k: dU[..., i] for i, k in enumerate(H_COMPONENTS)},
        K=gaussian_curvature(chart, u, v, outer=3e-3),  # the larger default step is biased near Riccati poles
        rperp=normal_curvature(chart, u, v),
        ratio=w.log_derivative(z),
        R_TUUT=ip(rtuu, fr.T),
        R_TUT=np.stack([ip(rtut, fr.e3), ip(rtut, fr.e4)], -1),
        R_TUU=np.stack([ip(rtuu, fr.e3), ip(rtuu, fr.e4)], -1),
        R_TU34=ip(R(fr.T, fr.U, fr.e3), fr.e4),
        E_ratio=E_ratio,
        A4_closed=A4,
    )


def _structure_residuals(d: _StructureData, comps: Mapping[str, np.ndarray]) -> dict[str, np.ndarray]:
    """Gauss, Codazzi and Ricci residuals for given h components (possibly mutated)."""
    h = comps
    gauss = -d.K - d.R_TUUT - (h["h3_11"] * h["h3_22"] + h["h4_11"] * h["h4_22"]) + h["h3_12"] ** 2 + h["h4_12"] ** 2

    # normal connection and induced connection from the frame identities
    om_T, om_U = -h["h4_11"], -h["h4_12"]
    psi = d.ratio - h["h3_22"]

    def nabla_perp(dX, om, pair):
        a, b = pair
        return np.stack([dX[a] - h[b] * om, dX[b] + h[a] * om], -1)

    TT, TU, UU = ("h3_11", "h4_11"), ("h3_12", "h4_12"), ("h3_22", "h4_22")
    hTT = np.stack([h["h3_11"], h["h4_11"]], -1)
    cod1 = nabla_perp(d.d_T, om_T, TU) - nabla_perp(d.d_U, om_U, TT) + 2 * psi[..., None] * hTT - d.R_TUT
    cod2 = nabla_perp(d.d_T, om_T, UU) - nabla_perp(d.d_U, om_U, TU) - d.R_TUU
    codazzi = np.maximum(np.abs(cod1).max(-1), np.abs(cod2).max(-1))

    A3 = shape_matrix(h["h3_11"], h["h3_12"], h["h3_22"])
    # <h(A3 T, U), e4> - <h(T, A3 U), e4> in {T, U} coordinates
    a3T, a3U = A3[..., :, 0], A3[..., :, 1]
    hAU = a3T[..., 0] * h["h4_12"] + a3T[..., 1] * h["h4_22"]
    hTA = a3U[..., 0] * h["h4_11"] + a3U[..., 1] * h["h4_12"]
    ricci = d.R_TU34 - d.rperp - hAU + hTA
    out = {"gauss": gauss, "codazzi": codazzi, "ricci": ricci}
    if d.E_ratio is not None:
        # on class A charts the three equations above do not see h_22 pointwise
        A4 = shape_matrix(h["h4_11"], h["h4_12"], h["h4_22"])
        out["closed_forms"] = np.max(
            np.abs([h["h3_11"], h["h3_12"] - d.ratio, h["h3_22"] - d.ratio + d.E_ratio]), axis=0
        )
        out["closed_forms"] = np.maximum(out["closed_forms"], np.abs(A4 - d.A4_closed).max(axis=(-2, -1)))
    return out


def check_structure_equations(chart: SurfaceChart, n: int = 3) -> dict[str, float]:
    """Max residuals of the Gauss, Codazzi and Ricci equations on an n x n sample grid.

    Generated charts also report ``closed_forms``: the algebraic identities
    tying h to the generator coefficients.
    """
    u, v = cl.sample_points(chart, n)
    d = _structure_data(chart, u, v)
    return {k: float(np.max(np.abs(r))) for k, r in _structure_residuals(d, d.comps).items()}


def _mutations(d: _StructureData, delta: float = 0.1) -> dict[str, tuple[str, float]]:
    """For each single-component shift of h: the most sensitive check and its residual."""
    out = {}
    for k in H_COMPONENTS:
        for sgn in (1, -1):
            comps = dict(d.comps)
            comps[k] = comps[k] + sgn * delta
            res = {name: float(np.max(np.abs(r))) for name, r in _structure_residuals(d, comps).items()}
            worst = max(sorted(res), key=res.get)
            out[f"{k}{'+' if sgn > 0 else '-'}{delta}"] = (worst, res[worst])
    return out


def mutation_checks(chart: SurfaceChart, n: int = 3, delta: float = 0.1) -> dict[str, tuple[str, float]]:
    """Shift each h component by +-delta and report which residual check flags it."""
    u, v = cl.sample_points(chart, n)
    d = _structure_data(chart, u, v)
    return _mutations(d, delta)


# ---------------------------------------------------------------------------
# closed forms along light-like T


def _tangent_coords(V, fr, ip):
    """(alpha, beta) with tangential part alpha T + beta U (<T,U> = -1)."""
    return -ip(V, fr.U), -ip(V, fr.T)


def check_lemma_closed_forms(chart: SurfaceChart, n: int = 3) -> dict[str, np.ndarray]:
    """Deviations of numerically computed frame data from the closed forms for light-like T."""
    w, m = chart.warping, chart.model
    u, v = cl.sample_points(chart, n)
    loc, fr, sh = analyze(chart, u, v)
    z = loc.z
    ip = lambda a, b: metric(a, b, z, w, m)
    ratio = w.log_derivative(z)
    out = {
        "h3_11": sh.h3_11,
        "h3_12-f'/f": sh.h3_12 - ratio,
        "A_e3 lower-left": sh.A_e3[..., 1, 0],
        "A_e3 diagonal+f'/f": np.maximum(np.abs(sh.A_e3[..., 0, 0] + ratio), np.abs(sh.A_e3[..., 1, 1] + ratio)),
        "U(f)+f'": split(fr.U)[1] * w.d1(z) + w.d1(z),
    }
    _, _, nab = covariant_derivatives(chart, u, v)
    t, s = fr.t_coords, fr.u_coords

    def along(c, name):
        return c[..., :1] * nab[0][name] + c[..., 1:] * nab[1][name]

    psi = ratio - sh.h3_22
    nTe3, nUe3 = along(t, "e3"), along(s, "e3")
    out["nabla_perp_T e3+h4_11 e4"] = ip(nTe3, fr.e4) + sh.h4_11
    out["nabla_perp_U e3+h4_12 e4"] = ip(nUe3, fr.e4) + sh.h4_12
    nTT, nTU, nUT = along(t, "T"), along(t, "U"), along(s, "T")
    out["nabla_T T"] = np.max(np.abs(_tangent_coords(nTT, fr, ip)), axis=0)
    out["nabla_T U"] = np.max(np.abs(_tangent_coords(nTU, fr, ip)), axis=0)
    a, b = _tangent_coords(nUT, fr, ip)
    out["nabla_U T-(f'/f-h3_22)T"] = np.maximum(np.abs(a - psi), np.abs(b))
    if chart.generated:
        gc = generator_coefficients(chart, u, v)
        f = w.value(z)
        out["h3_22-(f'/f-E_u/E)"] = sh.h3_22 - (ratio - gc.E_u / gc.E)
        out["A_e4 generator form"] = np.abs(sh.A_e4 - generator_shape_closed_form(gc, f)).max(axis=(-2, -1))
    return out


# connection components differentiate the numerically built frame once more
_LEMMA_TOLS = {
    "U(f)+f'": 1e-6,
    "nabla_perp_T e3+h4_11 e4": 1e-4,
    "nabla_perp_U e3+h4_12 e4": 1e-4,
    "nabla_T T": 1e-4,
    "nabla_T U": 1e-4,
    "nabla_U T-(f'/f-h3_22)T": 1e-4,
}


def _family_closed_forms(fid: str, chart: SurfaceChart, suite: str) -> list[Record]:
    """Family-specific operator formulas (asserted or informative)."""
    recs = []
    u, v = cl.sample_points(chart, 3)
    w = chart.warping
    loc, _fr, sh = analyze(chart, u, v)
    f, ratio = w.value(loc.z), w.log_derivative(loc.z)
    eye = np.eye(2)
    if fid in ("classA/h31-quadric", "generator/umbilic-h31-flat"):
        recs.append(_below(suite, fid, "A_e3=-(f'/f)I", sh.A_e3 + ratio[..., None, None] * eye, LEMMA_TOL))
        recs.append(_info(suite, fid, "A_e3=+(f'/f)I (opposite sign convention)", sh.A_e3 - ratio[..., None, None] * eye))
    if fid == "classA/s31":
        cfg = chart.meta["config"]
        a = cfg.profiles["a"]
        da, dda = exprlang.differentiate(a, "u"), exprlang.differentiate(exprlang.differentiate(a, "u"), "u")
        A = chart.meta["profile"].at(u, v)
        ap, app = exprlang.evaluate(da, u), exprlang.evaluate(dda, u)
        profile_form = ap / A + ratio + app / ap
        recs.append(_below(suite, fid, "A_e3 diagonal=-f'/f", sh.A_e3[..., 0, 0] + ratio, LEMMA_TOL))
        recs.append(_info(suite, fid, "A_e3 off-diagonal vs a'/A+f'/f+a''/a'", sh.A_e3[..., 0, 1] - profile_form))
        gc = generator_coefficients(chart, u, v)
        recs.append(_info(suite, fid, "A_e3 off-diagonal vs E_u/E-f'/f", sh.A_e3[..., 0, 1] - (gc.E_u / gc.E - ratio)))
        r = cfg.params["r"]
        target = math.sqrt(1 - r * r) / (r * f)
        recs.append(_info(suite, fid, "|h4_12|=|h4_22|=sqrt(1-r^2)/(r f)",
                          np.maximum(np.abs(np.abs(sh.h4_12) - target), np.abs(np.abs(sh.h4_22) - target))))
    if fid == "classA/nullscroll":
        b = chart.meta["b_of_u"](u)
        recs.append(_below(suite, fid, "|A_e4 diagonal|=|b(U)/f|", np.abs(sh.A_e4[..., 0, 0]) - np.abs(b / f), LEMMA_TOL))
    return recs


# ---------------------------------------------------------------------------
# suites


def _catalog(configs: Mapping[str, FamilyConfig] | None) -> dict[str, FamilyConfig]:
    out = {fid: default_config(fid) for fid in family_ids()}
    if configs:
        out.update(configs)
    return dict(sorted(out.items()))


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("SURFLAB_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn: Callable, items: Iterable) -> list:
    items = list(items)
    n = _workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def suite_numerics(ctx) -> list[Record]:
    S = "numerics"
    recs = []
    # jet2 is exact on quadratics and accurate on cubics
    rng = np.random.default_rng(7)
    coef = rng.normal(size=10)

    def poly(u, v):
        mons = [np.ones_like(u), u, v, u * u, u * v, v * v, u**3, u * u * v, u * v * v, v**3]
        return sum(c * mm for c, mm in zip(coef, mons))[..., None]

    u, v = rng.uniform(-1, 1, 20), rng.uniform(-1, 1, 20)
    j = jet2(poly, u, v)
    c = coef
    exact = [
        c[1] + 2 * c[3] * u + c[4] * v + 3 * c[6] * u * u + 2 * c[7] * u * v + c[8] * v * v,
        c[2] + c[4] * u + 2 * c[5] * v + c[7] * u * u + 2 * c[8] * u * v + 3 * c[9] * v * v,
        2 * c[3] + 6 * c[6] * u + 2 * c[7] * v,
        c[4] + 2 * c[7] * u + 2 * c[8] * v,
        2 * c[5] + 2 * c[8] * u + 6 * c[9] * v,
    ]
    got = [j.d_u[..., 0], j.d_v[..., 0], j.d_uu[..., 0], j.d_uv[..., 0], j.d_vv[..., 0]]
    recs.append(_below(S, "jet2", "cubic polynomial exactness", np.max([np.abs(a - b) for a, b in zip(got, exact)]), 1e-7))
    # RK4 order on y' = y
    errs = []
    for n in (20, 40):
        y = rk4_endpoint(lambda t, y: y, np.array([1.0]), 0.0, np.array(1.0), n)
        errs.append(abs(float(y[0]) - math.e))
    order = math.log2(errs[0] / errs[1])
    recs.append(_above(S, "rk4", "convergence order on y'=y", order, 3.9))
    # symbolic derivative vs finite differences
    worst = 0.0
    for text in ("exp(z)", "cosh(z)", "1 + z^2/4", "sin(2*z)*exp(-z)", "sqrt(1+z^2)", "log(2+z)/(1+z^2)"):
        e = exprlang.parse(text, ["z"])
        de = exprlang.differentiate(e, "z")
        zs = np.linspace(-0.9, 0.9, 19)
        h = 1e-3
        fd = (8 * (exprlang.evaluate(e, zs + h) - exprlang.evaluate(e, zs - h))
              - (exprlang.evaluate(e, zs + 2 * h) - exprlang.evaluate(e, zs - 2 * h))) / (12 * h)
        worst = max(worst, float(np.max(np.abs(fd - exprlang.evaluate(de, zs)))))
    recs.append(_below(S, "exprlang", "derivative vs finite differences", worst, 1e-7))
    # F' f = 1
    worst = 0.0
    for text in ("exp(z)", "cosh(z)", "1 + z^2/4"):
        wf = Warping.from_text(text)
        zs = np.linspace(-0.9, 0.9, 19)
        jj = jet1(lambda a, b, wf=wf: wf.antiderivative(a)[..., None], zs, np.zeros_like(zs))
        worst = max(worst, float(np.max(np.abs(jj.d_u[..., 0] * wf.value(zs) - 1))))
    recs.append(_below(S, "warping", "F' f = 1", worst, 1e-8))
    # closed-form F for f = exp(z)
    wf = Warping.from_text("exp(z)")
    zs = np.linspace(-1, 1, 21)
    recs.append(_below(S, "warping", "F = 1 - exp(-z) for f = exp(z)", wf.antiderivative(zs) - (1 - np.exp(-zs)), 1e-12))
    return recs


def suite_frames(ctx) -> list[Record]:
    S = "frames"

    def one(fid):
        ch = ctx.chart(fid)
        U, V = ch.grid(21, 21)
        fr = adapted_frame(ch, U, V)
        z = ch(U, V)[..., -1]
        inv = fr.invariants(z, ch.warping, ch.model)
        six = max(float(np.max(inv[k])) for k in ("TT", "UU", "TU", "e3e3", "e4e4", "e3e4"))
        return [
            _below(S, fid, "frame inner products (21x21)", six, 1e-8),
            _below(S, fid, "tangent-normal orthogonality (21x21)", inv["cross"], 1e-8),
            _below(S, fid, "split(e3).x4 = 1 (21x21)", split(fr.e3)[1] - 1, 1e-10),
        ]

    return [r for rs in _map(one, ctx.ids) for r in rs]


def suite_lemma(ctx) -> list[Record]:
    S = "lemma"

    def one(fid):
        ch = ctx.chart(fid)
        res = check_lemma_closed_forms(ch)
        recs = [_below(S, fid, q, r, _LEMMA_TOLS.get(q, LEMMA_TOL)) for q, r in res.items()]
        return recs + _family_closed_forms(fid, ch, S)

    return [r for rs in _map(one, ctx.ids) for r in rs]


MAIN_THEOREM = ("classA/s31", "classA/h31", "classA/h31-quadric", "classA/e31", "classA/nullscroll")


def suite_main_theorem(ctx) -> list[Record]:
    S = "main-theorem"

    def one(fid):
        ch = ctx.chart(fid)
        sv = cl.survey(ch)
        flag = cl.is_class_A(sv)
        expected = cl.FAIL if fid == "pseudoumb/e31-cone" else cl.PASS
        recs = [_flag_record(S, fid, flag, expected)]
        if expected == cl.PASS:
            recs.append(_below(S, fid, "h3", sv.gc.h3, 1e-6))
        recs.append(Record(S, fid, "class_a routes agree", None, 0.0, PASS if flag.routes_agree else FAIL))
        return recs

    ids = [fid for fid in MAIN_THEOREM + ("pseudoumb/e31-cone",) if fid in ctx.configs]
    # the null-scroll family is exercised in every space form
    for c in (-1, 1):
        key = f"classA/nullscroll@c={c}"
        if key not in ctx.configs:
            ctx.configs[key] = default_config("classA/nullscroll", c=c)
        ids.append(key)
    return [r for rs in _map(one, ids) for r in rs]


def suite_cartan(ctx) -> list[Record]:
    S = "cartan"
    recs = []
    k = 0.7
    m = model(-1)
    phi = flat_nullscroll_h31(k)
    init = state_from_scroll(phi, m, 1.0)
    path = integrate_cartan_frame(-1 / k**2, 1.0, m, init=init, span=(0.0, 1.0), step=1e-3)
    Us, Vs = np.meshgrid(np.linspace(0, 1, 41), np.linspace(-1, 1, 21), indexing="ij")
    chart = null_scroll_chart(path)
    recs.append(_below(S, "h31 k=0.7", "integrated vs closed-form scroll (sup)", chart(Us, Vs) - phi(Us, Vs), 1e-6))
    recs.append(_below(S, "h31 k=0.7", "Gram drift", path.drift(), 1e-9))
    Up, Vp = np.meshgrid(np.linspace(0.1, 0.9, 4), np.linspace(-0.8, 0.8, 4), indexing="ij")
    recs.append(_below(S, "h31 k=0.7", "K of closed-form scroll", generator_gaussian_curvature(phi, m, Up, Vp), 1e-4))
    recs.append(_below(S, "h31 k=0.7", "K of integrated scroll", generator_gaussian_curvature(chart, m, Up, Vp), 1e-4))
    recs.append(_below(S, "e31 b=0", "K of flat B-scroll", generator_gaussian_curvature(flat_bscroll_e31, model(0), Up, Vp), 1e-4))
    # shape operator of the scroll over {d_V, d_U} is [[b, a + V b'], [0, b]]
    S_op, N = base_shape_operator(lambda V, U: phi(U, V), m, Vp, Up)
    target = np.broadcast_to(np.array([[1.0, -1 / k**2], [0.0, 1.0]]), S_op.shape)
    recs.append(_below(S, "h31 k=0.7", "shape operator [[b, a+Vb'], [0, b]]", np.abs(S_op) - np.abs(target), 1e-5))
    st = path.at(Up)
    normal = -Vp[..., None] * 1.0 * st.B - st.C
    recs.append(_below(S, "h31 k=0.7", "normal -V b B - C (up to sign)",
                       np.minimum(np.abs(N - normal).max(-1), np.abs(N + normal).max(-1)), 1e-6))
    return recs


def suite_section5(ctx) -> list[Record]:
    S = "section5"
    recs = []
    eye = np.eye(2)

    def survey(fid):
        return cl.survey(ctx.chart(fid))

    def ah_target(fid, lam):
        sv = survey(fid)
        return sv, np.abs(sv.shape.A_H - lam(sv)[..., None, None] * eye).max(axis=(-2, -1))

    for fid in ("pseudoumb/e31-bscroll", "pseudoumb/e31-cone"):
        if fid in ctx.configs:
            _, r = ah_target(fid, lambda s: (s.fp / s.f) ** 2)
            recs.append(_below(S, fid, "A_H=(f'/f)^2 I", r, 1e-5))
    fid = "pseudoumb/e31-nullscroll"
    if fid in ctx.configs:
        c3 = ctx.configs[fid].params["c3"]
        _, r = ah_target(fid, lambda s: c3**2 + (s.fp / s.f) ** 2)
        recs.append(_below(S, fid, "A_H=(c3^2+f'^2/f^2) I", r, 1e-5))
    fid = "totumb/h31"
    if fid in ctx.configs:
        sv = survey(fid)
        recs.append(_below(S, fid, "A_e3=-(f'/f) I", sv.shape.A_e3 + (sv.fp / sv.f)[..., None, None] * eye, 1e-5))
        recs.append(_below(S, fid, "A_e4=(1/f) I", sv.shape.A_e4 - (1 / sv.f)[..., None, None] * eye, 1e-5))
        recs.append(_flag_record(S, fid, cl.is_totally_umbilical(sv), cl.PASS))
    fid = "pseudoumb/s31-torus"
    if fid in ctx.configs:
        ch = ctx.chart(fid)
        recs.append(_flag_record(S, fid, cl.is_pseudo_umbilical(survey(fid)), cl.PASS))
        psi, th = ch.meta["base_surface"], ctx.configs[fid].params["theta"]
        Up, Vp = np.meshgrid(np.linspace(-0.5, 0.5, 3), np.linspace(-0.5, 0.5, 3), indexing="ij")
        recs.append(_below(S, fid, "generator K", generator_gaussian_curvature(psi, model(1), Up, Vp), 1e-4))
        S_op, _ = base_shape_operator(psi, model(1), Up, Vp)
        d, off = 0.5 * (1 / math.tan(th) - math.tan(th)), -1 / math.sin(2 * th)
        target = np.array([[d, off], [off, d]])
        recs.append(_below(S, fid, "generator shape entries (up to sign)",
                           np.minimum(np.abs(S_op - target), np.abs(S_op + target)).max(axis=(-2, -1)), 1e-5))
        form = cl.shape_canonical_form(S_op[0, 0], np.array([[0.0, -1.0], [-1.0, 0.0]]))
        recs.append(Record(S, fid, "generator shape type I", None, 0.0, PASS if form["type"] == "I" else FAIL))
    # flags
    expectations = {
        "pseudoumb/e31-cone": {"pseudo_umbilical": cl.PASS, "flat_normal_bundle": cl.PASS, "class_a": cl.FAIL},
        "pseudoumb/e31-bscroll": {"pseudo_umbilical": cl.PASS},
        "pseudoumb/e31-nullscroll": {"pseudo_umbilical": cl.PASS},
        "pseudoumb/s31-nullscroll": {"pseudo_umbilical": cl.PASS},
        "fixture/sheared-bscroll": {"flat_normal_bundle": cl.FAIL},
    }
    for fid in MAIN_THEOREM:
        expectations.setdefault(fid, {})["flat_normal_bundle"] = cl.PASS
    expectations["classA/s31"]["pseudo_umbilical"] = cl.FAIL
    preds = {
        "pseudo_umbilical": cl.is_pseudo_umbilical,
        "flat_normal_bundle": cl.has_flat_normal_bundle,
        "class_a": cl.is_class_A,
        "totally_umbilical": cl.is_totally_umbilical,
    }

    def flags(fid):
        sv = survey(fid)
        out = []
        for name, exp in sorted(expectations[fid].items()):
            flag = preds[name](sv)
            out.append(_flag_record(S, fid, flag, exp))
            out.append(Record(S, fid, f"{name} routes agree", None, 0.0, PASS if flag.routes_agree else FAIL))
        return out

    ids = [fid for fid in sorted(expectations) if fid in ctx.configs]
    recs += [r for rs in _map(flags, ids) for r in rs]

    # negative results in c = 0 and c = 1
    def negative(fid):
        sv = survey(fid)
        flag = cl.is_totally_umbilical(sv)
        crit = flag.routes.get("criterion", flag.routes["direct"])["residual"]
        return [
            _flag_record(S, fid, flag, cl.FAIL),
            _above(S, fid, "totally umbilical criterion residual", crit, 1e-2),
        ]

    ids = [fid for fid, cfg in ctx.configs.items() if cfg.c in (0, 1)]
    recs += [r for rs in _map(negative, ids) for r in rs]
    return recs


STRUCTURE_F = ("exp(z)", "cosh(z)", "1 + z^2/4")


def _random_tangent(rng, x, m):
    v = rng.normal(size=m.dim + 1)
    bar = tangent_projection(x, v[:-1], m) if m.c != 0 else v[:-1]
    return np.concatenate([bar, v[-1:]])


def _random_point(rng, m):
    if m.c == 0:
        return rng.normal(size=3)
    while True:
        x = rng.normal(size=4)
        q = m.inner(x, x)
        if q * m.c > 0.05:
            return x / np.sqrt(q * m.c)


def suite_structure(ctx) -> list[Record]:
    S = "structure"

    def one(fid):
        ch = ctx.chart(fid)
        u, v = cl.sample_points(ch, 3)
        d = _structure_data(ch, u, v)
        res = _structure_residuals(d, d.comps)
        recs = [_below(S, fid, k, r, STRUCTURE_TOL) for k, r in res.items()]
        for key, (check, val) in _mutations(d).items():
            recs.append(_above(S, fid, f"mutation {key} detected by {check}", val, 1e-2))
        return recs

    recs = [r for rs in _map(one, ctx.ids) for r in rs]
    rng = np.random.default_rng(20240611)
    for c in (-1, 0, 1):
        m = model(c)
        for ftext in STRUCTURE_F:
            w = Warping.from_text(ftext)
            worst = 0.0
            # 100 samples: 4 base points with 25 random vector triples each
            for _ in range(4):
                x = _random_point(rng, m)
                z = float(rng.uniform(-0.8, 0.8))
                X, Y, Zv = np.array([[_random_tangent(rng, x, m) for _ in range(25)] for _ in range(3)])
                exact = curvature(x, z, X, Y, Zv, w, m)
                fd = curvature_fd(x, z, X, Y, Zv, w, m)
                scale = np.linalg.norm(exact, axis=-1).max()
                worst = max(worst, float(np.linalg.norm(fd - exact, axis=-1).max() / scale))
            recs.append(_below(S, f"ambient c={c} f={ftext}", "curvature closed form vs finite differences (relative)", worst, 1e-4))
    return recs




def suite_coordinates(ctx) -> list[Record]:
    S = "coordinates"
    recs = []
    eta = np.array([[0.0, -1.0], [-1.0, 0.0]])
    for c1, c2, ftext in ((1.0, 0.0, "1"), (0.7, 0.3, "exp(z)"), (-1.3, -0.5, "cosh(z)")):
        w = Warping.from_text(ftext)
        change, jac = isothermal_change(c1, c2, w)
        us, vs = np.meshgrid(np.linspace(-0.9, 0.9, 7), np.linspace(-1, 1, 7), indexing="ij")
        J = jac(us, vs)
        g = np.einsum("...ki,kl,...lj->...ij", J, eta, J)
        f = w.value(us)
        target = np.stack([np.stack([-1 / f**2, 1 / f], -1), np.stack([1 / f, 0 * f], -1)], -2)
        case = f"c1={c1} c2={c2} f={ftext}"
        recs.append(_below(S, case, "pullback of -(dUdV+dVdU)", g - target, 1e-10))
        jj = jet1(lambda a, b, change=change: np.stack(change(a, b), -1), us, vs)
        fdJ = np.stack([jj.d_u, jj.d_v], -1)
        recs.append(_below(S, case, "Jacobian vs finite differences", fdJ - J, 1e-8))
        recs.append(_below(S, case, "Jacobian determinant = 1/f", np.linalg.det(J) - 1 / f, 1e-10))
        recs.append(_below(S, case, "d_v proportional to d_U", J[..., 1, 1], 1e-12))
    # composed flat quadric: generator metric equals the flat generator form
    cfg = ctx.configs.get("classA/h31-quadric")
    if cfg is not None:
        ch = ctx.chart("classA/h31-quadric")
        u, v = cl.sample_points(ch, 3)
        g = generator_metric(ch, u, v)
        f = ch.warping.value(u)
        target = np.stack([np.stack([-1 / f**2, 1 / f], -1), np.stack([1 / f, 0 * f], -1)], -2)
        recs.append(_below(S, "classA/h31-quadric", "generator metric in (u, v)", g - target, 1e-8))
    return recs


def suite_fixtures(ctx) -> list[Record]:
    """Property flags against the ``expect`` table of each configuration."""
    S = "fixtures"

    def one(key):
        cfg = ctx.configs[key]
        flags = cl.classify(ctx.chart(key))
        out = []
        for name, exp in sorted(cfg.expect.items()):
            flag = flags.get(name)
            if flag is None:
                out.append(Record(S, key, f"{name}={exp}", None, 0.0, FAIL))
            else:
                out.append(_flag_record(S, key, flag, exp))
        return out

    keys = [k for k, cfg in ctx.configs.items() if cfg.expect]
    return [r for rs in _map(one, keys) for r in rs]


SUITES: dict[str, Callable] = {
    "numerics": suite_numerics,
    "frames": suite_frames,
    "lemma": suite_lemma,
    "main-theorem": suite_main_theorem,
    "cartan": suite_cartan,
    "section5": suite_section5,
    "structure": suite_structure,
    "coordinates": suite_coordinates,
    "fixtures": suite_fixtures,
}


class _Context:
    def __init__(self, configs):
        self.configs = _catalog(configs)
        self._cache: dict[str, SurfaceChart] = {}

    @property
    def ids(self) -> list[str]:
        return [k for k in self.configs if "@" not in k]

    def chart(self, key: str) -> SurfaceChart:
        if key not in self._cache:
            self._cache[key] = build_family(self.configs[key], warn=False)
        return self._cache[key]


def run_suite(suite_id: str, configs: Mapping[str, FamilyConfig] | None = None) -> list[Record]:
    """Run a suite ("all" runs every suite) and collect records; failures never raise."""
    if suite_id != "all" and suite_id not in SUITES:
        raise KeyError(f"unknown suite {suite_id!r}; choose from {', '.join(['all', *SUITES])}")
    ctx = _Context(configs)
    names = list(SUITES) if suite_id == "all" else [suite_id]
    out: list[Record] = []
    for name in names:
        try:
            out.extend(SUITES[name](ctx))
        except Exception as exc:  # noqa: BLE001  collected, not thrown
            out.append(Record(name, "suite", f"error: {type(exc).__name__}: {exc}", None, 0.0, FAIL))
    return out


def report_json(records: Iterable[Record]) -> str:
    recs = [r.to_dict() for r in records]
    summary = {v: sum(1 for r in recs if r["verdict"] == v) for v in ("pass", "fail", "indeterminate", "informative")}
    return json.dumps({"records": recs, "summary": summary}, indent=1, sort_keys=True) + "\n"
