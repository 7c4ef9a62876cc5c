"""Scenario description and the suite runner behind ``sasakilift verify``."""

from __future__ import annotations

import datetime as _dt
import sys
from dataclasses import dataclass, field

import numpy as np

from . import deform as D
from . import geometry as geo
from . import lift as L
from . import soliton as S
from . import symmetry as Y
from .catalog import BuiltEntry, CatalogError, lookup
from .kahler import holomorphic_sectional
from .report import VerificationReport

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

SUITES = (
    "sasakian", "structure-eqs", "curvature-relation", "ricci-relation", "ricci-form",
    "phi-sectional", "eta-einstein", "homothety", "soliton", "symmetry",
)
DEFAULT_TOL = 1e-7
DEFAULT_GRID = tuple((a, b) for a in (0.5, 1.0, 2.0) for b in (0.5, 1.0, 2.0))
PLUMBING = "plumbing"


class ScenarioError(ValueError):
    """Invalid scenario: bad value, unknown suite, or catalog miss."""


@dataclass
class Scenario:
    manifold: str
    params: dict = field(default_factory=dict)
    suites: tuple = SUITES
    points: int = 50
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    homothety_grid: tuple = DEFAULT_GRID
    output: str | None = None
    format: str = "json"

    def __post_init__(self):
        if isinstance(self.suites, str):
            self.suites = (self.suites,)
        if "all" in self.suites:
            self.suites = SUITES
        bad = [s for s in self.suites if s not in SUITES]
        if bad:
            raise ScenarioError(f"unknown suite(s) {bad}; choose from {', '.join(SUITES)}")
        self.suites = tuple(s for s in SUITES if s in self.suites)
        if not isinstance(self.points, (int, np.integer)) or self.points < 1:
            raise ScenarioError("points must be an integer >= 1")
        if not isinstance(self.seed, (int, np.integer)):
            raise ScenarioError("seed must be an integer")
        for k, v in self.tolerances.items():
            if k not in SUITES and k != "default":
                raise ScenarioError(f"tolerance given for unknown suite {k!r}")
            if not isinstance(v, (int, float)) or not v > 0:
                raise ScenarioError(f"tolerance for {k!r} must be a positive number")
        grid = []
        for pair in self.homothety_grid:
            try:
                grid.append(D.HomothetyParams(*pair))
            except (TypeError, ValueError) as exc:
                raise ScenarioError(f"bad homothety pair {pair!r}: {exc}") from None
        self.homothety_grid = tuple((h.alpha, h.beta) for h in grid)
        if self.format not in ("json", "text"):
            raise ScenarioError("format must be 'json' or 'text'")

    def tol(self, suite: str) -> float:
        return float(self.tolerances.get(suite, self.tolerances.get("default", DEFAULT_TOL)))


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"scenario file is not valid TOML: {exc}") from None
    return scenario_from_dict(doc)


def scenario_from_dict(doc: dict) -> Scenario:
    known = {"manifold", "run", "tolerances", "homothety"}
    extra = set(doc) - known
    if extra:
        raise ScenarioError(f"unknown scenario section(s) {sorted(extra)}")
    man = dict(doc.get("manifold", {}))
    if "name" not in man:
        raise ScenarioError("scenario needs [manifold] name = ...")
    name = man.pop("name")
    run = dict(doc.get("run", {}))
    allowed = {"suites", "points", "seed", "output", "format"}
    if set(run) - allowed:
        raise ScenarioError(f"unknown [run] key(s) {sorted(set(run) - allowed)}")
    kw = {k: run[k] for k in allowed if k in run}
    if "suites" in kw:
        kw["suites"] = tuple(kw["suites"])
    grid = doc.get("homothety", {}).get("grid")
    if grid is not None:
        kw["homothety_grid"] = tuple(tuple(p) for p in grid)
    return Scenario(name, man, tolerances=dict(doc.get("tolerances", {})), **kw)


# -- suites -------------------------------------------------------------------------


@dataclass
class _Ctx:
    entry: BuiltEntry
    ls: L.LiftStructure
    Q: np.ndarray
    sc: Scenario
    rep: VerificationReport

    def add(self, suite, label, anchor, residual, value=None):
        self.rep.add(f"{suite}.{label}", anchor, residual, self.sc.tol(suite), self.Q.shape[0], value)


def _suite_sasakian(c: _Ctx):
    for key, arr in L.sasakian_residuals(c.ls.contact, c.Q).items():
        c.add("sasakian", key, L.SASAKIAN_ANCHORS[key], L._max(arr))


def _suite_structure(c: _Ctx):
    d = c.ls.dim - 1
    fields = [np.eye(d)[i] for i in range(d)] + list(c.entry.symmetries.values())
    worst = {"streqs_xi": 0.0, "streqs_lift": 0.0, "commutator": 0.0}
    for X in fields:
        for Yf in fields:
            r = L.structure_eq_residuals(c.ls, X, Yf, c.Q)
            for k in worst:
                worst[k] = max(worst[k], r[k])
    c.add("structure-eqs", "xi", "nabla_{X^L} xi = -phi X^L", worst["streqs_xi"])
    c.add("structure-eqs", "lift", "nabla_{X^L} Y^L = (nabla_X Y)^L - Phi(X^L,Y^L) xi", worst["streqs_lift"])
    c.add("structure-eqs", "commutator", "[X^L,Y^L] = [X,Y]^L - 2 Phi(X^L,Y^L) xi", worst["commutator"])


def _suite_curvature(c: _Ctx):
    rng = np.random.default_rng(c.sc.seed + 101)
    d = c.ls.dim - 1
    X, Yv, Z = (rng.normal(size=(c.Q.shape[0], d)) for _ in range(3))
    r = L.curvature_relation_residual(c.ls, X, Yv, Z, c.Q)
    c.add("curvature-relation", "lifted_triples",
          "R(X^L,Y^L)Z^L = (R(X,Y)Z)^L + Phi(Y^L,Z^L)phi X^L - Phi(X^L,Z^L)phi Y^L - 2Phi(X^L,Y^L)phi Z^L",
          r["curvature"])


def _suite_ricci(c: _Ctx):
    r = L.ricci_relation_residual(c.ls, c.Q)
    c.add("ricci-relation", "lifted_pairs", "Ric_L(X^L,Y^L) = Ric(X,Y) - 2g(X,Y)", r["ricci_lifted"])
    c.add("ricci-relation", "scalar", "s_L = s - 2n", r["scalar"], float(np.mean(r["scalar_lift"])))


def _suite_ricci_form(c: _Ctx):
    r = L.ricci_form_relation(c.ls, c.Q)
    c.add("ricci-form", "lifted_pairs", "rho_L = pi*rho - 2 pi*omega", r["lifted_pairs"])
    c.add("ricci-form", "xi_slot", "rho_L(X^L, xi) = 0", r["xi_slot"])
    c.add("ricci-form", "closed", "d rho_L = 0", r["closed"])


def _suite_phi_sectional(c: _Ctx):
    v = L.random_contact_vectors(c.ls, c.Q, c.sc.seed + 202)
    K = L.phi_sectional(c.ls, c.Q, v)
    base_v = v[:, 1:]
    hsc = holomorphic_sectional(c.ls.base, c.Q[:, 1:], base_v)
    c.add("phi-sectional", "c_minus_3", "K_phi(v) = H(v) - 3 with H the base holomorphic sectional curvature",
          L._max(K - (hsc - 3.0)), float(np.mean(K)))
    if c.entry.holomorphic is not None:
        c.add("phi-sectional", "constant", f"K_phi = c - 3 = {c.entry.holomorphic - 3:g}",
              L._max(K - (c.entry.holomorphic - 3.0)), float(np.mean(K)))


def _suite_eta_einstein(c: _Ctx):
    cval = c.entry.einstein if c.entry.einstein is not None else "auto"
    if cval == "auto" and c.ls.n != 1:
        raise geo.PreconditionError("base is not Kähler-Einstein")
    r = L.eta_einstein_check(c.ls, cval, c.Q)
    c.add("eta-einstein", "identity", "Ric_L = (c-2) g_L + (2n-c+2) eta(x)eta", r["eta_einstein"])


def _suite_homothety(c: _Ctx):
    worst = dict.fromkeys(("difference", "ratio", "ratio_fit", "curvature", "ricci", "ricci_trace",
                           "round_trip"), 0.0)
    published = {"curvature": 0.0, "ricci": 0.0}
    for a, b in c.sc.homothety_grid:
        hp = D.HomothetyParams(a, b)
        ds = D.apply_homothety(c.ls.contact, hp)
        worst["difference"] = max(worst["difference"], D.difference_tensor_residual(ds, c.Q)["difference"])
        asr = D.alpha_sasaki_residual(ds, c.Q)
        worst["ratio"] = max(worst["ratio"], asr["residual"])
        worst["ratio_fit"] = max(worst["ratio_fit"], abs(asr["ratio_fit"] - b / a))
        worst["curvature"] = max(worst["curvature"], D.curvature_deform_residual(ds, q=c.Q)["curvature"])
        rr = D.ricci_deform_residual(ds, c.Q)
        worst["ricci"] = max(worst["ricci"], rr["ricci"])
        worst["ricci_trace"] = max(worst["ricci_trace"], rr["trace"])
        back = D.apply_homothety(ds, hp.inverse(), validate_points=0)
        worst["round_trip"] = max(worst["round_trip"],
                                  L._max(back.contact.metric(c.Q) - c.ls.chart.metric(c.Q)))
        published["curvature"] = max(published["curvature"],
                                 D.curvature_deform_residual(ds, q=c.Q, form="published")["curvature"])
        published["ricci"] = max(published["ricci"], D.ricci_deform_residual(ds, c.Q, form="published")["ricci"])
    c.add("homothety", "difference_tensor", "nabla = nabla' + T, T_XY = c(eta'(X)phi Y + eta'(Y)phi X)",
          worst["difference"])
    c.add("homothety", "alpha_sasakian", "(nabla'_X phi)Y = (beta/alpha)(g'(X,Y)xi' - eta'(Y)X)", worst["ratio"])
    c.add("homothety", "ratio_fit", "fitted ratio = beta/alpha", worst["ratio_fit"])
    c.add("homothety", "curvature", "R = R' + (c beta/alpha)[2Phi'(X,Y)phi Z + Phi'(X,Z)phi Y - Phi'(Y,Z)phi X "
          "+ (g'(X,Z)eta'(Y) - g'(Y,Z)eta'(X))xi'] + (c^2 - 2c beta/alpha) eta'(Z)(eta'(Y)X - eta'(X)Y)",
          worst["curvature"])
    c.add("homothety", "ricci", "Ric = Ric' + 2(c beta/alpha) g' + (2n c^2 - 2(2n+1) c beta/alpha) eta'(x)eta'",
          worst["ricci"])
    c.add("homothety", "ricci_trace", "trace of the Ricci law with g'^-1", worst["ricci_trace"])
    c.add("homothety", "round_trip", "(alpha,beta) then (1/alpha,1/beta) recovers g", worst["round_trip"])
    if any(a != b * b for a, b in c.sc.homothety_grid):
        c.rep.add_finding(
            "homothety_published_coefficients",
            "the published curvature and Ricci transformation coefficients disagree with the computed "
            "curvature unless alpha = beta^2; the entries above use the re-derived coefficients",
            published_curvature_residual=published["curvature"], published_ricci_residual=published["ricci"],
        )


def _suite_soliton(c: _Ctx):
    sd = c.entry.soliton
    if sd is None:
        raise geo.PreconditionError("entry has no soliton datum")
    r = S.lift_soliton_residuals(c.ls, sd, c.Q)
    c.add("soliton", "lifted_pairs", "Ric_L + 1/2 L_{X^L} g_L = (lam - 2) g_L on lifted pairs", r["lifted_pairs"])
    c.add("soliton", "mixed", "(Ric_L + 1/2 L_{X^L} g_L)(xi, Y^L) = Phi(X^L, Y^L)", r["mixed"])
    c.add("soliton", "xi_xi", "(Ric_L + 1/2 L_{X^L} g_L)(xi, xi) = 2n", r["xi_xi"])
    c.add("soliton", "ricci_form", "rho_L + 1/2 L_{X^L} Phi = (lam - 2) Phi",
          S.ricci_form_soliton_residual(c.ls, sd, c.Q)["ricci_form"])
    fit, finding = S.constants_finding(c.ls, sd, c.Q)
    c.rep.findings.append(finding)
    c.add("soliton", "fit_residual", PLUMBING, fit.residual)
    c.add("soliton", "lambda_shift", "fitted lambda' = lam - 2", abs(fit.lam - (sd.lam - 2.0)), fit.lam)
    # transport of the fitted constants through the homothety grid
    XL = L.lift_field(c.ls, sd.X)
    worst = 0.0
    for a, b in c.sc.homothety_grid:
        ds = D.apply_homothety(c.ls.contact, D.HomothetyParams(a, b), X=XL)
        refit = S.fit_constants(ds.contact, ds.X, c.Q)
        pred = D.soliton_constants_map(*fit.triple, c.ls.n, ds.params)
        idx = [i for i in range(3) if not (i == 1 and 1 in fit.dropped)]
        worst = max(worst, max(abs(refit.triple[i] - pred[i]) for i in idx))
    c.add("soliton", "transport", "refit on the deformed lift = constants map of the source fit", worst)


def _suite_symmetry(c: _Ctx):
    ks = c.ls.base
    skipped = []
    for name, V in c.entry.symmetries.items():
        sf = Y.measure_symmetry(ks, V, c.Q[:, 1:], name=name)
        pre = f"symmetry.{name}"
        if sf.hamiltonian_residual is not None:
            c.rep.add(f"{pre}.hamiltonian", "dH = omega(V, .)", sf.hamiltonian_residual,
                      c.sc.tol("symmetry"), c.Q.shape[0])
        if sf.is_holomorphic:
            r = Y.automorphism_lift_residual(c.ls, sf, c.Q)
            c.rep.add(f"{pre}.inaut", "(L_{V^L} phi)X^L = 2 g_L(V^L,X^L) xi; (L_{V^L} phi)xi = 0",
                      max(r.values()), c.sc.tol("symmetry"), c.Q.shape[0])
        else:
            skipped.append(f"{name}: not holomorphic")
        if sf.is_killing:
            r = Y.killing_lift_residual(c.ls, sf, c.Q)
            c.rep.add(f"{pre}.killing", "(L_{V^L} g_L)(X^L,Y^L) = 0; (L_{V^L} g_L)(xi,X^L) = 2Phi(V^L,X^L)",
                      max(r.values()), c.sc.tol("symmetry"), c.Q.shape[0])
        else:
            skipped.append(f"{name}: not Killing")
        if sf.is_symplectic:
            r = Y.form_automorphism_residual(c.ls, sf, c.Q)
            c.rep.add(f"{pre}.form", "L_{V^L} Phi = 0; d(L_{V^L} eta) = 0", max(r.values()),
                      c.sc.tol("symmetry"), c.Q.shape[0])
        else:
            skipped.append(f"{name}: does not preserve omega")
        if sf.is_automorphism:
            r = Y.combined_theorem_residual(c.ls, sf, c.Q)
            c.rep.add(f"{pre}.combined", "L_{V^L} phi = 2 alpha(x)xi; L_{V^L} g_L = 4 alpha^phi . eta; "
                      "L_{V^L} Phi = 0; d alpha^phi = 0", max(r.values()), c.sc.tol("symmetry"), c.Q.shape[0])
            r = Y.corrected_automorphism_residual(c.ls, sf, c.Q, sign=-1.0)
            c.rep.add(f"{pre}.corrected", "U = V^L - 2H xi preserves (phi, xi, eta, g_L)", max(r.values()),
                      c.sc.tol("symmetry"), c.Q.shape[0])
            probe = Y.corrected_automorphism_residual(c.ls, sf, c.Q, sign=+1.0)
            worst = max(probe.values())
            c.rep.add(f"{pre}.sign_probe", "U = V^L + 2H xi must fail; residual = 1e-3 / observed",
                      1e-3 / worst if worst > 0 else np.inf, 1.0, c.Q.shape[0], worst)
    if skipped:
        c.rep.add_finding("symmetry_skipped", "operations skipped because the field lacks the property",
                          skipped=skipped)


_RUNNERS = {
    "sasakian": _suite_sasakian,
    "structure-eqs": _suite_structure,
    "curvature-relation": _suite_curvature,
    "ricci-relation": _suite_ricci,
    "ricci-form": _suite_ricci_form,
    "phi-sectional": _suite_phi_sectional,
    "eta-einstein": _suite_eta_einstein,
    "homothety": _suite_homothety,
    "soliton": _suite_soliton,
    "symmetry": _suite_symmetry,
}


def build_entry(sc: Scenario) -> BuiltEntry:
    try:
        return lookup(sc.manifold, **sc.params)
    except CatalogError as exc:
        raise ScenarioError(str(exc)) from None


def run_scenario(sc: Scenario, timestamp: bool = True) -> VerificationReport:
    entry = build_entry(sc)
    ls = L.build_lift(entry.ks)
    Q = ls.chart.sample_points(sc.points, sc.seed)
    rep = VerificationReport(meta={
        "manifold": entry.label,
        "points": sc.points,
        "seed": sc.seed,
        "suites": list(sc.suites),
    })
    if timestamp:
        rep.meta["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    ctx = _Ctx(entry, ls, Q, sc, rep)
    for suite in sc.suites:
        try:
            _RUNNERS[suite](ctx)
        except (geo.PreconditionError, ValueError, np.linalg.LinAlgError) as exc:
            rep.add(f"{suite}.error", f"{type(exc).__name__}: {exc}", np.inf, sc.tol(suite), Q.shape[0])
    return rep
