"""Command-line front end: ``detlab run --config X.toml`` and ``detlab list``.

Each experiment returns result records plus named assertions; the report is
written atomically as JSON (and CSV where a table exists).  Exit status is 0
when every assertion passes, 2 when one fails, 1 on configuration or I/O
errors.
"""

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__, algebra
from . import fields as F
from . import quasimono as QM
from . import relation2d as R2
from . import residuals as R
from . import solutions as S
from .quadrature import MonteCarloRule, sphere_area
from .scalarlaws import law_from_descriptor


class ConfigError(ValueError):
    pass


# parameter schemas ---------------------------------------------------------------

@dataclass(frozen=True)
class Param:
    name: str
    kind: str  # int, float, bool, str, floats
    default: Any
    doc: str = ""
    check: Callable = None
    rule: str = ""

    def coerce(self, value, path):
        k = self.kind
        ok = {
            "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
            "float": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
            "bool": lambda v: isinstance(v, bool),
            "str": lambda v: isinstance(v, str),
            "floats": lambda v: isinstance(v, list) and all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in v),
        }[k]
        if not ok(value):
            raise ConfigError(f"{path}: expected {k}, got {value!r}")
        if k == "float":
            value = float(value)
        if k == "floats":
            value = [float(x) for x in value]
        if self.check is not None and not self.check(value):
            raise ConfigError(f"{path}: {value!r} violates {self.rule}")
        return value

    def schema(self):
        return {"name": self.name, "type": self.kind, "default": self.default, "doc": self.doc,
                "rule": self.rule}


def _dim(v):
    return v in (2, 3)


def _unit(v):
    return 0 < v < 1


EX1_PARAMS = [
    Param("n", "int", 2, "dimension", _dim, "n in {2, 3}"),
    Param("a", "float", 0.4, "inner radius", _unit, "0 < a < 1"),
    Param("b", "float", 0.6, "outer radius", _unit, "0 < b < 1"),
    Param("lambda1", "float", -2.0, "determinant inside a"),
    Param("lambda2", "float", 1.0, "determinant outside b"),
]


@dataclass(frozen=True)
class Experiment:
    name: str
    anchor: str
    description: str
    params: list
    runner: Callable
    default_level: int = 6
    table: bool = False

    def catalog_entry(self):
        return {"name": self.name, "anchor": self.anchor, "description": self.description,
                "default_level": self.default_level, "params": [p.schema() for p in self.params]}


def _assert(name, value, tolerance, passed=None):
    value = float(value) if value is not None else None
    if passed is None:
        passed = value is not None and value <= tolerance
    return {"name": name, "passed": bool(passed), "value": value, "tolerance": tolerance}


def _ex1(params):
    try:
        return S.Ex1Params(params["n"], params["a"], params["b"], params["lambda1"], params["lambda2"])
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from exc


# experiments ---------------------------------------------------------------------------

def run_identities(law, params, quad, rng):
    n = params["n"]
    mats = rng.standard_normal((1000, n, n))
    scale = 1 + algebra.inf_norm(mats) ** n
    alg = float(np.max(algebra.identity_residual(mats) / scale))
    results = [{"id": "cofactor_identity", "value": alg, "matrices": 1000}]
    asserts = [_assert("cofactor_identity", alg, 1e-12)]
    if n == 2:
        gapJ = float(np.max(np.abs(algebra.cof_via_J(mats) - algebra.cofactor(mats))))
        asserts.append(_assert("cofactor_quarter_turn", gapJ, 1e-14))
    worst = {"null_lagrangian": 0.0, "parts_identity_gap": 0.0, "composite_field_gap": 0.0}
    for _ in range(params["fields"]):
        u = F.random_polynomial_field(n, rng)
        zeta = F.random_bump(rng, n)
        for rep in (
            R.null_lagrangian_residual(u, zeta, quad),
            R.parts_identity_gap(F.squared_norm_scalar(), u, zeta, quad),
            R.composite_field_gap(law, u, zeta, quad),
        ):
            results.append(rep.to_dict())
            worst[rep.id] = max(worst[rep.id], abs(float(rep.value)))
    asserts += [
        _assert("null_lagrangian_max", worst["null_lagrangian"], 1e-8),
        _assert("parts_identity_max", worst["parts_identity_gap"], 1e-7),
        _assert("composite_field_max", worst["composite_field_gap"], 1e-7),
    ]
    return results, asserts


def run_radial(law, params, quad, rng):
    n, lam, c, branch = params["n"], params["lam"], params["c"], params["branch"]
    try:
        prof = S.classification_profile(n, lam, c, branch)
    except (ValueError, F.DomainError) as exc:
        raise ConfigError(f"params: {exc}") from exc
    u = F.radial_field(prof)
    m = params["samples"]
    x = rng.standard_normal((m, n))
    x *= (rng.uniform(0.05, 1.0, m) / np.linalg.norm(x, axis=1))[:, None]
    det = u.triple(x)[1]
    dev = float(np.max(np.abs(det - lam)))
    r = np.linalg.norm(x, axis=1)
    phi, dphi, _ = prof.evaluate(r)
    ode = float(np.max(np.abs(phi ** n + r * dphi * phi ** (n - 1) - lam)))
    eta = F.Bump1D(0.35, 0.65)
    zeta = F.radial_test_field(eta, prof)
    lam_arr = np.array([lam])
    red = R.radial_reduction_gap(lambda rr: law(np.full_like(rr, lam_arr[0])), prof, zeta, 0.3, 0.7, quad)
    results = [{"id": "determinant_deviation", "value": dev, "samples": m},
               {"id": "profile_ode_residual", "value": ode}, red.to_dict()]
    asserts = [_assert("determinant_deviation", dev, 1e-12), _assert("profile_ode_residual", ode, 1e-12),
               _assert("radial_reduction_gap", red.value, 1e-7)]
    return results, asserts


def run_ex1(law, params, quad, rng):
    p = _ex1(params)
    prof = S.ex1_profile(p)
    u = F.radial_field(prof)
    n = p.n
    results, worst = [], 0.0
    for _ in range(params["bumps"]):
        rep = R.weak_residual(law, u, F.random_bump(rng, n), quad)
        results.append(rep.to_dict())
        worst = max(worst, abs(float(rep.value)))
    asserts = [_assert("weak_residual_max", worst, 1e-6)]
    sampler = MonteCarloRule(n, 0.0, 1.0, params["samples"], seed=quad.seed)
    cr = R.hdet_constancy_report(law, u, sampler)
    results.append({"id": "constancy", **cr.to_dict()})
    expect = {float(law(np.array([p.lambda1]))[0]): p.a ** n,
              float(law(np.array([0.0]))[0]): p.b ** n - p.a ** n,
              float(law(np.array([p.lambda2]))[0]): 1 - p.b ** n}
    expect = {k: v for k, v in expect.items() if v > 0}
    ok = len(cr.cluster_centers) == len(expect)
    worst_mass = 0.0
    if ok:
        for center, mass in zip(cr.cluster_centers, cr.cluster_masses):
            key = min(expect, key=lambda k: abs(k - center))
            ok &= abs(key - center) <= 1e-6
            worst_mass = max(worst_mass, abs(mass - expect[key]) / expect[key])
    asserts.append(_assert("cluster_values", len(cr.cluster_centers), len(expect), passed=ok))
    asserts.append(_assert("cluster_mass_relative_error", worst_mass, 0.05))
    exps = F._multi_indices(n, 2)
    coefs = rng.uniform(-1, 1, (n, len(exps)))
    zt = F.polynomial_test_field(exps, coefs)
    rep = R.weak_residual(law, u, zt, quad)
    psi1 = F.sphere_mean(lambda x: np.sum(zt(x) * x, axis=1), 1.0, F.sphere_rule(n, 64))
    phi1 = float(prof.phi(np.array([1.0]))[0])
    closed = sphere_area(n) * float(law(np.array([p.lambda2]))[0]) * phi1 ** (n - 1) * psi1
    bgap = abs(float(rep.value) - closed)
    results.append({"id": "boundary_residual", "value": rep.value, "closed_form": closed, "gap": bgap})
    asserts.append(_assert("boundary_residual_gap", bgap, 1e-5))
    return results, asserts


def run_ex2(law, params, quad, rng):
    n = params["n"]
    try:
        spec = S.row_packing(params["balls"], n)
    except ValueError as exc:
        raise ConfigError(f"params.balls: {exc}") from exc
    u = S.ex2_packing(spec)
    results, worst = [{"id": "packing", "balls": [[list(c), r] for c, r in spec.balls],
                       "schedule": [list(q) for q in spec.per_ball]}], 0.0
    for _ in range(params["bumps"]):
        rep = R.weak_residual(law, u, F.random_bump(rng, n), quad)
        results.append(rep.to_dict())
        worst = max(worst, abs(float(rep.value)))
    return results, [_assert("weak_residual_max", worst, 1e-5)]


def run_qm_sweep(law, params, quad, rng):
    sweep = QM.qm_sweep(law, params["a"], params["epsilons"], quad.level, params["n"])
    results = [{"id": "sweep", **sweep.to_dict()}]
    asserts = [_assert("negative_value_found", sweep.first_negative, None, passed=sweep.first_negative is not None)]
    if sweep.first_negative is not None:
        p = QM.QMProfileParams(params["n"], params["a"], sweep.first_negative)
        vol, red = QM.volume_vs_reduced(law, p, quad)
        rel = abs(vol - red) / abs(red)
        results.append({"id": "volume_check", "epsilon": p.epsilon, "volume": vol, "reduced": red})
        asserts.append(_assert("volume_vs_reduced_relative", rel, 0.01))
    return results, asserts, sweep


def run_mu_estimate(law, params, quad, rng):
    p = _ex1(params)
    u = F.radial_field(S.ex1_profile(p))
    A = S.ex1_boundary_matrix(p)
    f = R.linear_boundary_functionals(law, u, A, quad)
    mu, stab = R.mu_estimate(law, u, A, quad)
    results = [{"id": "linear_functionals", **f.to_dict()},
               {"id": "mu_estimate", "mu": mu, "stability_gap": stab,
                "note": "closeness of mu to 1 is reported, not asserted"}]
    return results, [_assert("stability_gap", stab, 1e-3), _assert("functional_gap", f.gap, 1e-5)]


def run_relation2d(law, params, quad, rng):
    lam = params["lam"]
    try:
        pair = R2.plateau_pair(law, lam)
    except ValueError as exc:
        raise ConfigError(f"params.lam: {exc}") from exc
    mu = pair.declared_mu
    defi = R2.relation_deficiency(law, pair, quad)
    wedges = R2.wedge_functionals(law, pair, quad)
    bd = R2.dirichlet_residual(pair, mu)
    pos = R2.det_positivity_report(pair, MonteCarloRule(2, 0.0, 1.0, params["samples"], seed=quad.seed))
    r0sq = (lam - 1) / lam
    frac = pos["fraction_below"]["0.1"]
    results = [{"id": "relation_deficiency", "value": defi}, {"id": "wedges", **wedges},
               {"id": "boundary", **bd}, {"id": "det_positivity", **pos, "inner_area_fraction": r0sq}]
    wedge_gap = max(abs(wedges["m11"]), abs(wedges["m22"]), abs(wedges["m12"] - wedges["lambda_est"]),
                    abs(wedges["m21"] - wedges["lambda_est"]))
    asserts = [
        _assert("relation_deficiency", defi, 1e-8),
        _assert("boundary_gap", max(bd.values()), 1e-10),
        _assert("wedge_pattern", wedge_gap, 1e-6),
        _assert("ess_inf_det", abs(pos["ess_inf_det"]), 0.0),
        _assert("inner_fraction_relative", abs(frac - r0sq) / r0sq, 0.02),
    ]
    return results, asserts


def _annulus_bumps(rng, n, count, lo, hi):
    out = []
    while len(out) < count:
        rad = rng.uniform(0.05, 0.15)
        g = rng.standard_normal(n)
        c = g / np.linalg.norm(g) * rng.uniform(lo + rad, hi - rad)
        e = rng.standard_normal(n)
        out.append(F.bump_test_field(c, rad, rng.uniform(0.05, 0.5) * e / np.linalg.norm(e)))
    return out


def run_energy(law, params, quad, rng):
    n, count = params["n"], params["perturbations"]
    if params["field"] == "identity":
        u, tol = F.identity_field(n), 1e-8
        pert = [F.random_bump(rng, n, amplitude=rng.uniform(0.05, 0.5)) for _ in range(count)]
        sampler = MonteCarloRule(n, 0.0, 1.0, 2000, seed=quad.seed)
    else:
        u, tol = S.classification_field(n, params["lam"], params["c"]), 1e-7
        pert = _annulus_bumps(rng, n, count, 0.3, 0.9)
        sampler = MonteCarloRule(n, 0.3, 0.9, 2000, seed=quad.seed)
    deltas = R.energy_comparison(law, u, pert, quad, sampler)
    results = [{"id": "energy_deltas", "field": params["field"], "deltas": deltas, "min": min(deltas)}]
    return results, [_assert("min_delta_lower_bound", -min(deltas), tol)]


def run_blowup(law, params, quad, rng):
    p = _ex1(params)
    u = F.radial_field(S.ex1_profile(p))
    n = p.n
    thr = n / (n - 1)
    pf = params["p_factors"]
    rep = S.sobolev_blowup_exponent(u, p.b, [f * thr for f in pf])
    target = 1.0 / n - 1.0
    rel = abs(rep.exponent_fit - target) / abs(target)
    results = [{"id": "blowup", "target_exponent": target, **rep.to_dict()}]
    asserts = [_assert("exponent_relative_error", rel, 0.15),
               _assert("fit_reliable", None, None, passed=rep.reliable)]
    for f, pv in zip(pf, rep.p_grid):
        expected = f < 1.0
        asserts.append(_assert(f"finite_at_{f:g}_threshold", rep.shell_ratios[pv], 0.95,
                               passed=rep.finite[pv] == expected))
    return results, asserts


EXPERIMENTS = {e.name: e for e in [
    Experiment("identities", "algebraic and integral identities",
               "cofactor identities, null-Lagrangian residuals, parts and composite-field gaps",
               [Param("n", "int", 2, "dimension", _dim, "n in {2, 3}"),
                Param("fields", "int", 5, "random polynomial fields", lambda v: v > 0, "> 0")],
               run_identities),
    Experiment("radial", "radial classification family",
               "det Du = lam for phi = (lam + c/r^n)^(1/n); radial reduction gap",
               [Param("n", "int", 2, "dimension", _dim, "n in {2, 3}"),
                Param("lam", "float", 1.5, "determinant value"),
                Param("c", "float", 0.2, "profile constant"),
                Param("branch", "int", 1, "root branch", lambda v: v in (1, -1), "branch in {1, -1}"),
                Param("samples", "int", 10000, "sample points", lambda v: v > 0, "> 0")],
               run_radial),
    Experiment("ex1", "three-region very weak solution",
               "weak residual, determinant clusters and boundary residual of the three-region field",
               EX1_PARAMS + [Param("bumps", "int", 20, "random bumps", lambda v: v > 0, "> 0"),
                             Param("samples", "int", 100000, "Monte Carlo samples", lambda v: v > 0, "> 0")],
               run_ex1, default_level=9),
    Experiment("ex2", "ball packing of three-region fields",
               "weak residual of the packed field over the unit ball",
               [Param("n", "int", 2, "dimension", _dim, "n in {2, 3}"),
                Param("balls", "int", 3, "ball count", lambda v: 1 <= v <= 16, "1 <= balls <= 16"),
                Param("bumps", "int", 10, "random bumps", lambda v: v > 0, "> 0")],
               run_ex2, default_level=8),
    Experiment("qm-sweep", "non-quasimonotone radial perturbation",
               "Q(eps) sweep with first negative value and a volume cross-check",
               [Param("n", "int", 2, "dimension", _dim, "n in {2, 3}"),
                Param("a", "float", 0.5, "outer shell radius", _unit, "0 < a < 1"),
                Param("epsilons", "floats", [0.2, 0.1, 0.05, 0.02, 0.01], "shell widths",
                      lambda v: len(v) > 0 and all(x > 0 for x in v), "nonempty, positive")],
               run_qm_sweep, default_level=8, table=True),
    Experiment("mu-estimate", "linear boundary functionals",
               "lambda, B and mu for the three-region field with linear boundary values",
               [Param("n", "int", 2, "dimension", _dim, "n in {2, 3}"),
                Param("a", "float", 0.4, "inner radius", _unit, "0 < a < 1"),
                Param("b", "float", 0.6, "outer radius", _unit, "0 < b < 1"),
                Param("lambda1", "float", 0.0, "determinant inside a"),
                Param("lambda2", "float", 1.0, "determinant outside b")],
               run_mu_estimate, default_level=9),
    Experiment("relation2d", "planar plateau pair",
               "relation deficiency, wedge pattern, boundary values and determinant positivity",
               [Param("lam", "float", 2.0, "outer determinant", lambda v: v > 1, "lam > 1"),
                Param("samples", "int", 100000, "Monte Carlo samples", lambda v: v > 0, "> 0")],
               run_relation2d, default_level=8),
    Experiment("energy", "energy minimality",
               "f(det) energy change under compactly supported perturbations",
               [Param("n", "int", 2, "dimension", _dim, "n in {2, 3}"),
                Param("field", "str", "identity", "base map", lambda v: v in ("identity", "classification"),
                      "field in {identity, classification}"),
                Param("lam", "float", 1.5, "classification determinant"),
                Param("c", "float", 0.2, "classification constant"),
                Param("perturbations", "int", 100, "random perturbations", lambda v: v > 0, "> 0")],
               run_energy, default_level=6),
    Experiment("blowup", "Sobolev blow-up at a singular sphere",
               "|Du| exponent fit and integrability bracket at r = b",
               EX1_PARAMS + [Param("p_factors", "floats", [0.75, 1.0], "multiples of n/(n-1)",
                                   lambda v: len(v) > 0 and all(x > 0 for x in v), "nonempty, positive")],
               run_blowup),
]}


# configuration ------------------------------------------------------------------------

QUAD_KEYS = {"level", "seed", "sphere_nodes"}
OUTPUT_KEYS = {"path", "format"}


def validate_config(raw):
    """Check a parsed config and fill defaults; raises ConfigError naming the offending field."""
    if not isinstance(raw, dict):
        raise ConfigError("config: expected a table")
    unknown = set(raw) - {"experiment", "law", "params", "quad", "output"}
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown top-level key")
    name = raw.get("experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown experiment {name!r}; known: {sorted(EXPERIMENTS)}")
    exp = EXPERIMENTS[name]

    law_desc = raw.get("law", {"name": "identity"})
    try:
        law_from_descriptor(law_desc)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"law: {exc}") from exc
    if isinstance(law_desc, str):
        law_desc = {"name": law_desc}

    given = raw.get("params", {})
    if not isinstance(given, dict):
        raise ConfigError("params: expected a table")
    schema = {p.name: p for p in exp.params}
    for key in given:
        if key not in schema:
            raise ConfigError(f"params.{key}: unknown parameter for {name}")
    params = {p.name: p.coerce(given[p.name], f"params.{p.name}") if p.name in given else p.default
              for p in exp.params}

    quad = dict(raw.get("quad", {}))
    for key in quad:
        if key not in QUAD_KEYS:
            raise ConfigError(f"quad.{key}: unknown key")
    quad.setdefault("level", exp.default_level)
    quad.setdefault("seed", 0)
    for key in ("level", "seed"):
        if not isinstance(quad[key], int) or isinstance(quad[key], bool) or quad[key] < 0:
            raise ConfigError(f"quad.{key}: expected a nonnegative integer")
    if not 2 <= quad["level"] <= 12:
        raise ConfigError("quad.level: must lie in 2..12")
    if "sphere_nodes" in quad and (not isinstance(quad["sphere_nodes"], int) or quad["sphere_nodes"] < 4):
        raise ConfigError("quad.sphere_nodes: expected an integer >= 4")

    output = dict(raw.get("output", {}))
    for key in output:
        if key not in OUTPUT_KEYS:
            raise ConfigError(f"output.{key}: unknown key")
    output.setdefault("path", "reports")
    output.setdefault("format", "json")
    if output["format"] not in ("json", "csv"):
        raise ConfigError("output.format: must be 'json' or 'csv'")
    if not isinstance(output["path"], str):
        raise ConfigError("output.path: expected a string")
    return {"experiment": name, "law": law_desc, "params": params, "quad": quad, "output": output}


def example_config(name):
    """Config with every parameter at its default, as listed in the catalog."""
    exp = EXPERIMENTS[name]
    return {"experiment": name, "law": {"name": "identity"},
            "params": {p.name: p.default for p in exp.params},
            "quad": {"level": exp.default_level, "seed": 0},
            "output": {"path": "reports", "format": "csv" if exp.table else "json"}}


def computational_config(cfg):
    """The part of a config that determines the numbers (output location excluded)."""
    return {k: v for k, v in cfg.items() if k != "output"}


def config_hash(cfg):
    return hashlib.sha256(json.dumps(computational_config(cfg), sort_keys=True).encode()).hexdigest()


# execution ----------------------------------------------------------------------------

def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def execute(cfg):
    """Run a validated config; returns (report dict, csv text or None)."""
    exp = EXPERIMENTS[cfg["experiment"]]
    law = law_from_descriptor(cfg["law"])
    q = cfg["quad"]
    quad = R.QuadSpec(level=q["level"], sphere_nodes=q.get("sphere_nodes"), seed=q["seed"])
    rng = np.random.default_rng(q["seed"])
    out = exp.runner(law, cfg["params"], quad, rng)
    table = None
    if exp.table:
        results, asserts, sweep = out
        table = _csv_text(["epsilon", "Q", "error_estimate"], sweep.csv_rows())
    else:
        results, asserts = out
        if cfg["output"]["format"] == "csv":
            table = _csv_text(["name", "passed", "value", "tolerance"],
                              [(a["name"], a["passed"], a["value"], a["tolerance"]) for a in asserts])
    report = {
        "tool_version": __version__,
        "config_hash": config_hash(cfg),
        "experiment": exp.name,
        "seed": q["seed"],
        "levels": quad.levels,
        "config": computational_config(cfg),
        "results": R._to_json(results),
        "assertions": asserts,
    }
    return report, table


def run(config_path, level=None, seed=None, out_dir=None, stream=None):
    """Execute one config file; returns the process exit status."""
    stream = stream or sys.stdout
    try:
        with open(config_path, "rb") as fh:
            raw = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    raw.setdefault("quad", {})
    if level is not None:
        raw["quad"]["level"] = level
    if seed is not None:
        raw["quad"]["seed"] = seed
    try:
        cfg = validate_config(raw)
        if out_dir is not None:
            cfg["output"]["path"] = out_dir
        report, table = execute(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    base = os.path.join(cfg["output"]["path"], cfg["experiment"])
    try:
        _atomic_write(base + ".json", json.dumps(report, indent=2, sort_keys=True) + "\n")
        if table is not None:
            _atomic_write(base + ".csv", table)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return 1
    failed = [a for a in report["assertions"] if not a["passed"]]
    for a in report["assertions"]:
        print(f"{'PASS' if a['passed'] else 'FAIL'}  {a['name']}  value={a['value']}  tol={a['tolerance']}",
              file=stream)
    return 2 if failed else 0


def list_experiments(as_json=False, stream=None):
    stream = stream or sys.stdout
    catalog = [e.catalog_entry() for e in EXPERIMENTS.values()]
    if as_json:
        print(json.dumps(catalog, indent=2), file=stream)
        return catalog
    for e in catalog:
        names = ", ".join(p["name"] for p in e["params"])
        print(f"{e['name']:<12} {e['anchor']:<42} params: {names}", file=stream)
    return catalog


def main(argv=None):
    parser = argparse.ArgumentParser(prog="detlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--level", type=int)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--out")
    p_list = sub.add_parser("list", help="list experiments")
    p_list.add_argument("--json", action="store_true")
    args = parser.parse_args(argv)
    if args.command == "list":
        list_experiments(args.json)
        return 0
    return run(args.config, args.level, args.seed, args.out)


if __name__ == "__main__":
    sys.exit(main())
