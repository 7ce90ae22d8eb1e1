"""Verification suites, parameter scans and mesh export.

Config files are JSON with ``schema_version`` 1::

    {"schema_version": 1,
     "settings": {"fd_step": 1e-3, "pmc_fd_step": 1e-4, "ode_step": null, "tol_scale": 1.0},
     "surfaces": [{"name": "...",
                   "spec": {"family": "special_1", "params": {...}},
                   "grid": {"nx": 6, "ny": 6, "margin": 0.1},
                   "checks": ["pmc", "hopf", "kahler", "frames", "codazzi", "intersection"],
                   "expect": {"theta": 0.0, "Hnorm2": 0.125},
                   "tolerances": {"pmc": 1e-4}}]}

Unknown keys anywhere raise :class:`ConfigError`.
"""

import ast
import inspect
import csv
import itertools
import json
import logging
import math
import operator
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import extrinsic as ex
from . import frames as fr
from .ambient import GeometryError, membership_residual
from .hode import ProfileError
from .surfaces import FAMILIES, SurfaceSpec, _CurveProduct, _Lift, _Special, eval_jet, sample_grid

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
THREADS_ENV = "PMCSURF_THREADS"
CHECKS = ("pmc", "hopf", "kahler", "frames", "codazzi", "intersection")
DEFAULT_TOLERANCES = {
    "pmc": 1e-4,
    "Hnorm2": 1e-4,
    "theta": 1e-3,
    "theta_vanish": 1e-4,
    "holomorphic": 1e-4,
    "kahler_bound": 1e-9,
    "csquared": 1e-6,
    "intersection": 1e-5,
    "relation": 1e-9,
    "AH": 1e-5,
    "ricci": 1e-6,
    "codazzi": 1e-3,
    "frenet_invariants": 1e-6,
    "hopf_alternative": 1e-5,
    "frenet_pde": 1e-3,
    "fmatrix": 1e-6,
    "matrixAH": 1e-6,
    "hXiXixij": 1e-5,
    "adapted_pde": 1e-3,
    "nucomp": 1e-4,
}
DEFAULT_SETTINGS = {"fd_step": 1e-3, "pmc_fd_step": 1e-4, "codazzi_step": 1e-4, "ode_step": None, "tol_scale": 1.0}
CONVERGENCE_FACTOR = 2.0
# residuals below this are rounding noise; step halving cannot shrink them
NOISE_FLOOR = 1e-9
_STEP_PARAMS = {"special_1": "step", "special_2": "step", "curve_product": "step"}
_ERRORS = (GeometryError, ProfileError, ValueError, ZeroDivisionError, np.linalg.LinAlgError)


class ConfigError(ValueError):
    pass


@dataclass
class SurfaceJob:
    name: str
    spec: SurfaceSpec
    nx: int = 6
    ny: int = 6
    margin: float = 0.1
    checks: tuple = CHECKS
    expect: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)


@dataclass
class SuiteConfig:
    surfaces: list
    settings: dict = field(default_factory=lambda: dict(DEFAULT_SETTINGS))


def _reject_unknown(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    extra = set(obj) - set(allowed)
    if extra:
        raise ConfigError(f"{where}: unknown fields {sorted(extra)}")


def _positive(v, where):
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
        raise ConfigError(f"{where} must be a positive number")
    return float(v)


def parse_config(data, overrides=None):
    """Validate a config dict and return a :class:`SuiteConfig`."""
    _reject_unknown(data, ("schema_version", "settings", "surfaces"), "config")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
    settings = dict(DEFAULT_SETTINGS)
    raw = data.get("settings", {})
    _reject_unknown(raw, DEFAULT_SETTINGS, "settings")
    settings.update(raw)
    for k, v in (overrides or {}).items():
        if v is not None:
            settings[k] = v
    for k in ("fd_step", "pmc_fd_step", "codazzi_step", "tol_scale"):
        settings[k] = _positive(settings[k], f"settings.{k}")
    if settings["ode_step"] is not None:
        settings["ode_step"] = _positive(settings["ode_step"], "settings.ode_step")

    surfaces = data.get("surfaces", [])
    if not isinstance(surfaces, list):
        raise ConfigError("surfaces must be a list")
    jobs = []
    for i, s in enumerate(surfaces):
        where = f"surfaces[{i}]"
        _reject_unknown(s, ("name", "spec", "grid", "checks", "expect", "tolerances"), where)
        if "spec" not in s:
            raise ConfigError(f"{where}: missing spec")
        spec_d = s["spec"]
        _reject_unknown(spec_d, ("family", "params", "domain"), f"{where}.spec")
        try:
            spec = SurfaceSpec.from_dict(spec_d)
        except (GeometryError, KeyError, TypeError) as e:
            raise ConfigError(f"{where}.spec: {e}") from e
        check_params(spec.family, spec.params, f"{where}.spec.params")
        if settings["ode_step"] is not None and spec.family in _STEP_PARAMS:
            spec.params.setdefault(_STEP_PARAMS[spec.family], settings["ode_step"])
        grid = s.get("grid", {})
        _reject_unknown(grid, ("nx", "ny", "margin"), f"{where}.grid")
        nx, ny = grid.get("nx", 6), grid.get("ny", 6)
        if not all(isinstance(n, int) and n >= 1 for n in (nx, ny)):
            raise ConfigError(f"{where}.grid: nx, ny must be positive integers")
        margin = grid.get("margin", 0.1)
        if not 0 <= margin < 0.5:
            raise ConfigError(f"{where}.grid.margin must lie in [0, 0.5)")
        checks = s.get("checks", list(CHECKS))
        bad = [c for c in checks if c not in CHECKS]
        if bad:
            raise ConfigError(f"{where}: unknown checks {bad}")
        expect = s.get("expect", {})
        _reject_unknown(expect, ("theta", "theta_abs", "Hnorm2"), f"{where}.expect")
        tols = s.get("tolerances", {})
        _reject_unknown(tols, DEFAULT_TOLERANCES, f"{where}.tolerances")
        tols = {k: _positive(v, f"{where}.tolerances.{k}") for k, v in tols.items()}
        jobs.append(SurfaceJob(s.get("name", f"surface{i}"), spec, nx, ny, float(margin),
                               tuple(checks), dict(expect), tols))
    return SuiteConfig(jobs, settings)


def family_params(family):
    """Parameter names accepted by a family constructor."""
    target = {"curve_product": _CurveProduct, "special_1": _Special, "special_2": _Special}.get(family, _Lift)
    names = list(inspect.signature(target.__init__).parameters)[1:]
    return [n for n in names if n not in ("variant", "factor")]


def check_params(family, params, where="params"):
    if not isinstance(params, dict):
        raise ConfigError(f"{where}: expected an object")
    extra = set(params) - set(family_params(family))
    if extra:
        raise ConfigError(f"{where}: unknown parameters {sorted(extra)} for {family}")


def load_config(path, overrides=None):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e}") from e
    return parse_config(data, overrides)


def bundled_config(name):
    """Path of a config shipped with the package (e.g. ``vanishing_theta.json``)."""
    return resources.files("pmcsurf") / "configs" / name


def thread_count():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


# -- checks -----------------------------------------------------------------

def _expected_theta(expect):
    t = expect.get("theta")
    if t is None:
        return None
    return complex(t[0], t[1]) if isinstance(t, (list, tuple)) else complex(t)


def _worst(rows, values):
    i = int(np.argmax(values))
    return float(values[i]), [rows[i].x, rows[i].y]


def _result(ok, max_residual, worst, **metrics):
    return {"pass": bool(ok), "max_residual": max_residual, "worst": worst, "metrics": metrics}


def _converged(fn, step, tol_res):
    """Residual at step and step/2; passes if small and shrinking (or at the noise floor)."""
    r1, r2 = fn(step), fn(step / 2)
    factor = r1 / r2 if r2 > 0 else float("inf")
    ok = r1 < tol_res and (r1 < NOISE_FLOOR or factor >= CONVERGENCE_FACTOR)
    return ok, r1, r2, factor


class _Runner:
    def __init__(self, job, settings):
        self.job = job
        self.spec = job.spec
        self.s = settings
        scale = settings["tol_scale"]
        self.tol = {k: v * scale for k, v in DEFAULT_TOLERANCES.items()}
        self.tol.update({k: v * scale for k, v in job.tolerances.items()})
        self.points = sample_grid(self.spec, job.nx, job.ny, job.margin)
        self.rows = [ex.analyze(self.spec, x, y, settings["pmc_fd_step"]) for x, y in self.points]
        theta_exp = _expected_theta(job.expect)
        if theta_exp is not None:
            self.vanishing = abs(theta_exp) == 0
        else:
            self.vanishing = max(abs(r.theta) for r in self.rows) < self.tol["theta_vanish"]

    def pmc(self):
        res = np.array([r.pmc_residual for r in self.rows])
        h2 = np.array([r.Hnorm2 for r in self.rows])
        val, worst = _worst(self.rows, res)
        ok = val < self.tol["pmc"] and h2.min() > 0
        metrics = {"Hnorm2_min": float(h2.min()), "Hnorm2_max": float(h2.max())}
        if "Hnorm2" in self.job.expect:
            dev = float(np.abs(h2 - self.job.expect["Hnorm2"]).max())
            metrics["Hnorm2_deviation"] = dev
            ok = ok and dev < self.tol["Hnorm2"]
        return _result(ok, val, worst, **metrics)

    def hopf(self):
        thetas = np.array([r.theta for r in self.rows])
        step = self.s["fd_step"]
        holo = []
        for x, y in self.points:
            holo.append(self._dzbar_theta(x, y, step) if self.spec.contains(x, y, margin=step) else 0.0)
        holo = np.array(holo)
        metrics = {"theta_re_mean": float(thetas.real.mean()), "theta_im_mean": float(thetas.imag.mean()),
                   "theta_abs_max": float(np.abs(thetas).max()), "holomorphic_max": float(holo.max()),
                   "pmc_flagged": bool(max(r.pmc_residual for r in self.rows) >= self.tol["pmc"])}
        ok = holo.max() < self.tol["holomorphic"]
        dev = np.zeros(len(thetas))
        te = _expected_theta(self.job.expect)
        if te is not None:
            dev = np.abs(thetas - te)
            ok = ok and dev.max() < (self.tol["theta_vanish"] if te == 0 else self.tol["theta"])
        if "theta_abs" in self.job.expect:
            dev = np.maximum(dev, np.abs(np.abs(thetas) - self.job.expect["theta_abs"]))
            ok = ok and dev.max() < self.tol["theta"]
        val, worst = _worst(self.rows, np.maximum(dev, holo))
        return _result(ok, val, worst, **metrics)

    def _dzbar_theta(self, x, y, h):
        th = [ex.hopf_coefficient(eval_jet(self.spec, x + dx, y + dy, order=2))
              for dx, dy in ((h, 0), (-h, 0), (0, h), (0, -h))]
        tx, ty = (th[0] - th[1]) / (2 * h), (th[2] - th[3]) / (2 * h)
        return abs((tx + 1j * ty) / 2)

    def kahler(self):
        C1 = np.array([r.C1 for r in self.rows])
        C2 = np.array([r.C2 for r in self.rows])
        bound = float(max(np.abs(C1).max(), np.abs(C2).max()) - 1)
        ok = bound <= self.tol["kahler_bound"]
        csq = np.abs(C1**2 - C2**2)
        pattern = sign_pattern(C1, C2)
        metrics = {"C_abs_max": bound + 1, "csquared_max": float(csq.max()), "sign_pattern": pattern}
        if self.vanishing:
            ok = ok and csq.max() < self.tol["csquared"] and pattern != "mixed"
        val, worst = _worst(self.rows, csq)
        return _result(ok, val, worst, **metrics)

    def intersection(self):
        smin = np.array([min(r.smin_dphi, r.smin_dpsi) for r in self.rows])
        csq = np.array([abs(r.C1**2 - r.C2**2) for r in self.rows])
        # both directions of the C1^2 = C2^2 <=> rank-defect equivalence, pointwise
        agree = np.array([(s < self.tol["intersection"]) == (c < self.tol["csquared"]) for s, c in zip(smin, csq)])
        val, worst = _worst(self.rows, smin)
        ok = bool(agree.all())
        if self.vanishing:
            ok = ok and val < self.tol["intersection"]
        return _result(ok, val, worst, equivalence_holds=bool(agree.all()), claimed=self.vanishing)

    def codazzi(self):
        directions = [((1, 0), (0, 1), (1, 0)), ((0, 1), (1, 0), (0, 1)), ((1, 0), (0, 1), (0, 1)),
                      ((1, 1), (0, 1), (1, -1))]
        jets = [eval_jet(self.spec, x, y, order=3) for x, y in self.points]

        def worst_at(jet, d):
            return max(ex.codazzi_residual(jet, *t, delta=d) for t in directions)

        step = self.s["codazzi_step"]
        res = np.array([worst_at(j, step) for j in jets])
        i = int(np.argmax(res))
        ok, r1, r2, factor = _converged(lambda d: worst_at(jets[i], d), step, self.tol["codazzi"])
        rel = np.array([r.relation_residual for r in self.rows])
        ric = np.array([r.ricci_residual for r in self.rows])
        ah = np.array([r.ah_residual for r in self.rows])
        ok = ok and rel.max() < self.tol["relation"] and ric.max() < self.tol["ricci"]
        if self.vanishing:
            ok = ok and ah.max() < self.tol["AH"]
        return _result(ok, float(res.max()), list(self.points[i]), codazzi_half_step=r2,
                       convergence_factor=factor, relation_max=float(rel.max()), ricci_max=float(ric.max()),
                       AH_max=float(ah.max()), AH_claimed=self.vanishing)

    def frames(self):
        step = self.s["fd_step"]
        inner = [p for p in self.points if self.spec.contains(*p, margin=step)]
        inv, alt = {}, 0.0
        for x, y in inner:
            jet = eval_jet(self.spec, x, y, order=2)
            fd = fr.frenet_data(jet)
            for k, v in fd.invariants().items():
                inv[k] = max(inv.get(k, 0.0), v)
            alt = max(alt, abs(fd.hopf_alternative - ex.hopf_coefficient(jet)))
        frenet = _pde_block(self.spec, inner, fr.frenet_pde_residuals, step, self.tol["frenet_pde"])
        ok = (max(inv.values(), default=0.0) < self.tol["frenet_invariants"] and alt < self.tol["hopf_alternative"]
              and frenet["pass"])
        out = {"frenet": {"invariants": inv, "hopf_alternative": alt, **frenet}}
        if self.vanishing:
            adapted, nucomp = self._adapted(inner, step)
            out["adapted"] = adapted
            out["nucomp"] = nucomp
            ok = ok and adapted["pass"] and nucomp["pass"]
        worst = max(frenet["max_residual"], out.get("adapted", {}).get("max_residual", 0.0))
        return {"pass": bool(ok), "max_residual": worst, "worst": frenet["worst"], "metrics": out}

    def _adapted(self, inner, step):
        ids, fm, skipped, valid = {}, 0.0, 0, []
        disjuncts = {"i": 0, "ii": 0, "iii": 0, "none": 0}
        min_sin = 0.0
        for x, y in inner:
            try:
                frame = fr.adapted_frame(eval_jet(self.spec, x, y, order=2))
            except GeometryError:
                skipped += 1
                continue
            valid.append((x, y))
            fm = max(fm, frame.f_matrix_residual())
            for k, v in frame.identities().items():
                ids[k] = max(ids.get(k, 0.0), v)
            nc = frame.nucomp(self.tol["nucomp"])
            for k in nc["holds"] or ["none"]:
                disjuncts[k] += 1
            min_sin = max(min_sin, min(nc["residuals"]["i"], nc["residuals"]["ii"]))
        pde = _pde_block(self.spec, valid, fr.adapted_pde_residuals, step, self.tol["adapted_pde"])
        ok = (bool(valid) and fm < self.tol["fmatrix"] and ids.get("matrixAH", 0) < self.tol["matrixAH"]
              and ids.get("hXiXixij", 0) < self.tol["hXiXixij"] and pde["pass"])
        adapted = {"fmatrix": fm, "identities": ids, "pseudo_umbilical_skipped": skipped, **pde}
        adapted["pass"] = bool(ok)
        nucomp = {"counts": disjuncts, "max_min_sin": min_sin, "samples": len(valid),
                  "pass": bool(valid) and min_sin < self.tol["nucomp"]}
        return adapted, nucomp

    def run(self):
        return {c: getattr(self, c)() for c in CHECKS if c in self.job.checks}


def _pde_block(spec, points, fn, step, tol):
    """Worst residual per equation over ``points`` plus a step-halving check at the worst sample."""
    if not points:
        return {"residuals": {}, "max_residual": 0.0, "worst": None, "pass": True}
    per, where = {}, {}
    for p in points:
        for k, v in fn(spec, *p, step).items():
            if v >= per.get(k, -1.0):
                per[k], where[k] = v, p
    key = max(per, key=per.get)
    ok, r1, r2, factor = _converged(lambda s: fn(spec, *where[key], s)[key], step, tol)
    ok = ok and max(per.values()) < tol
    return {"residuals": per, "max_residual": per[key], "worst": list(where[key]), "worst_equation": key,
            "half_step_residual": r2, "convergence_factor": factor, "pass": bool(ok)}


def sign_pattern(C1, C2, tol=1e-8):
    C1, C2 = np.asarray(C1), np.asarray(C2)
    if np.all(np.abs(C1) < tol) and np.all(np.abs(C2) < tol):
        return "C=0"
    if np.all(np.abs(C1 - C2) < 1e-6):
        return "C1=C2"
    if np.all(np.abs(C1 + C2) < 1e-6):
        return "C1=-C2"
    return "mixed"


def run_surface(job, settings):
    entry = {"name": job.name, "spec": job.spec.to_dict(), "checks": {}}
    if not job.checks:
        entry["status"] = "skipped"
        return entry, []
    try:
        runner = _Runner(job, settings)
        entry["checks"] = runner.run()
    except (*_ERRORS, TypeError) as e:
        log.warning("surface %s failed: %s", job.name, e)
        entry["status"] = "error"
        entry["error"] = f"{type(e).__name__}: {e}"
        return entry, []
    entry["status"] = "ok"
    entry["samples"] = len(runner.rows)
    entry["vanishing_theta"] = runner.vanishing
    frames = entry["checks"].get("frames")
    if frames:
        m = frames["metrics"]
        entry["frenet_pde"] = m["frenet"]["residuals"]
        if "adapted" in m:
            entry["adapted_pde"] = m["adapted"]["residuals"]
            entry["nucomp_disjunct"] = m["nucomp"]["counts"]
    return entry, runner.rows


def run_suite(config):
    """Run every surface job; returns (report dict, {name: sample rows})."""
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        results = list(pool.map(lambda j: run_surface(j, config.settings), config.surfaces))
    surfaces = [r[0] for r in results]
    n_checks = sum(len(s["checks"]) for s in surfaces)
    failed = sum(not c["pass"] for s in surfaces for c in s["checks"].values())
    errors = sum(s["status"] == "error" for s in surfaces)
    report = {
        "schema_version": SCHEMA_VERSION,
        "provenance": {"package_version": __version__, "settings": config.settings,
                       "tolerances": DEFAULT_TOLERANCES, "threads": thread_count()},
        "surfaces": surfaces,
        "summary": {"surfaces": len(surfaces), "checks": n_checks, "passed": n_checks - failed,
                    "failed": failed, "errors": errors, "all_pass": failed == 0 and errors == 0},
    }
    return report, {s["name"]: r[1] for s, r in zip(surfaces, results)}


def write_rows(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ex.CSV_COLUMNS)
        for r in rows:
            w.writerow([_fmt(v) for v in r.row()])


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    return repr(float(v))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def dump_report(report, path):
    with open(path, "w") as fh:
        json.dump(_jsonable(report), fh, indent=2, sort_keys=False)
        fh.write("\n")


# -- parameter scans ----------------------------------------------------------

_SAFE_FUNCS = {name: getattr(math, name) for name in ("sqrt", "sin", "cos", "tan", "exp", "log", "sinh", "cosh")}
_SAFE_FUNCS["pi"] = math.pi
_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv,
        ast.Pow: operator.pow, ast.USub: operator.neg, ast.UAdd: operator.pos}


def _eval_expr(text, env):
    """Arithmetic on numbers, earlier parameters and a few math functions."""
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id in env:
                return env[node.id]
            if node.id in _SAFE_FUNCS and not callable(_SAFE_FUNCS[node.id]):
                return _SAFE_FUNCS[node.id]
            raise ConfigError(f"unknown name {node.id!r} in {text!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _SAFE_FUNCS
                and callable(_SAFE_FUNCS[node.func.id]) and len(node.args) == 1 and not node.keywords):
            return _SAFE_FUNCS[node.func.id](ev(node.args[0]))
        raise ConfigError(f"unsupported expression {text!r}")
    try:
        return ev(ast.parse(text.replace("^", "**"), mode="eval"))
    except SyntaxError as e:
        raise ConfigError(f"cannot parse {text!r}") from e


def parse_params(text):
    """Parse ``name=value`` items separated by ';' or ','.

    A value is a number, a range ``start:stop:step`` (stop included), a list
    ``v1|v2|v3`` or an expression of earlier names (``sqrt(1+k_alpha^2)``).
    Returns a list of (name, kind, payload) in order.
    """
    items = []
    for part in text.replace(";", ",").split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ConfigError(f"expected name=value, got {part!r}")
        name, value = (s.strip() for s in part.split("=", 1))
        if ":" in value:
            try:
                a, b, s = (float(_eval_expr(v, {})) for v in value.split(":"))
            except ValueError as e:
                raise ConfigError(f"bad range {value!r}") from e
            if s <= 0:
                raise ConfigError(f"range step must be positive in {value!r}")
            n = int(math.floor((b - a) / s + 1e-9)) + 1
            items.append((name, "values", [a + i * s for i in range(n)]))
        elif "|" in value:
            items.append((name, "values", [_eval_expr(v, {}) for v in value.split("|")]))
        else:
            items.append((name, "expr", value))
    return items


def expand_params(items):
    """Cartesian product over value lists; expressions are evaluated per point."""
    lists = [(n, p) for n, k, p in items if k == "values"]
    names = [n for n, _ in lists]
    for combo in itertools.product(*(p for _, p in lists)) if lists else [()]:
        env = dict(zip(names, combo))
        point = {}
        for n, k, p in items:
            point[n] = env[n] if k == "values" else _eval_expr(p, {**env, **point})
            env[n] = point[n]
        yield point


SCAN_COLUMNS = ("Hnorm2", "theta_re", "theta_im", "theta_abs", "max_pmc_residual", "C_sign_pattern", "status")


def scan_grid(family, params, out=None, nx=3, ny=3, settings=None):
    """Evaluate a family over a parameter grid; one row per parameter point."""
    settings = {**DEFAULT_SETTINGS, **(settings or {})}
    items = parse_params(params) if isinstance(params, str) else params
    names = [n for n, _, _ in items]
    if family not in FAMILIES:
        raise ConfigError(f"unknown family {family!r}")
    check_params(family, dict.fromkeys(names))
    rows = []
    for point in expand_params(items):
        kw = dict(point)
        if settings.get("ode_step") and family in _STEP_PARAMS:
            kw.setdefault("step", settings["ode_step"])
        for k in ("slope_sign",):
            if k in kw:
                kw[k] = int(kw[k])
        row = {n: point[n] for n in names}
        try:
            spec = SurfaceSpec(family, kw)
            pts = sample_grid(spec, nx, ny, 0.2)
            reps = [ex.analyze(spec, x, y, settings["pmc_fd_step"]) for x, y in pts]
            centre = reps[len(reps) // 2]
            row.update(Hnorm2=centre.Hnorm2, theta_re=centre.theta_re, theta_im=centre.theta_im,
                       theta_abs=abs(centre.theta), max_pmc_residual=max(r.pmc_residual for r in reps),
                       C_sign_pattern=sign_pattern([r.C1 for r in reps], [r.C2 for r in reps]), status="ok")
        except (*_ERRORS, TypeError) as e:
            log.warning("skipping %s %s: %s", family, point, e)
            row.update({c: "" for c in SCAN_COLUMNS})
            row["status"] = f"skipped: {e}"
        rows.append(row)
    if out is not None:
        with open(out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=names + list(SCAN_COLUMNS))
            w.writeheader()
            for r in rows:
                w.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in r.items()})
    return rows


# -- mesh export ---------------------------------------------------------------

def stereographic(p):
    """Sphere factor to the plane, projecting from the south pole."""
    return p[:2] / (1 + p[2])


def poincare(p):
    """Hyperboloid factor to the Poincare disk."""
    return p[3:5] / (1 + p[5])


def mesh_samples(spec, nx, ny, margin=0.0):
    """Grid vertices: 6-vectors plus per-vertex scalars (row-major, x fastest)."""
    verts = []
    for x, y in sample_grid(spec, nx, ny, margin):
        jet = eval_jet(spec, x, y, order=2)
        H, n2 = ex.mean_curvature(jet)
        theta = ex.hopf_coefficient(jet, H) if ex.is_conformal(jet) else complex("nan")
        C1, C2 = ex.kahler_functions(jet)
        verts.append({"x": x, "y": y, "p": jet.Phi, "Hnorm2": n2, "abs_theta": abs(theta), "C1": C1, "C2": C2,
                      "membership": membership_residual(jet.Phi)})
    return verts


def _faces(nx, ny):
    for j in range(ny - 1):
        for i in range(nx - 1):
            a = j * nx + i + 1
            yield a, a + 1, a + nx + 1
            yield a, a + nx + 1, a + nx


def export_mesh(spec, nx, ny, fmt, out_dir, name="surface", margin=0.0):
    """Write ``obj_charts`` (two OBJ files) or ``csv6d`` (one CSV); returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    verts = mesh_samples(spec, nx, ny, margin)
    if fmt == "csv6d":
        path = out_dir / f"{name}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "p1", "p2", "p3", "p4", "p5", "p6", "Hnorm2", "abs_theta", "C1", "C2",
                        "membership_residual"])
            for v in verts:
                w.writerow([repr(float(t)) for t in (v["x"], v["y"], *v["p"], v["Hnorm2"], v["abs_theta"],
                                                     v["C1"], v["C2"], v["membership"])])
        return [path]
    if fmt != "obj_charts":
        raise ConfigError(f"unknown mesh format {fmt!r}")
    paths = []
    for label, chart in (("sphere", stereographic), ("hyperboloid", poincare)):
        path = out_dir / f"{name}_{label}.obj"
        with open(path, "w") as fh:
            fh.write(f"# {name}: {label} factor, {nx}x{ny} grid\n")
            fh.write("# attribute columns: index Hnorm2 abs_theta C1 C2\n")
            for k, v in enumerate(verts, start=1):
                u, w = (float(t) for t in chart(v["p"]))
                attrs = " ".join(repr(float(v[key])) for key in ("Hnorm2", "abs_theta", "C1", "C2"))
                fh.write(f"v {u!r} {w!r} 0.0\n")
                fh.write(f"# attr {k} {attrs}\n")
            for f in _faces(nx, ny):
                fh.write("f {} {} {}\n".format(*f))
        paths.append(path)
    return paths
