"""
Command-line driver.

    ldg hedgehog        radial profiles over a (t, L2) grid
    ldg audit-director  extra-equation and compatibility audit of a director family
    ldg minimize        energy descent on a spherical shell
    ldg identities      randomised identity suite
    ldg --paper-suite   the full acceptance battery

Every command writes ``summary.json`` (field ``"schema": 1``) into the
output directory, plus CSV files under ``profiles/``.  Summaries hold no
timings or timestamps, so two runs with the same configuration and seed
produce identical bytes; wall times go to ``timings.json``.  The exit
status is 0 exactly when every declared check passes, 1 when a check or
solver fails, and 2 when the configuration is rejected.
"""
import argparse
import json
import math
import os
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import directors as D
from . import hedgehog as H
from . import jets as J
from . import model
from . import residuals as RS
from . import suite
from . import tensor as qt
from .fit import fit_order_parameter
from .flow import DescentFailure, minimize_gradient_flow, radial_shell_setup, shell_oracle
from .grids import (AngleField, CartesianGrid, angle_jets, grid_from_descriptor, read_field_csv,
                    write_field_csv, write_manifest)

SCHEMA = 1
COMMANDS = ("hedgehog", "audit-director", "minimize", "identities")
FAMILIES = ("radial", "escape", "constant", "helical", "angles-file")
ADMISSIBLE_TOL = 1e-6
COMPATIBLE_TOL = 1e-2

_DEFAULT_T = {"hedgehog": 1.0, "audit-director": 0.0, "minimize": 0.0, "identities": 0.5}


class ConfigError(ValueError):
    """Raised when a configuration fails validation."""


@dataclass
class ExperimentConfig:
    """Everything one invocation needs; validated before any computation."""
    command: str
    t: list
    L2: list
    R: float = 20.0
    N: int = 400
    grid: tuple = (48, 24, 48)
    r_inner: float = 0.5
    r_outer: float = 10.0
    family: str = "radial"
    angles_file: str = ""
    boundary: str = "radial"
    tol: float = 1e-5
    max_steps: int = 3000
    seed: int = 0
    out: str = "ldg-out"
    dump_fields: bool = False
    fit_s: bool = False
    flip_extra_sign: bool = False

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not self.t or not self.L2:
            raise ConfigError("t and L2 need at least one value each")
        for L2 in self.L2:
            if model.elastic_factor(L2) <= 0:
                raise ConfigError(f"L2 = {L2:g} gives 1 + 2 L2/3 <= 0")
        for t in self.t:
            if not math.isfinite(t) or t > 9 / 8:
                raise ConfigError(f"t = {t:g} has no nematic minimiser (need t <= 9/8)")
        if self.command == "hedgehog" and (self.R < 10 or self.N < 200):
            raise ConfigError("hedgehog needs R >= 10 and N >= 200")
        if self.command == "minimize":
            if len(self.grid) != 3 or min(self.grid) < 6:
                raise ConfigError("minimize grid needs three sizes of at least 6")
            if self.grid[2] % 2:
                raise ConfigError("n_theta must be even")
            if not 0 < self.r_inner < self.r_outer:
                raise ConfigError("need 0 < r_inner < r_outer")
            if self.boundary not in ("radial", "constant"):
                raise ConfigError(f"unknown boundary family {self.boundary!r}")
            if self.tol <= 0 or self.max_steps < 0:
                raise ConfigError("tol must be positive and max_steps non-negative")
        if self.command == "audit-director":
            if self.family not in FAMILIES:
                raise ConfigError(f"unknown family {self.family!r}; choose from {FAMILIES}")
            if self.family == "angles-file" and not self.angles_file:
                raise ConfigError("family angles-file needs --angles-file")
        out = Path(self.out)
        try:
            (out / "profiles").mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory {out}: {exc}") from None
        if not os.access(out, os.W_OK):
            raise ConfigError(f"output directory {out} is not writable")
        return self


# --------------------------------------------------------------------------- parsing

def _floats(text):
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, list):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _grid(text):
    if isinstance(text, (list, tuple)):
        vals = [int(v) for v in text]
    else:
        vals = [int(v) for v in str(text).lower().split("x")]
    if len(vals) == 1:
        n = vals[0]
        vals = [n, max(n // 2, 1), n]
    return tuple(vals)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file of key = value settings")
    common.add_argument("--t", help="reduced temperature; comma-separated list for hedgehog")
    common.add_argument("--L2", help="elastic anisotropy; comma-separated list for hedgehog")
    common.add_argument("--grid", help="N or n_r x n_phi x n_theta for minimize")
    common.add_argument("--R", type=float, help="outer radius of the hedgehog ODE")
    common.add_argument("--N", type=int, help="hedgehog node count")
    common.add_argument("--seed", type=int, help="seed for randomised checks")
    common.add_argument("--out", help="output directory (default ldg-out)")
    common.add_argument("--dump-fields", action="store_true", default=None,
                        help="also write full nodal fields")
    common.add_argument("--paper-suite", action="store_true",
                        help="run the acceptance battery with pinned seeds")

    p = argparse.ArgumentParser(prog="ldg", parents=[common],
                                description="Uniaxial Landau-de Gennes experiments.")
    sub = p.add_subparsers(dest="command")
    sub.add_parser("hedgehog", parents=[common], help="radial hedgehog profiles")
    a = sub.add_parser("audit-director", parents=[common], help="audit a director family")
    a.add_argument("family", nargs="?", help=f"one of {', '.join(FAMILIES)}")
    a.add_argument("--angles-file", help="manifest JSON pointing at a CSV with columns f, g")
    a.add_argument("--fit-s", action="store_true", default=None,
                   help="also fit an order parameter for the director")
    a.add_argument("--flip-extra-sign", action="store_true", default=None,
                   help="debug: use the opposite sign in the extra equation")
    m = sub.add_parser("minimize", parents=[common], help="energy descent on a shell")
    m.add_argument("--boundary", choices=("radial", "constant"))
    m.add_argument("--tol", type=float)
    m.add_argument("--max-steps", type=int)
    m.add_argument("--r-inner", type=float)
    m.add_argument("--r-outer", type=float)
    i = sub.add_parser("identities", parents=[common], help="randomised identity suite")
    i.add_argument("--flip-extra-sign", action="store_true", default=None,
                   help="debug: use the opposite sign in the extra equation")
    return p


def load_config(args):
    """Merge defaults, the TOML file and command-line flags (flags win)."""
    settings = {}
    if args.config:
        with open(args.config, "rb") as fh:
            settings = tomllib.load(fh)
    command = args.command or settings.get("command")
    flags = {k: v for k, v in vars(args).items() if v is not None}
    merged = {**settings, **flags}
    if command is None:
        raise ConfigError("no command given")
    t = _floats(merged.get("t", _DEFAULT_T.get(command, 0.0)))
    cfg = ExperimentConfig(command=command, t=t, L2=_floats(merged.get("L2", 0.0)))
    for key in ("R", "r_inner", "r_outer", "tol"):
        if key in merged:
            setattr(cfg, key, float(merged[key]))
    for key in ("N", "max_steps", "seed"):
        if key in merged:
            setattr(cfg, key, int(merged[key]))
    for key in ("family", "angles_file", "boundary", "out"):
        if key in merged:
            setattr(cfg, key, str(merged[key]))
    for key in ("dump_fields", "fit_s", "flip_extra_sign"):
        if key in merged:
            setattr(cfg, key, bool(merged[key]))
    if "grid" in merged:
        cfg.grid = _grid(merged["grid"])
    return cfg.validate()


# --------------------------------------------------------------------------- output

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def write_json(path, data):
    with open(path, "w", newline="\n") as fh:
        json.dump(_clean(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, columns):
    data = np.column_stack(columns)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, data, delimiter=",", fmt="%.17g")


def _tag(t, L2):
    return f"t{t:g}_L2{L2:g}".replace("-", "m")


# --------------------------------------------------------------------------- commands

def cmd_hedgehog(cfg, out):
    runs, checks = [], {}
    for t in cfg.t:
        for L2 in cfg.L2:
            tag = _tag(t, L2)
            p = H.solve_hedgehog(t, L2, cfg.R, cfg.N)
            H.write_profile_csv(out / "profiles" / f"hedgehog_{tag}.csv", p)
            H.write_convergence_log(out / "profiles" / f"hedgehog_{tag}_newton.jsonl", p.history)
            order = H.refinement_order(t, L2, cfg.R, cfg.N)
            rec = {
                "t": t, "L2": L2, "R": cfg.R, "N": cfg.N,
                "converged": p.converged, "newton_iterations": p.iterations,
                "residual": p.residual, "s_R": float(p.s[-1]), "s_plus": model.s_plus(t),
                "origin_exponent": H.near_origin_exponent(p),
                "quadratic_coefficient": H.quadratic_coefficient(p),
                "order": order["order"], "el_residual_coarse": order["coarse"],
                "el_residual_fine": order["fine"],
            }
            if L2 != 0:
                rec["scaling_max_diff"] = H.scaling_defect(t, L2, cfg.R, cfg.N)
                checks[f"{tag}/scaling"] = rec["scaling_max_diff"] < 1e-5
            checks[f"{tag}/converged"] = p.converged
            checks[f"{tag}/boundary"] = abs(rec["s_R"] - rec["s_plus"]) < 1e-9
            checks[f"{tag}/order"] = 1.8 <= rec["order"] <= 2.2
            runs.append(rec)
    return {"runs": runs}, checks


def _sample_points(family, rng, n=2000):
    if family == "escape":
        return suite._shell_points(rng, n, 0.05, 1.0, min_rho=1e-3, max_rho=1.0)
    return suite._shell_points(rng, n, 0.1, 3.0)


def _load_angles_file(path):
    path = Path(path)
    try:
        with open(path) as fh:
            manifest = json.load(fh)
        grid = grid_from_descriptor(manifest["grid"])
        fields = manifest["fields"]
        csv = path.parent / (fields["angles"] if isinstance(fields, dict) else fields[0])
        cols = read_field_csv(csv)
        f, g = cols["f"], cols["g"]
        pts = np.column_stack([cols["x"], cols["y"], cols["z"]])
    except (OSError, KeyError, ValueError, TypeError, IndexError) as exc:
        raise ConfigError(f"malformed angles file {path}: {exc}") from None
    if pts.shape != grid.points.shape or not np.allclose(pts, grid.points, atol=1e-9):
        raise ConfigError(f"malformed angles file {path}: node coordinates do not match the grid")
    angles = AngleField(f.reshape(grid.shape), g.reshape(grid.shape),
                        winding=int(manifest.get("winding", 0)))
    return grid, angles


def _fit_for_family(cfg, family, angles_data):
    t = cfg.t[0]
    sp_ = model.s_plus(t)
    if family == "radial":
        res, err = suite.radial_fit(t)
        extra = {"profile_rel_err": err}
    elif family == "escape":
        res, extra = suite.escape_fit(t), {}
    elif family == "angles-file":
        grid, angles = angles_data
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = fit_order_parameter(angles, t, grid, boundary=np.full(grid.shape, sp_))
        extra = {}
    else:
        grid = CartesianGrid([-1, -1, -1], [1, 1, 1], (14, 14, 14), order=4)
        f, g = D.ANGLE_FAMILIES[family](grid.points)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = fit_order_parameter(J.director_from_angles(f, g), t, grid,
                                      boundary=np.full(grid.shape, sp_))
        extra = {}
    floor = res.nontrivial_floor(sp_)
    verdict = "compatible" if res.residual < COMPATIBLE_TOL else "incompatible"
    return {"verdict": verdict, "normalized_residual": res.residual,
            "nontrivial_floor": floor, "iterations": res.iterations, **extra}


_EXPECTED = {
    "radial": ("admissible", "compatible"),
    "escape": ("admissible", "incompatible"),
    "constant": ("admissible", "compatible"),
    "helical": ("inadmissible", "incompatible"),
}


def cmd_audit_director(cfg, out):
    family = cfg.family
    rng = np.random.default_rng(cfg.seed)
    angles_data = None
    if family == "angles-file":
        grid, angles = angles_data = _load_angles_file(cfg.angles_file)
        f, g = angle_jets(grid, angles)
        mask = grid.interior.reshape(-1)
        f = J.ScalarJet(f.value[mask], f.grad[mask], f.hess[mask])
        g = J.ScalarJet(g.value[mask], g.grad[mask], g.hess[mask])
        path = "finite-difference"
    else:
        pts = _sample_points(family, rng)
        f, g = D.ANGLE_FAMILIES[family](pts)
        path = "analytic"
    n = J.director_from_angles(f, g)
    extra = RS.extra_equation_residual(n, flip_sign=cfg.flip_extra_sign)
    extra_max = float(np.max(np.linalg.norm(extra, axis=(-2, -1))))
    ones = J.ScalarJet.constant(1.0, f.value.shape)
    sfg = RS.sfg_residual(ones, f, g, cfg.t[0])
    classification = "admissible" if extra_max < ADMISSIBLE_TOL else "inadmissible"
    summary = {
        "family": family, "path": path, "points": int(f.value.size),
        "extra_eq_residual": extra_max, "classification": classification,
        "flip_extra_sign": cfg.flip_extra_sign,
        "constraint_residuals": {"grad_f_dot_grad_g": float(np.max(np.abs(sfg[:, 3]))),
                                 "grad_f2_minus_grad_g2_sin2f": float(np.max(np.abs(sfg[:, 4])))},
    }
    checks = {}
    expected = _EXPECTED.get(family)
    if expected is not None:
        checks["classification"] = classification == expected[0]
    if cfg.fit_s:
        summary["fit_s"] = _fit_for_family(cfg, family, angles_data)
        if expected is not None:
            checks["fit_s"] = summary["fit_s"]["verdict"] == expected[1]
    return summary, checks


def _ray_csvs(out, grid, q):
    s, n = qt.decompose_field(q.reshape(-1, 5))
    b = qt.biaxiality_measure(q.reshape(-1, 5))
    rays = {}
    for j in sorted({grid.n_phi // 6, grid.n_phi // 2, grid.n_phi - 1 - grid.n_phi // 6}):
        idx = grid.ray_index(j, 0)
        name = f"ray_phi{j}.csv"
        _write_csv(out / "profiles" / name, ["r", "s", "n_x", "n_y", "n_z", "beta_tilde"],
                   [grid.r, s[idx], n[idx, 0], n[idx, 1], n[idx, 2], b[idx]])
        rays[name] = float(grid.phi[j])
    return rays


def _director_extra_residual(grid, q):
    """Interior extra-equation residual of the decomposed director, polar caps excluded."""
    _, n = qt.decompose_field(q.reshape(-1, 5))
    n = n * np.sign(np.einsum("ni,ni->n", n, grid.points))[:, None]
    res = RS.extra_equation_residual(grid.vector_jet(n.reshape(grid.shape + (3,))))
    mask = (grid.interior & (np.abs(np.cos(grid.PHI)) <= np.cos(np.pi / 6))).reshape(-1)
    return float(np.max(np.linalg.norm(res[mask], axis=(-2, -1))))


def cmd_minimize(cfg, out):
    t = cfg.t[0]
    L2 = cfg.L2[0]
    grid, q0 = radial_shell_setup(t, cfg.grid, cfg.r_inner, cfg.r_outer)
    if cfg.boundary == "constant":
        q0 = np.broadcast_to(qt.uniaxial_compose(model.s_plus(t), qt.E_Z), q0.shape).copy()
    summary = {"grid": grid.descriptor(), "boundary": cfg.boundary, "t": t, "L2": L2,
               "tol": cfg.tol}
    summary["grid"].pop("r_nodes")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            state = minimize_gradient_flow(q0, grid, t, L2, tol=cfg.tol, max_steps=cfg.max_steps)
    except DescentFailure as exc:
        summary["error"] = str(exc)
        return summary, {"descent": False}
    _write_csv(out / "profiles" / "energy.csv", ["step", "energy", "residual"],
               [np.arange(len(state.energies)), state.energies, state.residuals])
    b = qt.biaxiality_measure(state.q.reshape(-1, 5))
    summary.update({
        "iterations": state.iterations, "converged": state.converged, "stalled": state.stalled,
        "residual": state.residual, "energy_initial": state.energies[0],
        "energy_final": state.energy, "monotone": state.monotone,
        "max_beta_tilde": state.max_biaxiality, "mean_beta_tilde": float(np.mean(b)),
        "rays": _ray_csvs(out, grid, state.q),
    })
    checks = {"converged": state.converged, "monotone": state.monotone}
    if state.stalled:
        summary["hint"] = ("descent stalled at the grid's residual floor, set by the polar rows; "
                           "refine the grid or raise --tol")
    if cfg.boundary == "radial" and L2 == 0:
        s, _ = qt.decompose_field(state.q.reshape(-1, 5))
        ref = shell_oracle(t, cfg.r_inner, cfg.r_outer)(grid.R).reshape(-1)
        err = float(np.max(np.abs(s - ref)) / np.max(np.abs(ref)))
        summary["profile_rel_err"] = err
        summary["extra_eq_residual"] = _director_extra_residual(grid, state.q)
        checks["profile"] = err < 1e-3
        checks["uniaxial"] = state.max_biaxiality < 1e-6
        checks["extra_equation"] = summary["extra_eq_residual"] < 5e-3
    if cfg.dump_fields:
        (out / "fields").mkdir(exist_ok=True)
        write_field_csv(out / "fields" / "q.csv", grid, {"q": state.q})
        write_manifest(out / "fields" / "manifest.json", grid, {"q": "q.csv"})
    return summary, checks


def identity_suite(seed, flip_extra_sign=False, n_points=500):
    """Randomised identities with measured norms; returns (results, checks)."""
    rng = np.random.default_rng(seed)
    t = 0.5
    pts = rng.uniform(-1, 1, (n_points, 3))
    s_fn, f_fn, g_fn = suite._random_uniaxial_family(rng)
    s, f, g = s_fn.jet(pts), f_fn.jet(pts), g_fn.jet(pts)
    n, m, p = J.frame_jets_from_angles(f, g)
    res, tol = {}, {}

    md = RS.m_decomposition(s, n, t)
    res["m_orthogonality"], tol["m_orthogonality"] = md.max_cross_cosine(), 1e-12
    q = J.qjet_from_uniaxial(s, n)
    res["m_sum_vs_el"] = float(np.max(np.abs(md.total - qt.to_matrix(RS.el_residual_isotropic(q, t)))))
    tol["m_sum_vs_el"] = 1e-10

    closed = RS.anisotropic_st_term(s, n)
    res["anisotropic_closed_vs_direct"] = float(np.max(np.abs(closed.total - RS.anisotropic_st_direct(s, n))))
    tol["anisotropic_closed_vs_direct"] = 1e-10
    res["J_dot_n"] = float(np.max(np.abs(np.einsum("ni,ni->n", closed.J, n.value))))
    tol["J_dot_n"] = 1e-10

    comps = [J.TrigField.random(rng, 3, 0.6, 1.3).jet(pts) for _ in range(5)]
    qr = J.QJet(np.stack([c.value for c in comps], -1), np.stack([c.grad for c in comps], -2),
                np.stack([c.hess for c in comps], -3))
    res["basis_vs_tensor_el"] = float(np.max(np.abs(RS.el_residual_basis(qr, t)
                                                      - RS.el_residual_isotropic(qr, t))))
    tol["basis_vs_tensor_el"] = 1e-12

    worst, h = 0.0, 1e-5
    for qv in rng.normal(size=(50, 5)):
        grad = model.bulk_gradient(qv, t)
        fd = np.array([(model.bulk_energy_density(qv + h * e, t)
                        - model.bulk_energy_density(qv - h * e, t)) / (2 * h) for e in np.eye(5)])
        worst = max(worst, float(np.linalg.norm(fd - grad) / np.linalg.norm(grad)))
    res["bulk_gradient_fd"], tol["bulk_gradient_fd"] = worst, 1e-7

    T = qt.to_matrix(rng.normal(size=(n_points, 5)))
    pc = RS.project_v123(T, n.value, m.value, p.value)
    res["projection_reassembly"] = float(np.max(np.abs(pc.reassemble() - T)))
    tol["projection_reassembly"] = 1e-13

    beta = J.TrigField.random(rng, 3, 0.5, 1.2).jet(pts)
    res["beta_squared_identity"] = float(np.max(np.abs(
        RS.beta_squared_identity_defect(s, beta, (n, m, p), t))))
    tol["beta_squared_identity"] = 1e-8

    for fam in ("radial", "escape"):
        key = f"extra_equation_{fam}"
        res[key] = suite.extra_equation_audit(fam, _sample_points(fam, rng, n_points),
                                              flip_sign=flip_extra_sign)
        tol[key] = 1e-8

    checks = {k: bool(res[k] < tol[k]) for k in res}
    return {"measured": res, "tolerance": tol}, checks


def cmd_identities(cfg, out):
    results, checks = identity_suite(cfg.seed, cfg.flip_extra_sign)
    results["seed"] = cfg.seed
    results["flip_extra_sign"] = cfg.flip_extra_sign
    return results, checks


def run_acceptance_suite(out, echo=print):
    results = suite.run_all(echo=echo)
    summary = {"schema": SCHEMA, "command": "acceptance-suite", "seed": suite.SEED,
               "criteria": [{"number": r.number, "name": r.name, "passed": r.passed,
                             "failures": r.failures, "metrics": r.metrics} for r in results]}
    summary["status"] = "ok" if all(r.passed for r in results) else "failed"
    write_json(out / "summary.json", summary)
    write_json(out / "timings.json", {str(r.number): {"seconds": r.seconds,
                                                      "limit": r.limit_seconds}
                                      for r in results})
    return 0 if summary["status"] == "ok" else 1


_HANDLERS = {"hedgehog": cmd_hedgehog, "audit-director": cmd_audit_director,
             "minimize": cmd_minimize, "identities": cmd_identities}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.paper_suite:
        out = Path(args.out or "ldg-out")
        out.mkdir(parents=True, exist_ok=True)
        return run_acceptance_suite(out)
    try:
        cfg = load_config(args)
    except (ConfigError, OSError, tomllib.TOMLDecodeError, ValueError) as exc:
        print(f"ldg: invalid configuration: {exc}", file=sys.stderr)
        out = Path(getattr(args, "out", None) or "ldg-out")
        try:
            out.mkdir(parents=True, exist_ok=True)
            write_json(out / "summary.json", {"schema": SCHEMA, "status": "invalid",
                                              "error": str(exc)})
        except OSError:
            pass
        return 2
    out = Path(cfg.out)
    t0 = time.perf_counter()
    try:
        results, checks = _HANDLERS[cfg.command](cfg, out)
        status = "ok" if all(checks.values()) else "failed"
    except ConfigError as exc:
        print(f"ldg: {exc}", file=sys.stderr)
        write_json(out / "summary.json", {"schema": SCHEMA, "command": cfg.command,
                                          "status": "invalid", "error": str(exc)})
        return 2
    config = asdict(cfg)
    config.pop("out")
    summary = {"schema": SCHEMA, "command": cfg.command, "config": config, "status": status,
               "checks": checks, "results": results}
    write_json(out / "summary.json", summary)
    write_json(out / "timings.json", {"seconds": time.perf_counter() - t0})
    if status != "ok":
        failing = sorted(k for k, v in checks.items() if not v)
        print(f"ldg {cfg.command}: failed checks {failing} (seed {cfg.seed})", file=sys.stderr)
        return 1
    print(f"ldg {cfg.command}: all {len(checks)} checks passed; summary in {out / 'summary.json'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
