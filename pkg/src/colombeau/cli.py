"""Config-driven experiment runner.

Config grammar (INI, read with configparser; keys are case-sensitive)::

    [experiment]
    kind = sweep            ; mollifier | sweep | classify | diffeo-check | fixtures | ode | wave
    name = my-run           ; optional, defaults to the config file stem
    output_dir = results    ; optional, overridden by --out

    [parameters]
    q = 2
    K = -1, 1

Unknown sections or keys are rejected.  Every kind has complete defaults
(see PARAMETERS).  Exit codes: 0 all checks pass, 1 a check failed, 2 the
config could not be parsed or validated.
"""

import argparse
import configparser
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import Delta, Regular, embed, embed_smooth
from .asymptotics import classify, default_battery, run_sweep, verdict_record
from .diffeo import affine, cubic, identity, moment_degradation_check
from .errors import IterationError
from .numerics import Box, integrate, smooth_step
from .svg import loglog_svg
from .sweep import EpsLadder
from .testobjects import (constant_family, dual_basis, eps_modulated_family, export_csv, graded_lex,
                          linear_combination, make_mollifier, moment, x_modulated_family)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


def _floats(text):
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _ints(text):
    return tuple(int(v) for v in text.replace(";", ",").split(",") if v.strip())


_LADDER = {"eps0": (float, 0.5), "factor": (float, 0.5), "count": (int, 10)}
_REP = {"representative": (str, "iota-minus-sigma"), "distribution": (str, "sin")}

PARAMETERS = {
    "mollifier": {"q": (int, 2), "r": (float, 1.0), "s": (int, 1), "n": (int, 0)},
    "sweep": {**_REP, "family": (str, "const"), "q": (int, 2), "r": (float, 8.0), "center": (float, 3.2),
              "K": (_floats, (-1.0, 1.0)), "alpha": (int, 0), **_LADDER,
              "min_slope": (float, math.nan), "max_slope": (float, math.nan)},
    "classify": {**_REP, "mode": (str, "moderate"), "n": (int, 0), "q": (int, 2), "r": (float, 1.0),
                 "K": (_floats, (-0.5, 0.5)), "alpha": (_ints, (0,)), **_LADDER, "count": (int, 8),
                 "expect": (str, "")},
    "diffeo-check": {"diffeo": (str, "cubic"), "c": (float, 0.2), "a": (float, 2.0), "b": (float, 0.3),
                     "q": (int, 4), "K": (_floats, (-0.5, 0.5)), "order": (int, -1), **_LADDER},
    "fixtures": {},
    "ode": {"f": (str, "sin"), "c": (float, 1.0), "x0": (float, 0.3), "xdot0": (float, 0.0),
            "eps": (float, 2.0**-6), "q": (int, 0), "t_end": (float, 1.0), "tol": (float, 1e-9)},
    "wave": {"F": (str, "zero"), "lip": (float, 0.5), "t_end": (float, 0.8), "eta": (float, 0.1),
             "nx": (int, 9), "nt": (int, 8), "source_radius": (float, 0.6), "max_iter": (int, 30),
             "tol": (float, 1e-9)},
}

DISTRIBUTIONS = {
    "sin": lambda: (Regular(np.sin, "sin"), np.sin),
    "abs": lambda: (Regular(np.abs, "abs"), None),
    "id": lambda: (Regular(lambda x: x, "id"), lambda x: x),
    "delta": lambda: (Delta(0.0), None),
}

BATTERIES = ("default", "constant", "negligible")


# ---------------------------------------------------------------------------
# config parsing


def _line_of(text, key):
    for i, line in enumerate(text.splitlines(), 1):
        if line.split("=")[0].strip() == key:
            return i
    return 0


def load_config(path):
    """Parse and validate; returns (kind, name, output_dir, params)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    extra = set(cp.sections()) - {"experiment", "parameters"}
    if extra:
        raise ConfigError(f"{path}: unknown section(s) {sorted(extra)}")
    if not cp.has_section("experiment") or "kind" not in cp["experiment"]:
        raise ConfigError(f"{path}: missing [experiment] kind")
    exp = dict(cp["experiment"])
    unknown = set(exp) - {"kind", "name", "output_dir"}
    if unknown:
        raise ConfigError(f"{path}:{_line_of(text, sorted(unknown)[0])}: unknown key(s) {sorted(unknown)} in [experiment]")
    kind = exp["kind"]
    if kind not in PARAMETERS:
        raise ConfigError(f"{path}:{_line_of(text, 'kind')}: unknown kind {kind!r}; choose from {sorted(PARAMETERS)}")
    schema = PARAMETERS[kind]
    params = {k: default for k, (_, default) in schema.items()}
    raw = dict(cp["parameters"]) if cp.has_section("parameters") else {}
    for key, value in raw.items():
        if key not in schema:
            raise ConfigError(f"{path}:{_line_of(text, key)}: unknown key {key!r} for kind {kind}")
        try:
            params[key] = schema[key][0](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{_line_of(text, key)}: bad value for {key!r}: {exc}") from exc
    return kind, exp.get("name", path.stem), exp.get("output_dir"), params


# ---------------------------------------------------------------------------
# experiments


def _ladder(p):
    return EpsLadder(p["eps0"], p["factor"], p["count"])


def _box(values):
    if len(values) != 2:
        raise ConfigError("K must be 'lo, hi' in one dimension")
    return Box(values[0], values[1])


def _representative(p):
    if p["distribution"] not in DISTRIBUTIONS:
        raise ConfigError(f"unknown distribution {p['distribution']!r}; choose from {sorted(DISTRIBUTIONS)}")
    u, smooth = DISTRIBUTIONS[p["distribution"]]()
    if p["representative"] == "iota":
        return embed(u)
    if p["representative"] == "iota-minus-sigma":
        if smooth is None:
            raise ConfigError(f"iota-minus-sigma needs a smooth distribution, not {p['distribution']!r}")
        return embed(u) - embed_smooth(smooth)
    raise ConfigError(f"unknown representative {p['representative']!r}; choose iota or iota-minus-sigma")


def _battery(name, q, r, mode):
    if name == "constant":
        return [constant_family(make_mollifier(q, r), q)]
    if name == "negligible":
        return default_battery(q, r, mode="negligible")
    return default_battery(q, r, mode=mode)


def _record(check, value, passed, **extra):
    return {"check": check, "value": value, "passed": bool(passed), **extra}


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else repr(v)


def exp_mollifier(p, out, battery):
    phi = make_mollifier(p["q"], p["r"], p["s"], p["n"] or None)
    (out / "mollifier.csv").write_text(export_csv(phi))
    worst = max((abs(moment(phi, a)) for a in graded_lex(p["q"], p["s"])), default=0.0)
    mass = abs(integrate(phi) - 1.0)
    return [_record("max_moment", _num(worst), worst <= 1e-8), _record("mass_error", _num(mass), mass <= 1e-10)]


def exp_sweep(p, out, battery):
    rep = _representative(p)
    q, r = p["q"], p["r"]
    phi = make_mollifier(q, r, 1, None, p["center"] if p["center"] else None)
    if p["family"] == "const":
        fam = constant_family(phi, q)
    elif p["family"] == "xmod":
        fam = x_modulated_family(phi, linear_combination([(1.0, make_mollifier(q, 0.5 * r, 1, phi.n)),
                                                          (-1.0, phi)]), declared_q=q)
    elif p["family"] == "epsmod":
        fam = eps_modulated_family(phi, dual_basis(max(q, 1), r, 1, phi.n).functions[0], max(q, 1))
    else:
        raise ConfigError(f"unknown family {p['family']!r}; choose const, xmod or epsmod")
    res = run_sweep(rep, fam, _box(p["K"]), (p["alpha"],), _ladder(p))
    (out / "sweep.csv").write_text(res.to_csv())
    (out / "sweep.svg").write_text(loglog_svg(res.eps, res.g, res.label, res.slope))
    ok = True
    if not math.isnan(p["min_slope"]):
        ok &= res.slope >= p["min_slope"]
    if not math.isnan(p["max_slope"]):
        ok &= res.slope <= p["max_slope"]
    return [_record("slope", _num(res.slope), ok, rows=len(res.eps), residual=_num(res.residual))]


def exp_classify(p, out, battery):
    rep = _representative(p)
    mode = p["mode"]
    fams = _battery(battery, p["q"], p["r"], mode)
    v = classify(rep, fams, [_box(p["K"])], [(a,) for a in p["alpha"]], mode,
                 p["n"] if mode != "moderate" else None, p["q"] if mode != "moderate" else None, _ladder(p))
    sweeps = [d for d in v.details if hasattr(d, "to_csv")]
    for i, res in enumerate(sweeps):
        (out / f"sweep_{i}.csv").write_text(res.to_csv())
        (out / f"sweep_{i}.svg").write_text(loglog_svg(res.eps, res.g, res.label, res.slope))
    ok = not p["expect"] or v.tag == p["expect"]
    return [_record("verdict", verdict_record(v), ok)]


def exp_diffeo(p, out, battery):
    name = p["diffeo"]
    mu = {"cubic": lambda: cubic(p["c"]), "affine": lambda: affine(p["a"], p["b"]),
          "identity": lambda: identity(1)}.get(name)
    if mu is None:
        raise ConfigError(f"unknown diffeo {name!r}; choose cubic, affine or identity")
    order = None if p["order"] < 0 else p["order"]
    rep = moment_degradation_check(mu(), p["q"], _box(p["K"]), _ladder(p), order=order)
    recs = []
    for i, ((a, b), res) in enumerate(sorted(rep.results.items())):
        (out / f"moment_{i}.csv").write_text(res.to_csv())
        (out / f"moment_{i}.svg").write_text(loglog_svg(res.eps, res.g, res.label, res.slope))
        recs.append(_record(f"moment{a}_dx{b}", _num(res.slope), res.slope >= rep.q - rep.slope_tol))
    return recs


def exp_fixtures(p, out, battery):
    from .fixtures import run_all
    reports = run_all()
    (out / "fixtures.csv").write_text("".join(r.to_csv() if i == 0 else r.to_csv().split("\n", 1)[1]
                                              for i, r in enumerate(reports)))
    return [_record(r.name, _num(r.max_rel_err), r.passed) for r in reports]


def exp_ode(p, out, battery):
    from .apps.ode import solve_delta_ode
    fs = {"zero": lambda x: 0.0 * x, "const": lambda x: p["c"] + 0.0 * x, "sin": np.sin}
    if p["f"] not in fs:
        raise ConfigError(f"unknown f {p['f']!r}; choose zero, const or sin")
    tr = solve_delta_ode(fs[p["f"]], p["x0"], p["xdot0"], make_mollifier(p["q"]), p["eps"], p["t_end"])
    (out / "trajectory.csv").write_text(tr.to_csv())
    jump = tr.velocity_jump
    if p["f"] == "const":
        return [_record("velocity_jump", _num(jump), abs(jump - p["c"]) <= p["tol"])]
    expected = 0.0 if p["f"] == "zero" else None
    ok = np.isfinite(jump) and (expected is None or abs(jump) <= p["tol"])
    return [_record("velocity_jump", _num(jump), ok)]


def _demo_source(radius):
    def H(y, s):
        r2 = np.sum(np.asarray(y) ** 2, axis=-1) / radius**2
        inside = r2 < 1
        g = np.where(inside, np.exp(-1.0 / np.where(inside, 1.0 - r2, 1.0)), 0.0)
        return 5.0 * g * smooth_step((np.asarray(s) + 0.1) / 0.5)
    return H


def exp_wave(p, out, battery):
    from .apps.wave import solve_wave_kirchhoff
    Fs = {"zero": lambda u: 0.0 * u, "lipsin": lambda u: p["lip"] * np.sin(u)}
    if p["F"] not in Fs:
        raise ConfigError(f"unknown F {p['F']!r}; choose zero or lipsin")
    R0 = p["source_radius"]
    space = Box.cube(R0 + p["t_end"] + p["eta"], 3)
    try:
        wf = solve_wave_kirchhoff(Fs[p["F"]], _demo_source(R0), space, p["t_end"], p["eta"], p["nx"], p["nt"],
                                  p["max_iter"], p["tol"], source_radius=R0)
    except IterationError as exc:
        return [_record("converged", [_num(r) for r in exc.residuals], False)]
    (out / "wave.csv").write_text(wf.to_csv())
    res = wf.iteration_residuals
    monotone = all(b < a for a, b in zip(res, res[1:]))
    return [_record("converged", [_num(r) for r in res], monotone)]


EXPERIMENTS = {"mollifier": exp_mollifier, "sweep": exp_sweep, "classify": exp_classify,
               "diffeo-check": exp_diffeo, "fixtures": exp_fixtures, "ode": exp_ode, "wave": exp_wave}


def _write_summary(out, name, kind, records):
    passed = all(r["passed"] for r in records)
    summary = {"name": name, "kind": kind, "passed": passed, "records": records, "version": __version__}
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return passed


def execute(kind, name, params, out_root, battery="default"):
    out = Path(out_root) / name
    out.mkdir(parents=True, exist_ok=True)
    records = EXPERIMENTS[kind](params, out, battery)
    passed = _write_summary(out, name, kind, records)
    for r in records:
        print(f"{'PASS' if r['passed'] else 'FAIL'} {name} {r['check']} {r['value']}")
    return EXIT_OK if passed else EXIT_FAIL


def run(config_path, out=None, battery="default"):
    try:
        kind, name, out_cfg, params = load_config(config_path)
        return execute(kind, name, params, out or out_cfg or "results", battery)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def report(results_dir):
    """Aggregate summary.json files below results_dir into report.json."""
    root = Path(results_dir)
    if not root.is_dir():
        print(f"report: {root} is not a directory", file=sys.stderr)
        return EXIT_FAIL
    rows, missing = [], []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        f = sub / "summary.json"
        if not f.is_file():
            missing.append(sub.name)
            continue
        try:
            data = json.loads(f.read_text())
            rows.append({"name": data["name"], "kind": data["kind"], "passed": bool(data["passed"])})
        except (ValueError, KeyError):
            missing.append(sub.name)
    failing = [r["name"] for r in rows if not r["passed"]]
    ok = bool(rows) and not failing and not missing
    summary = {"experiments": rows, "failing": failing, "missing": missing, "passed": ok}
    (root / "report.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    for r in rows:
        print(f"{'PASS' if r['passed'] else 'FAIL'} {r['name']} ({r['kind']})")
    for m in missing:
        print(f"MISSING {m}")
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None):
    ap = argparse.ArgumentParser(prog="colombeau", description=__doc__.split("\n")[0])
    ap.add_argument("--out", default=None, help="output directory (overrides output_dir in the config)")
    ap.add_argument("--seed-battery", choices=BATTERIES, default="default",
                    help="test-object battery preset for classify experiments")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config")
    p_rep = sub.add_parser("report", help="aggregate summaries in a results directory")
    p_rep.add_argument("dir")
    sub.add_parser("fixtures", help="run the fixture suite")
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command == "run":
        return run(args.config, args.out, args.seed_battery)
    if args.command == "report":
        return report(args.dir)
    return execute("fixtures", "fixtures", {}, args.out or "results", args.seed_battery)


if __name__ == "__main__":
    sys.exit(main())
