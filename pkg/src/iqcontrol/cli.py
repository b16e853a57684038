"""Config-driven experiment runner (the ``iqctl`` command).

Subcommands:
    iqctl run <config>     execute a simulate/solve/reach/thermal config
    iqctl sweep <config>   map closed-form entries over parameter grids
    iqctl check <config>   validate a config without executing it

Configs are UTF-8 JSON with a top-level "mode" discriminator; complex
numbers are [re, im] pairs and matrices nested row-major lists of pairs.
Results are CSV (time series, grids) or JSON (solve/reach/thermal), both
fully deterministic: 17 significant digits, "\n" line endings, sorted
JSON keys.  Exit codes: 0 success, 1 error, 2 infeasible-but-completed.
"""

from __future__ import annotations

import argparse
import json
import sys
from itertools import product
from pathlib import Path

import numpy as np

from . import opkit, qubit, thermal, verify
from .errors import IQControlError
from .nlevel import ReachabilityProblem, solve_probe_spectrum

MODES = ("simulate", "solve", "reach", "thermal", "sweep")
SWEEP_PARAMS = ("theta", "alpha", "p_p")


class ConfigError(IQControlError):
    """Config file is malformed or fails validation."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _expect(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def _get(cfg: dict, key: str, typ, where: str):
    _expect(key in cfg, f"{where}: missing key '{key}'")
    val = cfg[key]
    if typ is float:
        _expect(isinstance(val, (int, float)) and not isinstance(val, bool),
                f"{where}: '{key}' must be a number")
        return float(val)
    if typ is int:
        _expect(isinstance(val, int) and not isinstance(val, bool),
                f"{where}: '{key}' must be an integer")
        return val
    _expect(isinstance(val, typ), f"{where}: '{key}' has the wrong type")
    return val


def _parse_complex(val, where: str) -> complex:
    if isinstance(val, (int, float)) and not isinstance(val, bool):
        return complex(val)
    _expect(isinstance(val, list) and len(val) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool)
                    for x in val),
            f"{where}: expected a number or an [re, im] pair")
    return complex(val[0], val[1])


def _parse_matrix(val, where: str) -> np.ndarray:
    _expect(isinstance(val, list) and val, f"{where}: expected a matrix")
    rows = []
    for i, row in enumerate(val):
        _expect(isinstance(row, list), f"{where}: row {i} is not a list")
        rows.append([_parse_complex(x, f"{where}[{i}][{j}]")
                     for j, x in enumerate(row)])
    widths = {len(r) for r in rows}
    _expect(len(widths) == 1, f"{where}: ragged rows")
    return np.array(rows, dtype=complex)


def _parse_density_matrix(val, where: str) -> np.ndarray:
    m = _parse_matrix(val, where)
    try:
        return opkit.validate_density_matrix(m, herm_tol=1e-10)
    except IQControlError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_couplings(cfg: dict, where: str) -> qubit.QubitCouplings:
    _expect(isinstance(cfg, dict), f"{where}: expected an object")
    try:
        return qubit.QubitCouplings(
            g1=_get(cfg, "g1", float, where),
            g2=_parse_complex(cfg.get("g2", 0.0), f"{where}.g2"),
            g3=_get(cfg, "g3", float, where),
            g4=_get(cfg, "g4", float, where))
    except IQControlError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _parse_times(val, where: str) -> np.ndarray:
    if isinstance(val, list):
        _expect(all(isinstance(x, (int, float)) and not isinstance(x, bool)
                    for x in val), f"{where}: times must be numbers")
        return np.array(val, dtype=float)
    _expect(isinstance(val, dict), f"{where}: expected a list or a range object")
    count = _get(val, "count", int, where)
    _expect(count >= 0, f"{where}: count must be >= 0")
    return np.linspace(_get(val, "start", float, where),
                       _get(val, "stop", float, where), count)


def _parse_unit(cfg: dict, key: str, where: str) -> float:
    v = _get(cfg, key, float, where)
    _expect(0.0 <= v <= 1.0, f"{where}: '{key}' must lie in [0, 1]")
    return v


def _parse_axis(ax, where: str):
    _expect(isinstance(ax, dict), f"{where}: expected an object")
    name = _get(ax, "name", str, where)
    _expect(name in SWEEP_PARAMS,
            f"{where}: axis name '{name}' not one of {SWEEP_PARAMS}")
    count = _get(ax, "count", int, where)
    _expect(count >= 0, f"{where}: count must be >= 0")
    values = np.linspace(_get(ax, "start", float, where),
                         _get(ax, "stop", float, where), count)
    return name, values


def load_config(path: Path) -> dict:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    _expect(isinstance(cfg, dict), "config root must be an object")
    mode = _get(cfg, "mode", str, "config")
    _expect(mode in MODES, f"config: mode '{mode}' not one of {MODES}")
    return cfg


def validate_config(cfg: dict):
    """Full semantic validation; returns the parsed payload per mode."""
    mode = cfg["mode"]
    if mode == "simulate":
        payload = {
            "couplings": _parse_couplings(_get(cfg, "couplings", dict, "config"),
                                          "config.couplings"),
            "p_s": _parse_unit(cfg, "p_s", "config"),
            "p_p": _parse_unit(cfg, "p_p", "config"),
            "times": _parse_times(_get(cfg, "times", (list, dict), "config"),
                                  "config.times"),
        }
        if "target" in cfg:
            payload["target"] = _parse_density_matrix(cfg["target"],
                                                      "config.target")
            _expect(payload["target"].shape == (2, 2),
                    "config.target: must be 2x2")
        return payload
    if mode == "solve":
        target = _parse_density_matrix(_get(cfg, "target", list, "config"),
                                       "config.target")
        _expect(target.shape == (2, 2), "config.target: must be 2x2")
        budget_cfg = cfg.get("budget", {})
        _expect(isinstance(budget_cfg, dict), "config.budget: expected object")
        budget = qubit.SolverBudget(
            tol=float(budget_cfg.get("tol", 1e-8)),
            max_evals=int(budget_cfg.get("max_evals", 100_000)),
            grid=int(budget_cfg.get("grid", 64)))
        return {"p_s": _parse_unit(cfg, "p_s", "config"),
                "target": target, "budget": budget}
    if mode == "reach":
        c_raw = _get(cfg, "coefficients", list, "config")
        n = len(c_raw)
        c = np.empty((n, n, n), dtype=complex)
        for a, block in enumerate(c_raw):
            _expect(isinstance(block, list) and len(block) == n,
                    f"config.coefficients[{a}]: expected {n} rows")
            for j, row in enumerate(block):
                _expect(isinstance(row, list) and len(row) == n,
                        f"config.coefficients[{a}][{j}]: expected {n} entries")
                for m, x in enumerate(row):
                    c[a, j, m] = _parse_complex(
                        x, f"config.coefficients[{a}][{j}][{m}]")
        try:
            prob = ReachabilityProblem(
                initial_weights=np.asarray(
                    _get(cfg, "initial_weights", list, "config"), dtype=float),
                target_weights=np.asarray(
                    _get(cfg, "target_weights", list, "config"), dtype=float),
                coefficients=c)
        except IQControlError as exc:
            raise ConfigError(f"config: {exc}") from exc
        return {"problem": prob, "tol": float(cfg.get("tol", 1e-8))}
    if mode == "thermal":
        temperature = _get(cfg, "temperature", float, "config")
        _expect(temperature > 0.0, "config: temperature must be > 0")
        if "p_p" in cfg:
            return {"temperature": temperature,
                    "p_p": _get(cfg, "p_p", float, "config")}
        return {"temperature": temperature,
                "e0": _get(cfg, "e0", float, "config"),
                "e1": _get(cfg, "e1", float, "config")}
    # sweep
    axes_raw = _get(cfg, "axes", list, "config")
    axes = [_parse_axis(ax, f"config.axes[{i}]") for i, ax in enumerate(axes_raw)]
    names = [n for n, _ in axes]
    _expect(len(set(names)) == len(names), "config.axes: duplicate axis names")
    fixed = cfg.get("fixed", {})
    _expect(isinstance(fixed, dict), "config.fixed: expected object")
    params = {}
    for p in SWEEP_PARAMS:
        if p in names:
            continue
        _expect(p in fixed, f"config.fixed: missing value for '{p}'")
        params[p] = _get(fixed, p, float, "config.fixed")
    if "p_p" in params:
        _expect(0.0 <= params["p_p"] <= 1.0, "config.fixed: p_p outside [0, 1]")
    return {"p_s": _parse_unit(cfg, "p_s", "config"),
            "beta": float(cfg.get("beta", 0.0)),
            "axes": axes, "fixed": params}


def _json_result(path: Path, doc: dict):
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def _run_simulate(payload, out_path: Path) -> int:
    g = payload["couplings"]
    p_s, p_p = payload["p_s"], payload["p_p"]
    target = payload.get("target")
    if target is None:
        target = np.diag([1.0 - p_s, p_s]).astype(complex)
    theta = qubit.probe_mixing_angle(g)
    lines = ["t,rho00,rho11,re_rho10,im_rho10,e_plus,e_minus,"
             "trace_distance_to_target"]
    for t in payload["times"]:
        ang = qubit.overlap_angles(g, float(t))
        rho00, rho11, rho10 = qubit.reduced_state_closed_form(
            p_s, theta, p_p, ang)
        spec = qubit.spectral_form(rho00, rho11, np.conj(rho10))
        rho = qubit.closed_form_reduced_state(g, float(t), p_s, p_p)
        opkit.validate_density_matrix(rho, herm_tol=1e-10)
        dist = opkit.trace_distance(rho, target)
        lines.append(",".join(_fmt(x) for x in (
            t, rho00, rho11, rho10.real, rho10.imag,
            spec.e_plus, spec.e_minus, dist)))
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8",
                        newline="\n")
    return 0


def _run_solve(payload, out_path: Path) -> int:
    sol = qubit.solve_controls_numeric(payload["p_s"], payload["target"],
                                       payload["budget"])
    oracle = verify.check_solution(sol, payload["p_s"], payload["target"])
    doc = {
        "couplings": {"g1": sol.couplings.g1,
                      "g2": [sol.couplings.g2.real, sol.couplings.g2.imag],
                      "g3": sol.couplings.g3, "g4": sol.couplings.g4},
        "theta": sol.theta, "alpha": sol.alpha, "p_p": sol.p_p, "t": sol.t,
        "residual": sol.residual, "oracle_distance": oracle,
        "feasible": sol.feasible,
    }
    _json_result(out_path, doc)
    return 0 if sol.feasible else 2


def _run_reach(payload, out_path: Path) -> int:
    w, residual = solve_probe_spectrum(payload["problem"])
    reachable = residual <= payload["tol"]
    _json_result(out_path, {"probe_diagonal": list(w),
                            "residual": residual,
                            "reachable": bool(reachable)})
    return 0 if reachable else 2


def _run_thermal(payload, out_path: Path) -> int:
    if "p_p" in payload:
        gap = thermal.required_gap(payload["p_p"], payload["temperature"])
        _json_result(out_path, {"gap": gap,
                                "temperature": payload["temperature"],
                                "p_p": payload["p_p"]})
        return 0
    spec = thermal.ThermalSpec(e0=payload["e0"], e1=payload["e1"],
                               temperature=payload["temperature"])
    _json_result(out_path, {"p_p": thermal.thermal_occupancy(spec),
                            "gap": spec.e1 - spec.e0,
                            "temperature": spec.temperature})
    return 0


def _run_sweep(payload, out_path: Path) -> int:
    axes = payload["axes"]
    names = [n for n, _ in axes]
    header = names + ["rho00", "abs_rho10"]
    lines = [",".join(header)]
    p_s, beta = payload["p_s"], payload["beta"]
    grids = [vals for _, vals in axes]
    for combo in product(*grids):
        params = dict(payload["fixed"])
        params.update(zip(names, combo))
        ang = qubit.OverlapAngles(alpha=params["alpha"], beta=beta)
        rho00, _, rho10 = qubit.reduced_state_closed_form(
            p_s, params["theta"], params["p_p"], ang)
        lines.append(",".join(_fmt(x) for x in
                              list(combo) + [rho00, abs(rho10)]))
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8",
                        newline="\n")
    return 0


def _execute(cfg: dict, config_path: Path, out_dir: Path, quiet: bool) -> int:
    payload = validate_config(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    mode = cfg["mode"]
    suffix = ".csv" if mode in ("simulate", "sweep") else ".json"
    out_path = out_dir / (config_path.stem + suffix)
    runner = {"simulate": _run_simulate, "solve": _run_solve,
              "reach": _run_reach, "thermal": _run_thermal,
              "sweep": _run_sweep}[mode]
    code = runner(payload, out_path)
    if not quiet:
        print(f"{mode}: wrote {out_path}")
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="iqctl",
        description="Indirect quantum control experiment runner")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("run", "execute a config"),
                            ("sweep", "run a parameter sweep config"),
                            ("check", "validate a config without executing")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", type=Path)
        p.add_argument("--out", type=Path, default=Path("out"),
                       help="output directory (default ./out)")
        p.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.command == "check":
            validate_config(cfg)
            if not args.quiet:
                print(f"{args.config}: valid ({cfg['mode']})")
            return 0
        if args.command == "sweep" and cfg["mode"] != "sweep":
            raise ConfigError(
                f"'iqctl sweep' requires mode 'sweep', got '{cfg['mode']}'")
        return _execute(cfg, args.config, args.out, args.quiet)
    except IQControlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
