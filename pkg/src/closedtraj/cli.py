"""Command-line front end.

Every command takes a JSON config (``--config``) whose fields can be
overridden by flags, prints a JSON report on stdout and exits with 0 on
success, 1 on a usage, config or runtime error, and 2 when the analysis
ran but the property in question does not hold.

    closedtraj check-pseudo --a 5 --eps 4
    closedtraj trace --a 5 --eps 4 --out run1 --dat
    closedtraj simulate --a 5 --eps 4 --x0 0.1,-0.2,0.3 --t-end 20 --out run2
    closedtraj averaged --a 1 --b 1 --term 1,0,0,1
    closedtraj predict --a 1 --b 1 --term 1,0,0,4 --term 3,0,0,-5.333333333333333
    closedtraj verify pseudo --a 5 --eps 4
    closedtraj verify cycles --a 1 --b 1 --eps 0.01 --term 1,0,0,4 --term 3,0,0,-5.333333333333333
    closedtraj verify moments
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import closed_form as cf
from . import verify as vf
from .averaging import (
    MultiPoly,
    averaged_function,
    averaged_quadrature,
    cycle_bound,
    predict_limit_cycles,
    simple_positive_roots,
)
from .errors import ClosedTrajError, ConfigInvalid, ExistenceViolated, IdenticallyZero
from .integrator.piecewise import integrate_piecewise
from .integrator.shooting import flow_theta, periodic_orbit_states
from .integrator.trajectory import IntegrationConfig
from .model import Params

EXIT_OK, EXIT_ERROR, EXIT_FAILS = 0, 1, 2
CHECK_RADII = (0.25, 0.5, 1.0, 1.5, 2.0)
TRAJ_COLUMNS = ["t", "x", "y", "z", "arc"]
EVENT_COLUMNS = ["t", "x", "y", "z", "arc", "label"]


@dataclass
class RunConfig:
    a: float | None = None
    eps: float | None = None
    b: float | None = None
    poly_terms: list = field(default_factory=list)
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    event_tol: float = 1e-11
    max_step: float | None = None
    n_samples: int = 500
    norm_samples: int = 1000
    r_max: float = 10.0
    x0: list | None = None
    t_end: float = 20.0
    out_dir: str = "."
    dat: bool = False
    eps_list: list | None = None
    r_guess: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["poly_terms"] = [list(t) for t in self.poly_terms]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigInvalid("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigInvalid(f"unknown config fields: {sorted(extra)}")
        cfg = cls(**data)
        cfg.normalise()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc

    def normalise(self) -> None:
        def num(name, value, integer=False):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigInvalid(f"{name} must be a number, got {value!r}")
            if not math.isfinite(value):
                raise ConfigInvalid(f"{name} must be finite")
            if integer:
                if int(value) != value:
                    raise ConfigInvalid(f"{name} must be an integer")
                return int(value)
            return float(value)

        for name in ("a", "eps", "b", "max_step", "r_guess"):
            v = getattr(self, name)
            if v is not None:
                setattr(self, name, num(name, v))
        for name in ("rel_tol", "abs_tol", "event_tol", "r_max", "t_end"):
            setattr(self, name, num(name, getattr(self, name)))
        for name in ("n_samples", "norm_samples"):
            setattr(self, name, num(name, getattr(self, name), integer=True))
        for name in ("rel_tol", "abs_tol", "event_tol", "r_max"):
            if getattr(self, name) <= 0:
                raise ConfigInvalid(f"{name} must be positive")
        if self.max_step is not None and self.max_step <= 0:
            raise ConfigInvalid("max_step must be positive")
        if self.n_samples < 2 or self.norm_samples < 10:
            raise ConfigInvalid("n_samples must be >= 2 and norm_samples >= 10")
        terms = []
        for t in self.poly_terms:
            if not isinstance(t, (list, tuple)) or len(t) != 4:
                raise ConfigInvalid(f"poly term must be [i, j, k, coeff], got {t!r}")
            i, j, k = (num("exponent", e, integer=True) for e in t[:3])
            if min(i, j, k) < 0:
                raise ConfigInvalid(f"exponents must be nonnegative, got {t!r}")
            terms.append([i, j, k, num("coefficient", t[3])])
        self.poly_terms = terms
        if self.x0 is not None:
            if not isinstance(self.x0, (list, tuple)) or len(self.x0) != 3:
                raise ConfigInvalid("x0 must have three components")
            self.x0 = [num("x0", v) for v in self.x0]
        if self.eps_list is not None:
            self.eps_list = [num("eps_list", v) for v in self.eps_list]
        if not isinstance(self.dat, bool):
            raise ConfigInvalid("dat must be true or false")
        self.out_dir = str(self.out_dir)

    def integration(self) -> IntegrationConfig:
        return IntegrationConfig(self.rel_tol, self.abs_tol, self.max_step, self.event_tol)

    def poly(self) -> MultiPoly:
        return MultiPoly.from_list(self.poly_terms)

    def part1(self) -> Params:
        if self.a is None or self.eps is None:
            raise ConfigInvalid("a and eps are required")
        if self.a == 0:
            raise ConfigInvalid("a must be nonzero")
        if any(t[:3] != [0, 0, 0] for t in self.poly_terms):
            raise ConfigInvalid("the piecewise system admits only a constant perturbation term")
        return Params(self.a, self.eps)

    def part2(self, need_eps: bool = False) -> Params:
        if self.a is None:
            raise ConfigInvalid("a is required")
        if self.a == 0:
            raise ConfigInvalid("a must be nonzero")
        if self.b is None or not self.b > 0:
            raise ConfigInvalid("b > 0 is required")
        if need_eps and (self.eps is None or self.eps <= 0):
            raise ConfigInvalid("eps > 0 is required")
        return Params(self.a, self.eps or 0.0, self.b)


def _fmt(v) -> str:
    return "%.17g" % v


def write_csv(path: Path, columns: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def write_dat(path: Path, blocks) -> None:
    """Gnuplot data: one whitespace-separated block per arc, blank-line separated."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# t x y z\n")
        for n, (name, traj) in enumerate(blocks):
            if n:
                fh.write("\n\n")
            fh.write(f"# {name}\n")
            for t, p in zip(traj.times, traj.states):
                fh.write(" ".join(_fmt(v) for v in (t, *p)) + "\n")


def _traj_rows(traj, tag=None):
    for i, (t, p) in enumerate(zip(traj.times, traj.states)):
        yield (float(t), *map(float, p), tag if tag is not None else str(traj.modes[i]))


def _event_rows(events, arc):
    for ev in events:
        yield (float(ev.t), *map(float, ev.p), arc, ev.label.value)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_check_pseudo(cfg: RunConfig):
    params = cfg.part1()
    a, eps = params.a, params.eps
    exists = cf.pseudo_orbit_exists(params)
    report = {"a": a, "eps": eps, "exists": exists,
              "band": [abs(a) / math.sqrt(2.0), abs(a)]}
    if 0 < abs(eps) < abs(a):
        P, Q = cf.tangency_points(params)
        report.update(P=P.tolist(), Q=Q.tolist())
        signs = cf.time_signs(params)
        report["signs"] = {"t_minus": signs.t_minus, "t_plus": signs.t_plus, "in_band": signs.in_band}
        if exists:
            t_minus, t_plus = cf.transit_times(params)
            report.update(t_minus=t_minus, t_plus=t_plus)
    return report, EXIT_OK if exists else EXIT_FAILS


def cmd_trace(cfg: RunConfig):
    if cfg.x0 is not None:
        return cmd_simulate(cfg)
    params = cfg.part1()
    try:
        orbit = cf.build_pseudo_orbit(params, cfg.n_samples)
    except ExistenceViolated as exc:
        return {"exists": False, "error": str(exc)}, EXIT_FAILS
    out = _out_dir(cfg)
    arcs = [("inner", orbit.arc_inside), ("outer", orbit.arc_outside)]
    rows = [row for tag, arc in arcs for row in _traj_rows(arc, tag)]
    write_csv(out / "pseudo_orbit.csv", TRAJ_COLUMNS, rows)
    write_csv(out / "events.csv", EVENT_COLUMNS,
              [row for tag, arc in arcs for row in _event_rows(arc.events, tag)])
    files = ["pseudo_orbit.csv", "events.csv"]
    if cfg.dat:
        write_dat(out / "pseudo_orbit.dat", arcs)
        files.append("pseudo_orbit.dat")
    P, Q = orbit.joints
    return {"exists": True, "rows": len(rows), "P": P.tolist(), "Q": Q.tolist(),
            "t_minus": float(orbit.arc_inside.t_final), "t_plus": float(orbit.arc_outside.t_final),
            "out_dir": str(out), "files": files}, EXIT_OK


def cmd_simulate(cfg: RunConfig):
    params = cfg.part1()
    if cfg.x0 is None:
        raise ConfigInvalid("x0 is required for a simulation")
    traj = integrate_piecewise(params, cfg.x0, (0.0, cfg.t_end), cfg.integration())
    out = _out_dir(cfg)
    write_csv(out / "trajectory.csv", TRAJ_COLUMNS, _traj_rows(traj))
    write_csv(out / "events.csv", EVENT_COLUMNS,
              [(float(ev.t), *map(float, ev.p), "", ev.label.value) for ev in traj.events])
    files = ["trajectory.csv", "events.csv"]
    if cfg.dat:
        write_dat(out / "trajectory.dat", [("trajectory", traj)])
        files.append("trajectory.dat")
    counts: dict[str, int] = {}
    for ev in traj.events:
        counts[ev.label.value] = counts.get(ev.label.value, 0) + 1
    return {"samples": len(traj), "events": len(traj.events), "labels": counts,
            "final": traj.final.tolist(), "out_dir": str(out), "files": files}, EXIT_OK


def cmd_averaged(cfg: RunConfig):
    params = cfg.part2()
    F = cfg.poly()
    fbar = averaged_function(params, F)
    n = F.degree
    report = {"degree": n, "bound": cycle_bound(n),
              "coeffs": {str(d): c for d, c in fbar.coeffs.items()},
              "exact": {str(d): str(c) for d, c in fbar.exact.items()}}
    if fbar.is_zero():
        report["error"] = "IdenticallyZero: averaged function vanishes identically"
        return report, EXIT_FAILS
    residuals = [abs(fbar(r) - averaged_quadrature(params, F, r)) for r in CHECK_RADII]
    report["cross_check"] = {"radii": list(CHECK_RADII), "residuals": residuals,
                             "max_residual": max(residuals)}
    return report, EXIT_OK


def cmd_predict(cfg: RunConfig):
    params = cfg.part2()
    try:
        pred = predict_limit_cycles(params, cfg.poly(), cfg.r_max)
    except IdenticallyZero as exc:
        return {"error": f"IdenticallyZero: {exc}"}, EXIT_FAILS
    return {"roots": [{"r0": r, "derivative": d} for r, d in pred.roots],
            "count": pred.count, "bound": pred.bound, "attained": pred.attained,
            "degree": pred.degree, "sharp_bound": pred.sharp_bound,
            "coeffs": {str(d): c for d, c in pred.fbar.coeffs.items()}}, EXIT_OK


def cmd_verify(cfg: RunConfig, what: str):
    if what == "pseudo":
        params = cfg.part1()
        try:
            rep = vf.verify_pseudo_orbit(params, cfg.integration(), cfg.norm_samples)
        except ExistenceViolated as exc:
            return {"summary": "fail", "error": str(exc)}, EXIT_FAILS
        return rep.to_dict(), EXIT_OK if rep.passed else EXIT_FAILS
    if what == "moments":
        rep = vf.verify_moments()
        return rep.to_dict(), EXIT_OK if rep.passed else EXIT_FAILS
    if what != "cycles":
        raise ConfigInvalid(f"unknown verification {what!r}")

    params = cfg.part2(need_eps=True)
    F = cfg.poly()
    icfg = cfg.integration()
    out = _out_dir(cfg)
    if cfg.r_guess is not None:
        fbar = averaged_function(params, F)
        roots = [r for r, _ in simple_positive_roots(fbar, cfg.r_max)]
        r0 = min(roots, key=lambda r: abs(r - cfg.r_guess)) if roots else cfg.r_guess
        reports = [vf.verify_limit_cycle(params, F, cfg.eps, r0, icfg, r_guess=cfg.r_guess)]
        n_distinct = int(reports[0].passed)
    else:
        reports, n_distinct = vf.confirm_cycles(params, F, cfg.eps, icfg, cfg.r_max)
    files = []
    for i, rep in enumerate(reports):
        if "r_found" not in rep.info:
            continue
        start = (rep.info["r_found"], rep.info["Z_found"])
        _, _, t = flow_theta(params, F, cfg.eps, start, icfg)
        traj = periodic_orbit_states(params, F, cfg.eps, start, t, icfg)
        name = f"orbit_{i}.csv"
        write_csv(out / name, TRAJ_COLUMNS, _traj_rows(traj, "cycle"))
        files.append(name)
    result = {"reports": [r.to_dict() for r in reports], "predicted": len(reports),
              "distinct_confirmed": n_distinct, "files": files}
    if cfg.eps_list:
        r0 = reports[0].info["r0"] if reports else None
        if r0 is None:
            raise ConfigInvalid("no simple root to run a convergence study on")
        table = vf.convergence_study(params, F, r0, cfg.eps_list, icfg)
        write_csv(out / "convergence.csv", ["eps", "r_found", "error", "period"], table.rows)
        files.append("convergence.csv")
        result["convergence"] = {"slope": table.slope, "c_conv": table.c_conv}
    ok = bool(reports) and all(r.passed for r in reports)
    result["summary"] = "pass" if ok else "fail"
    return result, EXIT_OK if ok else EXIT_FAILS


def _triple(text: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected x,y,z")
    return [float(p) for p in parts]


def _term(text: str) -> list:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected i,j,k,coeff")
    try:
        return [int(parts[0]), int(parts[1]), int(parts[2]), float(parts[3])]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _floats(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON config; flags override its fields")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--term", type=_term, action="append", dest="poly_terms",
                   metavar="I,J,K,COEFF", help="perturbation term coeff*x^i*y^j*z^k (repeatable)")
    p.add_argument("--rel-tol", type=float, dest="rel_tol")
    p.add_argument("--abs-tol", type=float, dest="abs_tol")
    p.add_argument("--event-tol", type=float, dest="event_tol")
    p.add_argument("--max-step", type=float, dest="max_step")
    p.add_argument("--samples", type=int, dest="n_samples", help="samples per pseudo-orbit arc")
    p.add_argument("--norm-samples", type=int, dest="norm_samples")
    p.add_argument("--r-max", type=float, dest="r_max")
    p.add_argument("--x0", type=_triple, help="initial state x,y,z for a piecewise run")
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--out", dest="out_dir", help="output directory")
    p.add_argument("--dat", action="store_const", const=True, help="also write gnuplot .dat files")
    p.add_argument("--eps-list", type=_floats, dest="eps_list", help="comma-separated eps values")
    p.add_argument("--r-guess", type=float, dest="r_guess")
    p.add_argument("--report", type=Path, help="also write the JSON report here")
    p.add_argument("--save-config", type=Path, help="write the effective config here")


class _Parser(argparse.ArgumentParser):
    # usage errors share exit code 1 with config errors; 2 means "does not hold"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="closedtraj", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in [
        ("check-pseudo", "existence of the crossing pseudo-orbit"),
        ("trace", "write the pseudo-orbit (or a piecewise run with --x0) as CSV"),
        ("simulate", "piecewise Filippov simulation from --x0"),
        ("averaged", "averaged function coefficients with a quadrature cross-check"),
        ("predict", "predicted limit cycles from the averaged function"),
    ]:
        _add_common(sub.add_parser(name, help=help_))
    pv = sub.add_parser("verify", help="numerical verification suites")
    pv.add_argument("what", choices=["pseudo", "cycles", "moments"])
    _add_common(pv)
    return parser


OVERRIDES = [f.name for f in fields(RunConfig)]


def load_config(args: argparse.Namespace) -> RunConfig:
    data = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except OSError as exc:
            raise ConfigInvalid(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigInvalid("config must be a JSON object")
    for name in OVERRIDES:
        v = getattr(args, name, None)
        if v is not None:
            data[name] = v
    return RunConfig.from_dict(data)


def _status(ok: bool, text: str) -> None:
    if not sys.stderr.isatty():
        return
    if os.environ.get("NO_COLOR"):
        print(text, file=sys.stderr)
    else:
        print(f"\033[{32 if ok else 31}m{text}\033[0m", file=sys.stderr)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    try:
        cfg = load_config(args)
        if args.save_config is not None:
            args.save_config.write_text(cfg.to_json() + "\n")
        if args.command == "verify":
            report, code = cmd_verify(cfg, args.what)
        else:
            handler = {
                "check-pseudo": cmd_check_pseudo,
                "trace": cmd_trace,
                "simulate": cmd_simulate,
                "averaged": cmd_averaged,
                "predict": cmd_predict,
            }[args.command]
            report, code = handler(cfg)
    except (ClosedTrajError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        _status(False, "error")
        return EXIT_ERROR
    text = json.dumps(report, indent=2)
    print(text)
    if args.report is not None:
        try:
            args.report.write_text(text + "\n")
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_ERROR
    _status(code == EXIT_OK, "ok" if code == EXIT_OK else "property does not hold")
    return code


if __name__ == "__main__":
    sys.exit(main())
