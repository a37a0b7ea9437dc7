"""Command-line interface.

Configuration is a flat ``section.key = value`` text file; command-line
flags override file values, which override defaults. Angles are read in
degrees unless ``settings.units = rad`` (or ``--radians``) is given and are
converted to radians before anything else sees them.

Exit codes: 0 success, 1 invalid input, 2 failed acceptance check
(``verify``), 3 internal error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .circle import DiscDistribution, circle_model_run
from .ensemble import KINDS, Exact, Grid, MonteCarlo, make_distribution, read_grid_weights, write_grid_weights
from .nonlocality import (
    ExperimentConfig,
    balanced_distribution_search,
    delta_sweep,
    entanglement_sweep,
    nonlocal_bits,
    outcome_statistics,
    shift_at_B,
    signal,
)
from .packets import CouplingProfile, PacketSpec
from .spin_state import MODES, PerturbationParams
from .trajectory import HiddenVariable, evolve_exact, evolve_numeric

SEED_ENV = "PILOTNONLOCAL_SEED"

EXIT_OK, EXIT_INVALID, EXIT_ACCEPTANCE, EXIT_INTERNAL = 0, 1, 2, 3

SUBCOMMANDS = ("trajectory", "outcomes", "correlation", "nonlocality", "signal", "sweep", "entanglement",
               "circle", "bits", "search-balanced", "verify")

DEFAULTS = {
    "settings.theta_A": "0",
    "settings.theta_B": "0",
    "settings.theta_A_prime": "",
    "settings.theta_B_prime": "",
    "settings.units": "deg",
    "couplings.a_A": "1",
    "couplings.a_B": "1",
    "packet.width": "1",
    "experiment.mode": "von-neumann",
    "state.epsilon": "0",
    "state.eps_pp": "0",
    "state.eps_mm": "0",
    "hidden.r_A0": "0",
    "hidden.r_B0": "0",
    "ensemble.kind": "equilibrium-uniform",
    "method.kind": "mc",
    "method.n": "1000000",
    "method.seed": "42",
    "method.m": "1000",
    "output.format": "",
    "output.path": "",
}

# free-form parameters of the ensemble families
ENSEMBLE_PARAMS = {"x0", "x1", "y0", "y1", "side", "sign_A", "sign_B", "c", "r_A", "r_B", "file"}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class RunConfig:
    theta_A: float = 0.0
    theta_B: float = 0.0
    theta_A_prime: float | None = None
    theta_B_prime: float | None = None
    units: str = "deg"
    a_A: float = 1.0
    a_B: float = 1.0
    width: float = 1.0
    mode: str = "von-neumann"
    epsilon: float = 0.0
    eps_pp: float = 0.0
    eps_mm: float = 0.0
    r_A0: float = 0.0
    r_B0: float = 0.0
    ensemble_kind: str = "equilibrium-uniform"
    ensemble_params: dict = field(default_factory=dict)
    method_kind: str = "mc"
    n: int = 10**6
    seed: int = 42
    m: int = 1000
    output_format: str = ""
    output_path: str = ""

    # -- derived objects --------------------------------------------------

    @property
    def couplings(self) -> CouplingProfile:
        return CouplingProfile(self.a_A, self.a_B)

    @property
    def packet(self) -> PacketSpec:
        return PacketSpec(self.width)

    @property
    def experiment(self) -> ExperimentConfig:
        state = "singlet"
        if self.epsilon or self.eps_pp or self.eps_mm:
            state = PerturbationParams.from_epsilon(self.epsilon, self.eps_pp, self.eps_mm)
        return ExperimentConfig(self.couplings, self.packet, self.mode, state)

    @property
    def method(self):
        if self.method_kind == "mc":
            return MonteCarlo(self.n, self.seed)
        if self.method_kind == "grid":
            return Grid(self.m)
        return Exact()

    def distribution(self):
        params = dict(self.ensemble_params)
        if self.ensemble_kind == "grid-weights":
            if "file" not in params:
                raise ConfigError("ensemble.file is required for grid-weights")
            return read_grid_weights(params["file"], self.packet)
        params.pop("file", None)
        return make_distribution(self.ensemble_kind, self.packet, **params)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["angles_rad"] = {k: d.pop(k) for k in ("theta_A", "theta_B", "theta_A_prime", "theta_B_prime")}
        return d


def parse_config_file(path) -> dict:
    """Read ``section.key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'section.key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def _check_key(key: str) -> None:
    if key in DEFAULTS:
        return
    section, _, name = key.partition(".")
    if section == "ensemble" and name in ENSEMBLE_PARAMS:
        return
    raise ConfigError(f"unknown configuration key {key!r}")


def _number(values, key, kind=float):
    raw = values[key].strip()
    v = None
    try:
        v = float(raw) if kind is float else int(raw)
    except ValueError:
        # accept integral floats such as 1e6 for counts
        try:
            f = float(raw)
            if kind is int and f.is_integer():
                v = int(f)
        except ValueError:
            pass
    if v is None or (kind is float and not math.isfinite(v)):
        raise ConfigError(f"{key} must be a finite {'number' if kind is float else 'integer'}, got {raw!r}")
    return v


def resolve(file_values: dict | None = None, overrides: dict | None = None, env=None) -> RunConfig:
    """Merge defaults, the seed environment variable, file values and flags."""
    env = os.environ if env is None else env
    values = dict(DEFAULTS)
    if env.get(SEED_ENV):
        values["method.seed"] = env[SEED_ENV]
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            _check_key(key)
            values[key] = str(value)

    units = values["settings.units"].lower()
    if units not in ("deg", "rad"):
        raise ConfigError(f"settings.units must be 'deg' or 'rad', got {units!r}")
    to_rad = math.radians if units == "deg" else float

    def angle(key, optional=False):
        if optional and values[key] == "":
            return None
        return to_rad(_number(values, key))

    mode = values["experiment.mode"]
    if mode not in MODES:
        raise ConfigError(f"experiment.mode must be one of {MODES}, got {mode!r}")
    kind = values["ensemble.kind"]
    if kind not in KINDS:
        raise ConfigError(f"ensemble.kind must be one of {KINDS}, got {kind!r}")
    method = values["method.kind"]
    if method not in ("mc", "grid", "exact"):
        raise ConfigError(f"method.kind must be mc, grid or exact, got {method!r}")
    fmt = values["output.format"]
    if fmt not in ("", "csv", "json"):
        raise ConfigError(f"output.format must be csv or json, got {fmt!r}")

    params = {}
    for key, value in values.items():
        section, _, name = key.partition(".")
        if section == "ensemble" and name != "kind":
            if name in ("side", "file"):
                params[name] = value
            elif name in ("sign_A", "sign_B"):
                params[name] = _number(values, key, int)
            else:
                params[name] = _number(values, key)

    cfg = RunConfig(
        theta_A=angle("settings.theta_A"),
        theta_B=angle("settings.theta_B"),
        theta_A_prime=angle("settings.theta_A_prime", True),
        theta_B_prime=angle("settings.theta_B_prime", True),
        units=units,
        a_A=_number(values, "couplings.a_A"),
        a_B=_number(values, "couplings.a_B"),
        width=_number(values, "packet.width"),
        mode=mode,
        epsilon=_number(values, "state.epsilon"),
        eps_pp=_number(values, "state.eps_pp"),
        eps_mm=_number(values, "state.eps_mm"),
        r_A0=_number(values, "hidden.r_A0"),
        r_B0=_number(values, "hidden.r_B0"),
        ensemble_kind=kind,
        ensemble_params=params,
        method_kind=method,
        n=_number(values, "method.n", int),
        seed=_number(values, "method.seed", int),
        m=_number(values, "method.m", int),
        output_format=fmt,
        output_path=values["output.path"],
    )
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    checks = (
        ("packet.width", cfg.width > 0, "must be positive"),
        ("couplings.a_A", cfg.a_A > 0, "must be positive"),
        ("couplings.a_B", cfg.a_B > 0, "must be positive"),
        ("method.n", cfg.n >= 1, "must be at least 1"),
        ("method.m", cfg.m >= 1, "must be at least 1"),
        ("method.seed", cfg.seed >= 0, "must be nonnegative"),
        ("state.epsilon", abs(cfg.epsilon) / (2 * math.sqrt(2)) <= 0.2, "outside the perturbative bound"),
        ("state.eps_pp", abs(cfg.eps_pp) <= 0.2, "outside the perturbative bound"),
        ("state.eps_mm", abs(cfg.eps_mm) <= 0.2, "outside the perturbative bound"),
    )
    for key, ok, msg in checks:
        if not ok:
            raise ConfigError(f"{key} {msg}")
    try:
        cfg.distribution()
    except ConfigError:
        raise
    except (ValueError, KeyError, OSError) as exc:
        raise ConfigError(f"ensemble: {exc}") from exc


# -- argument parsing ---------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


FLAG_KEYS = {
    "thetaA": "settings.theta_A",
    "thetaB": "settings.theta_B",
    "thetaA_prime": "settings.theta_A_prime",
    "thetaB_prime": "settings.theta_B_prime",
    "aA": "couplings.a_A",
    "aB": "couplings.a_B",
    "width": "packet.width",
    "mode": "experiment.mode",
    "epsilon": "state.epsilon",
    "rA0": "hidden.r_A0",
    "rB0": "hidden.r_B0",
    "ensemble": "ensemble.kind",
    "method": "method.kind",
    "n": "method.n",
    "seed": "method.seed",
    "m": "method.m",
    "format": "output.format",
    "output": "output.path",
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("configuration")
    g.add_argument("--config", help="flat 'section.key = value' file")
    g.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key")
    g.add_argument("--radians", action="store_true", help="read angles in radians")
    g.add_argument("--thetaA", "--theta-A")
    g.add_argument("--thetaB", "--theta-B")
    g.add_argument("--thetaA-prime", dest="thetaA_prime")
    g.add_argument("--thetaB-prime", dest="thetaB_prime")
    g.add_argument("--aA", "--a-A")
    g.add_argument("--aB", "--a-B")
    g.add_argument("--width")
    g.add_argument("--mode", help="von-neumann or stern-gerlach")
    g.add_argument("--epsilon", help="singlet perturbation epsilon")
    g.add_argument("--ensemble", help="ensemble kind")
    g.add_argument("--ensemble-param", action="append", default=[], metavar="NAME=VALUE")
    g.add_argument("--method", help="mc, grid or exact")
    g.add_argument("--n")
    g.add_argument("--seed")
    g.add_argument("--m")
    g.add_argument("--format", help="csv or json")
    g.add_argument("--output", "-o")

    parser = _Parser(prog="pilotnonlocal", description="Pilot-wave EPR nonlocality simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("trajectory", parents=[common], help="one hidden-variable trajectory")
    p.add_argument("--rA0")
    p.add_argument("--rB0")
    p.add_argument("--integrator", choices=("exact", "numeric"), default="exact")
    p.add_argument("--dt", type=float)

    sub.add_parser("outcomes", parents=[common], help="outcome probabilities at one setting pair")
    p = sub.add_parser("correlation", parents=[common], help="E[sigma_A sigma_B] over a grid of theta_B")
    p.add_argument("--thetaB-grid", help="start:stop:step (inclusive)")
    sub.add_parser("nonlocality", parents=[common], help="alpha and beta-tilde for a shift at B")
    p = sub.add_parser("signal", parents=[common], help="change of outcome statistics under a distant shift")
    p.add_argument("--wing", choices=("A", "B"), default="A")
    p = sub.add_parser("sweep", parents=[common], help="alpha(0,0,delta) table")
    p.add_argument("--delta-grid", default="0:180:15")
    p.add_argument("--check-bound", type=int, choices=(1, 5), default=5)
    p = sub.add_parser("entanglement", parents=[common], help="perturbed-singlet sweep and quadratic fit")
    p.add_argument("--eps-grid", default="0.01,0.02,0.03,0.04,0.05")
    p.add_argument("--delta-grid", default="180")
    p.add_argument("--fit-delta", default="180")
    p = sub.add_parser("circle", parents=[common], help="unit-disc toy model")
    p.add_argument("--gamma", default="15")
    p.add_argument("--disc", choices=("uniform", "upper-half"), default="uniform")
    p = sub.add_parser("bits", parents=[common], help="mean lower bound on nonlocal bits")
    p.add_argument("--range", choices=("full", "half"), default="full")
    p.add_argument("--lo")
    p.add_argument("--hi")
    p = sub.add_parser("search-balanced", parents=[common], help="search for a balanced nonequilibrium rho")
    p.add_argument("--triples", default="", help="'tA,tB,tB2;...'")
    p.add_argument("--family", default="grid-weights")
    p.add_argument("--grid-m", type=int, default=64)
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--weights-out", help="write grid-weights candidate to this file")
    sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    return parser


def _overrides(args) -> dict:
    out = {}
    for flag, key in FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None:
            out[key] = value
    if args.radians:
        out["settings.units"] = "rad"
    for item in args.ensemble_param:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--ensemble-param expects NAME=VALUE, got {item!r}")
        out[f"ensemble.{name.strip()}"] = value.strip()
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def parse_config(argv=None, env=None):
    """Parse the command line into (subcommand arguments, RunConfig)."""
    args = build_parser().parse_args(argv)
    if args.command is None:
        raise ConfigError("a subcommand is required: " + ", ".join(SUBCOMMANDS))
    file_values = parse_config_file(args.config) if args.config else {}
    return args, resolve(file_values, _overrides(args), env)


# -- output -------------------------------------------------------------------


def _angle_list(spec: str, units: str, key: str) -> np.ndarray:
    """``start:stop:step`` (inclusive) or a comma list, converted to radians."""
    try:
        if ":" in spec:
            start, stop, step = (float(v) for v in spec.split(":"))
            if step <= 0:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            vals = start + step * np.arange(count)
        else:
            vals = np.array([float(v) for v in spec.split(",") if v.strip()])
    except ValueError:
        raise ConfigError(f"{key}: cannot parse grid {spec!r}") from None
    if vals.size == 0:
        raise ConfigError(f"{key}: empty grid")
    return np.radians(vals) if units == "deg" else vals


def _angle(value: str, units: str, key: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {value!r}") from None
    return math.radians(v) if units == "deg" else v


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _json_text(command: str, cfg: RunConfig, payload: dict) -> str:
    doc = {"command": command, "version": __version__, "config": cfg.to_dict(), "result": payload}
    return json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit(text: str, cfg: RunConfig, stdout) -> None:
    if cfg.output_path:
        with open(cfg.output_path, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _table(command, cfg, header, rows, extra, default_fmt):
    fmt = cfg.output_format or default_fmt
    if fmt == "csv":
        return _csv_text(header, rows)
    payload = dict(extra)
    payload["rows"] = [dict(zip(header, r)) for r in rows]
    return _json_text(command, cfg, payload)


def _require(value, key):
    if value is None:
        raise ConfigError(f"{key} is required for this subcommand")
    return value


# -- subcommands --------------------------------------------------------------


def _cmd_trajectory(args, cfg):
    lam = HiddenVariable(cfg.r_A0, cfg.r_B0)
    try:
        lam.check(cfg.packet)
    except ValueError as exc:
        raise ConfigError(f"hidden.r_A0/hidden.r_B0: {exc}") from None
    amps = cfg.experiment.amplitudes(cfg.theta_A, cfg.theta_B)
    if args.integrator == "exact":
        tr = evolve_exact(lam, amps, cfg.couplings, cfg.packet)
    else:
        tr = evolve_numeric(lam, amps, cfg.couplings, cfg.packet, dt=args.dt)
    rows = [(float(t), float(x), float(y), int(r)) for t, x, y, r in zip(tr.t, tr.r_A, tr.r_B, tr.region_id)]
    extra = {"integrator": args.integrator, "sigma_A": tr.outcome.sigma_A, "sigma_B": tr.outcome.sigma_B}
    return _table("trajectory", cfg, ("t", "r_A", "r_B", "region_id"), rows, extra, "csv")


def _cmd_outcomes(args, cfg):
    st = outcome_statistics(cfg.theta_A, cfg.theta_B, cfg.experiment, cfg.distribution(), cfg.method)
    pa, pb, e = st.p_A_plus.value, st.p_B_plus.value, st.correlation.value
    joint = {f"{'+' if i > 0 else '-'}{'+' if j > 0 else '-'}": (1 + i * (2 * pa - 1) + j * (2 * pb - 1) + i * j * e) / 4
             for i in (1, -1) for j in (1, -1)}
    payload = {"p_A_plus": pa, "p_A_plus_err": st.p_A_plus.error, "p_B_plus": pb, "p_B_plus_err": st.p_B_plus.error,
               "correlation": e, "correlation_err": st.correlation.error, "joint": joint}
    if (cfg.output_format or "json") == "csv":
        return _csv_text(list(payload)[:-1], [list(payload.values())[:-1]])
    return _json_text("outcomes", cfg, payload)


def _cmd_correlation(args, cfg):
    thetas = _angle_list(args.thetaB_grid, cfg.units, "--thetaB-grid") if args.thetaB_grid else [cfg.theta_B]
    dist, rows = cfg.distribution(), []
    for tb in thetas:
        st = outcome_statistics(cfg.theta_A, float(tb), cfg.experiment, dist, cfg.method)
        rows.append((cfg.theta_A, float(tb), st.correlation.value, st.correlation.error, -math.cos(cfg.theta_A - tb)))
    header = ("theta_A_rad", "theta_B_rad", "correlation", "correlation_err", "quantum")
    return _table("correlation", cfg, header, rows, {}, "json")


def _cmd_nonlocality(args, cfg):
    tb2 = _require(cfg.theta_B_prime, "settings.theta_B_prime")
    rep = shift_at_B(cfg.theta_A, cfg.theta_B, tb2, cfg.experiment, cfg.distribution(), cfg.method)
    if (cfg.output_format or "json") == "csv":
        d = rep.as_dict()
        keys = ("alpha", "alpha_err", "beta_tilde", "beta_tilde_err")
        return _csv_text(keys + ("bound1_rhs", "bound1_gap"), [[d[k] for k in keys] + [rep.bound1.rhs, rep.bound1.gap]])
    return _json_text("nonlocality", cfg, rep.as_dict())


def _cmd_signal(args, cfg):
    if args.wing == "A":
        shifted = _require(cfg.theta_B_prime, "settings.theta_B_prime")
    else:
        shifted = _require(cfg.theta_A_prime, "settings.theta_A_prime")
    rep = signal(args.wing, cfg.theta_A, cfg.theta_B, shifted, cfg.experiment, cfg.distribution(), cfg.method)
    d = rep.as_dict()
    if (cfg.output_format or "json") == "csv":
        return _csv_text(list(d), [list(d.values())])
    return _json_text("signal", cfg, d)


def _cmd_sweep(args, cfg):
    deltas = _angle_list(args.delta_grid, cfg.units, "--delta-grid")
    sw = delta_sweep(deltas, cfg.experiment, cfg.method, bound_id=args.check_bound)
    header = ("delta_rad", "alpha", "alpha_err", "beta_tilde", "beta_tilde_err", "bound_rhs", "gap")
    rows = [tuple(r[h] for h in header) for r in sw.rows()]
    return _table("sweep", cfg, header, rows, {"bound": args.check_bound}, "csv")


def _cmd_entanglement(args, cfg):
    try:
        eps = [float(v) for v in args.eps_grid.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--eps-grid: cannot parse {args.eps_grid!r}") from None
    deltas = _angle_list(args.delta_grid, cfg.units, "--delta-grid")
    fit_delta = _angle(args.fit_delta, cfg.units, "--fit-delta")
    try:
        sw = entanglement_sweep(eps, deltas, cfg.couplings, cfg.packet, cfg.method, fit_delta)
    except ValueError as exc:
        raise ConfigError(f"--eps-grid: {exc}") from None
    rows = [(float(e), float(d), float(sw.alpha[i, j])) for i, e in enumerate(sw.epsilon) for j, d in enumerate(sw.delta)]
    extra = {"fit_delta_rad": sw.fit_delta, "fit_intercept": sw.fit_intercept, "fit_quadratic": sw.fit_quadratic,
             "fit_poly_highest_first": sw.fit_poly, "model": "alpha = c0 + c2 * epsilon**2"}
    return _table("entanglement", cfg, ("epsilon", "delta_rad", "alpha"), rows, extra, "json")


def _cmd_circle(args, cfg):
    gamma = _angle(args.gamma, cfg.units, "--gamma")
    if abs(gamma) > math.pi:
        raise ConfigError("--gamma must satisfy |gamma| <= 180 degrees")
    if cfg.method_kind == "exact":
        raise ConfigError("method.kind: the circle model supports mc or grid")
    rep = circle_model_run(gamma, DiscDistribution(args.disc), cfg.method)
    d = rep.as_dict()
    d["disc"] = args.disc
    if (cfg.output_format or "json") == "csv":
        keys = [k for k in d if k not in ("gamma_convention", "disc")]
        return _csv_text(keys, [[d[k] for k in keys]])
    return _json_text("circle", cfg, d)


def _cmd_bits(args, cfg):
    if args.lo is not None or args.hi is not None:
        lo = _angle(_require(args.lo, "--lo"), cfg.units, "--lo")
        hi = _angle(_require(args.hi, "--hi"), cfg.units, "--hi")
    else:
        lo, hi = (-math.pi, math.pi) if args.range == "full" else (-math.pi / 2, math.pi / 2)
    bits = nonlocal_bits(lo, hi)
    if (cfg.output_format or "json") == "csv":
        return _csv_text(("lo_rad", "hi_rad", "mean_bits"), [(lo, hi, bits)])
    return _json_text("bits", cfg, {"lo_rad": lo, "hi_rad": hi, "mean_bits": bits})


def _cmd_search(args, cfg):
    triples = []
    for chunk in filter(None, (c.strip() for c in args.triples.split(";"))):
        parts = chunk.split(",")
        if len(parts) != 3:
            raise ConfigError(f"--triples: expected three angles, got {chunk!r}")
        triples.append(tuple(_angle(p, cfg.units, "--triples") for p in parts))
    if args.grid_m < 1 or args.budget < 1:
        raise ConfigError("--grid-m and --budget must be positive")
    try:
        res = balanced_distribution_search(triples, args.family, cfg.experiment, m=args.grid_m,
                                           budget=args.budget, seed=cfg.seed)
    except ValueError as exc:
        raise ConfigError(f"--family: {exc}") from None
    params = {k: v for k, v in res.distribution.params.items() if k != "weights"}
    if args.weights_out and res.distribution.kind == "grid-weights":
        write_grid_weights(args.weights_out, res.distribution)
    payload = {"family": res.family, "candidate_kind": res.distribution.kind, "candidate_params": params,
               "triples_rad": res.triples, "residuals": res.residuals, "max_residual": res.max_residual,
               "disequilibrium_tv": res.disequilibrium, "note": res.note}
    if (cfg.output_format or "json") == "csv":
        rows = [(*t, r) for t, r in zip(res.triples, res.residuals)]
        return _csv_text(("theta_A_rad", "theta_B_rad", "theta_B_prime_rad", "residual"), rows)
    return _json_text("search-balanced", cfg, payload)


def _cmd_verify(args, cfg, stdout):
    from .acceptance import run_all

    results = run_all(echo=lambda line: (stdout.write(line + "\n"), stdout.flush()))
    failed = [r.number for r in results if not r.passed]
    stdout.write(f"{len(results) - len(failed)}/{len(results)} criteria passed\n")
    if cfg.output_path:
        payload = {"criteria": [asdict(r) for r in results], "failed": failed}
        with open(cfg.output_path, "w") as fh:
            fh.write(_json_text("verify", cfg, payload))
    return EXIT_ACCEPTANCE if failed else EXIT_OK


COMMANDS = {
    "trajectory": _cmd_trajectory,
    "outcomes": _cmd_outcomes,
    "correlation": _cmd_correlation,
    "nonlocality": _cmd_nonlocality,
    "signal": _cmd_signal,
    "sweep": _cmd_sweep,
    "entanglement": _cmd_entanglement,
    "circle": _cmd_circle,
    "bits": _cmd_bits,
    "search-balanced": _cmd_search,
}


def run_subcommand(args, cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    if args.command == "verify":
        return _cmd_verify(args, cfg, stdout)
    _emit(COMMANDS[args.command](args, cfg), cfg, stdout)
    return EXIT_OK


def main(argv=None, stdout=None, stderr=None, env=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args, cfg = parse_config(argv, env)
        return run_subcommand(args, cfg, stdout)
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except ConfigError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - report and map to the internal-error code
        stderr.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
