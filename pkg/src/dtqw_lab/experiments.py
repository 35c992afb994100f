"""Experiment configuration, orchestration and table output.

Every experiment is a composition of library calls; this module only parses
configuration, wires arguments through and serializes results.
"""

from __future__ import annotations

import ast
import copy
import csv
import hashlib
import io
import json
import math
import operator
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .coin import CoinSpec, build_coin, preset
from .dirac import DiracParams, dirac_dispersion, gap_edge, spectral_equivalence_check
from .evolution import StepConfig, evolve
from .klein import PacketParams, run_confinement, run_klein
from .observables import (
    NoOscillationError,
    delta_x_series_analytic,
    delta_x_series_simulated,
    estimate_frequency,
    coarse_grain,
    dominant_horns,
    horn_positions,
    local_maxima,
    standing_momenta,
)
from .spectral import band_decompose, band_structure, cone_geometry, group_velocity
from .state import Lattice, dft, gaussian_packet, point_state

EXPERIMENTS = ("spectrum", "spread", "zitter", "klein", "confine", "dirac-compare")
FORMATS = ("csv", "json")
OUTPUT_DIR_ENV = "DTQW_LAB_OUTPUT_DIR"


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


# --- exact-ish expression parsing -------------------------------------------------

_BINOPS: dict[type, Callable] = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_NAMES = {"pi": math.pi, "i": 1j, "j": 1j, "e": math.e}
_FUNCS = {"sqrt": lambda x: np.sqrt(x + 0j) if isinstance(x, complex) or x < 0 else math.sqrt(x)}


def parse_number(value: Any, field: str = "value", allow_complex: bool = False):
    """Parse a literal or an arithmetic expression such as ``"pi/2"`` or ``"1/sqrt(2)"``."""
    if isinstance(value, bool):
        raise ConfigError(field, f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, complex):
        out = value
    elif isinstance(value, str):
        try:
            tree = ast.parse(value.strip(), mode="eval")
            out = _eval(tree.body)
        except (SyntaxError, ValueError, TypeError, ZeroDivisionError, KeyError) as exc:
            raise ConfigError(field, f"cannot parse {value!r} ({exc})") from None
    else:
        raise ConfigError(field, f"expected a number or expression, got {value!r}")
    if isinstance(out, complex):
        if allow_complex:
            return complex(out)
        if out.imag != 0:
            raise ConfigError(field, f"expected a real number, got {value!r}")
        out = out.real
    return float(out)


def _eval(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
        return node.value
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _FUNCS
        and len(node.args) == 1
        and not node.keywords
    ):
        return _FUNCS[node.func.id](_eval(node.args[0]))
    raise ValueError(f"unsupported syntax {ast.dump(node)[:40]}")


# --- configuration ------------------------------------------------------------------

_COMMON = {
    "coin": "hadamard",
    "lattice": {"sites": 512, "spacing": 1, "dt": 1},
    "output": {"path": None, "format": "csv"},
    "seed": 0,
}

DEFAULTS: dict[str, dict] = {
    "spectrum": {"lattice": {"sites": 256}},
    "spread": {"packet": {"x0": 256, "spinor": ["1/sqrt(2)", "i/sqrt(2)"]}, "steps": 200},
    "zitter": {
        "packet": {"x0": 256, "k0": "pi/2", "sigma_x": 25, "band": "spinor", "spinor": [1, 0]},
        "steps": 200,
    },
    "klein": {
        "lattice": {"sites": 2048},
        "packet": {"x0": 824, "k0": 0, "sigma_x": 10, "band": "plus"},
        "potential": {"a": 1024, "phi": "pi"},
        "steps": 1000,
        "depths": [30],
    },
    "confine": {
        "packet": {"x0": 256, "k0": 0, "sigma_x": 5, "band": "plus"},
        "walls": [206, 306],
        "potential": {"phi": "pi/2"},
        "steps": 2000,
        "skin": 30,
    },
    "dirac-compare": {
        "lattice": {"sites": 256},
        "dirac": {"mass": 1, "dt": 0.1},
        "k_max": 1,
        "random_gammas": 3,
    },
}

_SECTION_KEYS = {
    "lattice": {"sites", "spacing", "dt"},
    "output": {"path", "format"},
    "packet": {"x0", "k0", "sigma_x", "band", "spinor"},
    "potential": {"a", "phi"},
    "dirac": {"mass", "dt"},
}
_COIN_KEYS = {"preset", "theta", "axis", "global_phase", "mass", "dt"}


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def default_config(experiment: str) -> dict:
    if experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"unknown experiment {experiment!r}")
    return _merge(_merge(_COMMON, DEFAULTS[experiment]), {"experiment": experiment})


def resolve_config(raw: dict, experiment: str | None = None) -> dict:
    """Fill defaults for ``raw`` and reject keys the experiment does not use."""
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be an object")
    exp = raw.get("experiment", experiment)
    if experiment is not None and exp != experiment:
        raise ConfigError("experiment", f"config says {exp!r} but {experiment!r} was requested")
    if exp is None:
        raise ConfigError("experiment", "missing")
    cfg = _merge(default_config(exp), raw)
    allowed = set(default_config(exp))
    for key in cfg:
        if key not in allowed:
            raise ConfigError(key, f"unknown key for experiment {exp!r}")
    for section, keys in _SECTION_KEYS.items():
        if section in cfg:
            if not isinstance(cfg[section], dict):
                raise ConfigError(section, "expected an object")
            for key in cfg[section]:
                if key not in keys:
                    raise ConfigError(f"{section}.{key}", "unknown key")
    if isinstance(cfg.get("coin"), dict):
        for key in cfg["coin"]:
            if key not in _COIN_KEYS:
                raise ConfigError(f"coin.{key}", "unknown key")
    fmt = cfg["output"]["format"]
    if fmt not in FORMATS:
        raise ConfigError("output.format", f"expected one of {FORMATS}, got {fmt!r}")
    return cfg


def set_override(cfg: dict, assignment: str) -> dict:
    """Apply ``key.sub=value``; ``value`` is read as JSON when possible, else kept as text."""
    if "=" not in assignment:
        raise ConfigError(assignment, "override must look like key=value")
    path, text = assignment.split("=", 1)
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    keys = path.strip().split(".")
    out = copy.deepcopy(cfg)
    node = out
    for key in keys[:-1]:
        if not isinstance(node.get(key, {}), dict):
            raise ConfigError(path, f"{key} is not an object")
        node = node.setdefault(key, {})
    node[keys[-1]] = value
    return out


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _int(value, field: str, minimum: int | None = None) -> int:
    num = parse_number(value, field)
    if num != int(num):
        raise ConfigError(field, f"expected an integer, got {value!r}")
    if minimum is not None and num < minimum:
        raise ConfigError(field, f"must be >= {minimum}, got {value!r}")
    return int(num)


def _lattice(cfg: dict) -> Lattice:
    sec = cfg["lattice"]
    sites = _int(sec["sites"], "lattice.sites", 2)
    try:
        return Lattice(
            sites,
            parse_number(sec.get("spacing", 1), "lattice.spacing"),
            parse_number(sec.get("dt", 1), "lattice.dt"),
        )
    except ValueError as exc:
        raise ConfigError("lattice", str(exc)) from None


def _coin(cfg: dict) -> CoinSpec:
    coin = cfg["coin"]
    try:
        if isinstance(coin, str):
            return preset(coin)
        if not isinstance(coin, dict):
            raise ConfigError("coin", "expected a preset name or an object")
        if "preset" in coin:
            params = {k: parse_number(v, f"coin.{k}") for k, v in coin.items() if k != "preset"}
            return preset(coin["preset"], **params)
        if "theta" not in coin or "axis" not in coin:
            raise ConfigError("coin", "needs 'preset' or both 'theta' and 'axis'")
        axis = coin["axis"]
        if not isinstance(axis, list) or len(axis) != 3:
            raise ConfigError("coin.axis", "expected a list of three numbers")
        return CoinSpec(
            parse_number(coin["theta"], "coin.theta"),
            tuple(parse_number(a, f"coin.axis[{i}]") for i, a in enumerate(axis)),
            parse_number(coin.get("global_phase", 0), "coin.global_phase"),
        )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError("coin", str(exc)) from None


def _spinor(sec: dict, field: str = "packet.spinor") -> np.ndarray:
    raw = sec.get("spinor")
    if not isinstance(raw, list) or len(raw) != 2:
        raise ConfigError(field, "expected a list of two (complex) numbers")
    return np.array([parse_number(v, field, allow_complex=True) for v in raw], dtype=complex)


def _packet(cfg: dict) -> PacketParams:
    sec = cfg["packet"]
    band = sec.get("band", "plus")
    if band == "spinor":
        band = _spinor(sec)
    elif band not in ("plus", "minus"):
        raise ConfigError("packet.band", f"expected plus, minus or spinor, got {band!r}")
    for key in ("x0", "k0", "sigma_x"):
        if key not in sec:
            raise ConfigError(f"packet.{key}", "missing")
    return PacketParams(
        parse_number(sec["x0"], "packet.x0"),
        parse_number(sec["k0"], "packet.k0"),
        parse_number(sec["sigma_x"], "packet.sigma_x"),
        band,
    )


# --- tables ---------------------------------------------------------------------------


@dataclass
class Table:
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("row length does not match the header")


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def _csv_text(value) -> str:
    value = _cell(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _json_value(value):
    value = _cell(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_json_value(v) for v in value.tolist()]
    return value


def emit(table: Table, fmt: str, path: str | os.PathLike, meta: dict | None = None) -> Path:
    """Write ``table`` as CSV (header + rows) or JSON ``{meta, columns, rows}``."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(path)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_csv_text(v) for v in row])
        text = buf.getvalue()
    else:
        doc = {
            "meta": _json_value(meta or {}),
            "columns": list(table.columns),
            "rows": [[_json_value(v) for v in row] for row in table.rows],
        }
        text = json.dumps(doc, sort_keys=True, indent=1) + "\n"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(text.encode("utf-8"))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def read_table(path: str | os.PathLike) -> Table:
    """Inverse of :func:`emit`; CSV cells come back as floats where they parse."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        doc = json.loads(text)
        return Table(doc["columns"], [tuple(r) for r in doc["rows"]])
    reader = csv.reader(io.StringIO(text))
    header = next(reader)

    def conv(s):
        try:
            return float(s)
        except ValueError:
            return s

    return Table(header, [tuple(conv(c) for c in row) for row in reader])


# --- experiments ------------------------------------------------------------------------


def _exp_spectrum(cfg):
    spec = _coin(cfg)
    lat = _lattice(cfg)
    band = band_structure(spec, lat.momenta, lat.dt)
    rows = [
        (
            band.k[i],
            band.lambda_plus[i].real,
            band.lambda_plus[i].imag,
            band.lambda_minus[i].real,
            band.lambda_minus[i].imag,
            band.energy_plus[i],
            band.energy_minus[i],
            band.v_plus[i],
            band.v_minus[i],
        )
        for i in range(lat.sites)
    ]
    cols = ["k", "re_lambda_plus", "im_lambda_plus", "re_lambda_minus", "im_lambda_minus",
            "e_plus", "e_minus", "v_plus", "v_minus"]
    geo = cone_geometry(spec)
    summary = {
        "dilation_angle": geo.dilation_angle,
        "tilt_angle": geo.tilt_angle,
        "allowed_arcs": [list(a) for a in geo.allowed_arcs],
        "forbidden_arcs": [list(a) for a in geo.forbidden_arcs],
        "standing_momenta": standing_momenta(spec),
    }
    return Table(cols, rows), summary


def _max_speed(spec: CoinSpec) -> float:
    k = np.linspace(-np.pi, np.pi, 20001)
    v = band_structure(spec, k).v_plus
    return float(np.nanmax(np.abs(v)))


def _exp_spread(cfg):
    spec = _coin(cfg)
    lat = _lattice(cfg)
    x0 = _int(cfg["packet"]["x0"], "packet.x0", 0)
    steps = _int(cfg["steps"], "steps", 1)
    start = point_state(lat, x0, _spinor(cfg["packet"]))
    final = evolve(start, StepConfig(build_coin(spec)), steps).final
    p = np.sum(np.abs(final.amplitudes) ** 2, axis=1)
    prominent = horn_positions(p)
    summary = {
        "horns": list(dominant_horns(p, x0)),
        "expected_horn": steps * _max_speed(spec),
        "n_local_maxima": int(len(local_maxima(coarse_grain(p)))),
        "prominent_maxima": [int((h - x0 + lat.sites // 2) % lat.sites - lat.sites // 2) for h in prominent],
    }
    rows = [(x, p[x]) for x in range(lat.sites)]
    return Table(["x", "probability"], rows), summary


def _exp_zitter(cfg):
    spec = _coin(cfg)
    lat = _lattice(cfg)
    pk = _packet(cfg)
    steps = _int(cfg["steps"], "steps", 1)
    state = pk.build(lat, spec)
    sim = delta_x_series_simulated(state, StepConfig(build_coin(spec)), steps)
    ana = delta_x_series_analytic(band_decompose(dft(state), spec), spec, steps)
    try:
        omega = estimate_frequency(sim)
    except NoOscillationError:
        omega = None
    summary = {
        "omega_est": omega,
        "omega_pred": sim.omega_pred,
        "amplitude": sim.amplitude,
        "A": ana.A,
        "max_sim_analytic_diff": float(np.max(np.abs(sim.values - ana.values))),
    }
    rows = [(int(t), sim.values[t], ana.values[t]) for t in range(steps)]
    return Table(["t", "dx_simulated", "dx_analytic"], rows), summary


def _exp_klein(cfg):
    spec = _coin(cfg)
    lat = _lattice(cfg)
    pk = _packet(cfg)
    pot = cfg["potential"]
    a = _int(pot.get("a", lat.sites // 2), "potential.a", 0)
    phi = parse_number(pot.get("phi", 0), "potential.phi")
    depths = cfg["depths"]
    if not isinstance(depths, list) or not depths:
        raise ConfigError("depths", "expected a non-empty list of integers")
    depths = [_int(d, "depths", 1) for d in depths]
    rec = run_klein(spec, pk, lat, a, phi, _int(cfg["steps"], "steps", 1), depths)
    cols = ["t", "region_mass"] + [f"beyond_{d}" for d in rec.depths]
    rows = [
        (int(t), rec.region_mass[i], *rec.mass_beyond[i]) for i, t in enumerate(rec.times)
    ]
    summary = {
        "classification": rec.prediction.weights,
        "predicted_nondecaying_fraction": rec.prediction.predicted_nondecaying_fraction,
        "decay_rate": rec.decay_rate,
        "max_beyond": {str(d): float(rec.mass_beyond[:, j].max()) for j, d in enumerate(rec.depths)},
        "final_beyond": {str(d): float(rec.mass_beyond[-1, j]) for j, d in enumerate(rec.depths)},
        "arrival_time": rec.arrival_time,
        "norm_drift": rec.norm_drift,
    }
    return Table(cols, rows), summary


def _exp_confine(cfg):
    spec = _coin(cfg)
    lat = _lattice(cfg)
    pk = _packet(cfg)
    walls = cfg["walls"]
    if not isinstance(walls, list) or len(walls) not in (1, 2):
        raise ConfigError("walls", "expected a list of one or two site indices")
    walls = [_int(w, "walls", 0) for w in walls]
    phi = parse_number(cfg["potential"].get("phi", "pi/2"), "potential.phi")
    rec = run_confinement(
        spec, pk, lat, walls, phi, _int(cfg["steps"], "steps", 1), _int(cfg["skin"], "skin", 1)
    )
    rows = [
        (int(t), rec.inside[t], rec.outside_deep[t], rec.mean_position[t]) for t in rec.times
    ]
    summary = {
        "max_outside": rec.max_outside,
        "min_inside": float(rec.inside.min()),
        "channels_closed": rec.channels_closed,
        "norm_drift": rec.norm_drift,
    }
    return Table(["t", "inside", "outside_deep", "mean_position"], rows), summary


def _exp_dirac_compare(cfg):
    sec = cfg["dirac"]
    params = DiracParams(parse_number(sec["mass"], "dirac.mass"), parse_number(sec["dt"], "dirac.dt"))
    lat = _lattice(cfg)
    k_max = parse_number(cfg["k_max"], "k_max")
    if not 0 < k_max <= math.pi / params.dx:
        raise ConfigError("k_max", f"must lie in (0, pi/dx = {math.pi / params.dx}]")
    k = lat.momenta / params.dx
    ep, em, err = dirac_dispersion(params, k)
    rows = [
        (k[i], ep[i], em[i], math.sqrt(k[i] ** 2 + params.mass**2), err[i])
        for i in range(lat.sites)
    ]
    ks = np.linspace(-k_max, k_max, 401)
    half = DiracParams(params.mass, params.dt / 2)
    coarse = float(np.max(dirac_dispersion(params, ks)[2]))
    fine = float(np.max(dirac_dispersion(half, ks)[2]))
    rng = np.random.default_rng(_int(cfg["seed"], "seed"))
    gammas = [params.gamma] + list(rng.uniform(0.01, 1.0, _int(cfg["random_gammas"], "random_gammas", 0)))
    mismatch = 0.0
    residual = 0.0
    for g in gammas:
        rep = spectral_equivalence_check(DiracParams(2 * g, 1.0), lat.momenta)
        mismatch = max(mismatch, rep.max_eigenvalue_mismatch, rep.max_closed_form_mismatch)
        residual = max(residual, rep.max_similarity_residual)
    summary = {
        "gamma": params.gamma,
        "gap_edge": gap_edge(params),
        "max_eigenvalue_mismatch": mismatch,
        "max_similarity_residual": residual,
        "continuum_error": coarse,
        "continuum_error_half_dt": fine,
        "convergence_ratio": coarse / fine if fine > 0 else None,
        "gammas": gammas,
    }
    return Table(["k", "e_plus", "e_minus", "e_continuum", "continuum_error"], rows), summary


_RUNNERS = {
    "spectrum": _exp_spectrum,
    "spread": _exp_spread,
    "zitter": _exp_zitter,
    "klein": _exp_klein,
    "confine": _exp_confine,
    "dirac-compare": _exp_dirac_compare,
}


@dataclass
class RunResult:
    config: dict
    table: Table
    summary: dict
    meta: dict
    table_path: Path | None = None
    summary_path: Path | None = None


def run(config: dict, write: bool = True) -> RunResult:
    """Validate ``config``, run the experiment and (optionally) write its files.

    The table goes to ``output.path`` (default ``$DTQW_LAB_OUTPUT_DIR/<experiment>.<format>``)
    and the summary with the meta block to ``<stem>.summary.json`` beside it.
    """
    cfg = resolve_config(config)
    exp = cfg["experiment"]
    table, summary = _RUNNERS[exp](cfg)
    meta = {
        "experiment": exp,
        "config": cfg,
        "config_hash": config_hash(cfg),
        "version": __version__,
    }
    result = RunResult(cfg, table, _json_value(summary), meta)
    if write:
        fmt = cfg["output"]["format"]
        out = cfg["output"]["path"]
        if out is None:
            out = Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / f"{exp}.{fmt}"
        out = Path(out)
        result.table_path = emit(table, fmt, out, meta)
        result.summary_path = out.with_name(out.stem + ".summary.json")
        doc = {"meta": _json_value(meta), "summary": result.summary}
        result.summary_path.write_bytes(
            (json.dumps(doc, sort_keys=True, indent=1) + "\n").encode("utf-8")
        )
    return result
