"""Command-line front end: ``cvtc thresholds|clone|tradeoff|optimize|montecarlo``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channels import NoiseParams, build_noisy_support
from .errors import CVTCError, InfeasibleError, InvalidArgumentError, UnsupportedInputError
from .gaussian import GaussianState
from .optimizer import (
    baseline_fidelities,
    f1_max_tradeoff_m3,
    n1_min_closed,
    optimize_symmetric_closed,
    optimize_symmetric_numeric,
    tradeoff_m2,
)
from .separability import (
    lossy_threshold_mode0,
    lossy_threshold_mode1,
    lossy_threshold_numeric,
)
from .states import SupportSpec
from .telecloning import InputState, thread_count, clone_fidelity_closed, monte_carlo_protocol, run_protocol

EXIT_OK, EXIT_INPUT, EXIT_CHECK = 0, 2, 3

PRESETS = {
    "fig1": {"photons": "1,1", "sweep": ["mu:0.1:2:50"]},
    "fig3": {"mu": 0.03, "nu": 0.01, "delta": 0.02, "m": "2,5,10"},
    "fig4": {"mu": 0.05, "nu": 0.2, "delta": 0.05, "m": "2,3,5"},
    "fig5": {"mu": 0.6, "nu": 0.01, "delta": 0.1, "m": "2,3"},
    "noiseless": {"mu": 0.0, "nu": 0.0, "delta": 0.0, "m": "2,3,5"},
}

DEFAULTS = {
    "m": None, "photons": None, "nu": 0.0, "mu": 0.0, "tau0": 0.0, "tauc": 0.0, "tauT": None,
    "delta": 0.0, "gamma": 1.0, "sweep": None, "verify": False, "seed": 0, "samples": 100_000,
    "alpha": "0", "out": None, "format": None,
}


class CheckFailure(CVTCError):
    def __init__(self, message: str, payload: dict):
        super().__init__(message)
        self.payload = payload


@dataclass(frozen=True)
class Sweep:
    var: str
    start: float
    stop: float
    steps: int

    @classmethod
    def parse(cls, text: str) -> "Sweep":
        parts = text.split(":")
        if len(parts) != 4:
            raise InvalidArgumentError(f"sweep must look like var:start:stop:steps, got {text!r}")
        var, start, stop, steps = parts
        try:
            start, stop, n = float(start), float(stop), int(steps)
        except ValueError:
            raise InvalidArgumentError(f"bad numbers in sweep {text!r}") from None
        if n < 2 or not (math.isfinite(start) and math.isfinite(stop)):
            raise InvalidArgumentError(f"sweep needs finite bounds and steps >= 2, got {text!r}")
        return cls(var, start, stop, n)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


# -- formatting ----------------------------------------------------------------

def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".12g")
    return str(value)


def to_csv(header: list, rows: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else fmt(value)
    if isinstance(value, np.integer):
        return int(value)
    return value


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _table(cfg, header, rows) -> str:
    if cfg["format"] == "json":
        return to_json([dict(zip(header, row)) for row in rows])
    return to_csv(header, rows)


# -- config ----------------------------------------------------------------

def _floats(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise InvalidArgumentError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text) -> list:
    values = _floats(text)
    if any(v != int(v) for v in values):
        raise InvalidArgumentError(f"expected integers, got {text!r}")
    return [int(v) for v in values]


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge defaults < preset < JSON config file < explicit flags."""
    cfg = dict(DEFAULTS)
    explicit = {k: v for k, v in vars(args).items() if v is not None and k in DEFAULTS}
    file_cfg = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidArgumentError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(file_cfg) - set(DEFAULTS) - {"preset"}
        if unknown:
            raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")
    preset = args.preset or file_cfg.get("preset")
    if preset:
        if preset not in PRESETS:
            raise InvalidArgumentError(f"unknown preset {preset!r}")
        cfg.update(PRESETS[preset])
    cfg.update({k: v for k, v in file_cfg.items() if k != "preset"})
    cfg.update(explicit)
    if args.verify:
        cfg["verify"] = True
    if cfg["sweep"] is not None and isinstance(cfg["sweep"], str):
        cfg["sweep"] = [cfg["sweep"]]
    cfg["sweeps"] = [Sweep.parse(s) for s in (cfg["sweep"] or [])]
    cfg["preset"] = preset
    return cfg


def _noise(cfg) -> NoiseParams:
    tau0, tauc = float(cfg["tau0"]), float(cfg["tauc"])
    if cfg["tauT"] is not None:
        tau_t = float(cfg["tauT"])
        tauc = tau_t - tau0
        if tauc < 0:
            raise InvalidArgumentError(f"tau0 = {tau0} exceeds tauT = {tau_t}")
    return NoiseParams(nu=float(cfg["nu"]), mu=float(cfg["mu"]), tau0=tau0, tauc=tauc,
                       delta=float(cfg["delta"]))


def _spec(cfg, default_m: int = 2) -> SupportSpec:
    if cfg["photons"] is not None:
        spec = SupportSpec(tuple(_floats(cfg["photons"])))
        if cfg["m"] is not None and _ints(cfg["m"]) != [spec.m]:
            raise InvalidArgumentError(f"--m {cfg['m']} disagrees with {spec.m} photon numbers")
        return spec
    ms = _ints(cfg["m"]) if cfg["m"] is not None else [default_m]
    if len(ms) != 1:
        raise InvalidArgumentError("this command takes a single m")
    return SupportSpec.optimal_symmetric(ms[0])


def _sweep_for(cfg, var, default: str) -> np.ndarray:
    for s in cfg["sweeps"]:
        if s.var == var:
            return s.values()
    return Sweep.parse(default).values()


def _check_sweep_vars(cfg, allowed) -> None:
    for s in cfg["sweeps"]:
        if s.var not in allowed:
            raise InvalidArgumentError(f"cannot sweep {s.var!r} here; choose from {sorted(allowed)}")


def _parallel_map(fn, items) -> list:
    items = list(items)
    if len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(thread_count(), len(items))) as pool:
        return list(pool.map(fn, items))


# -- commands --------------------------------------------------------------

def cmd_thresholds(cfg) -> str:
    _check_sweep_vars(cfg, {"mu"})
    spec = SupportSpec(tuple(_floats(cfg["photons"] or "1,1")))
    if spec.m != 2:
        raise InvalidArgumentError("thresholds need exactly two clone modes")
    gamma = float(cfg["gamma"])
    if not gamma > 0:
        raise InvalidArgumentError(f"loss rate must be > 0, got {gamma}")
    mus = _sweep_for(cfg, "mu", "mu:0.1:2:50")

    def row(mu):
        mu = float(mu)
        if mu <= 0:
            return [mu, math.inf, math.inf, math.inf]
        return [mu,
                lossy_threshold_mode0(spec.n0 + sum(spec.photon_numbers), mu, gamma),
                lossy_threshold_mode1(spec, mu, gamma, mode=1),
                lossy_threshold_mode1(spec, mu, gamma, mode=2)]

    rows = _parallel_map(row, mus)
    if cfg["verify"]:
        for r in rows:
            if r[0] <= 0:
                continue
            for mode, closed in zip((0, 1, 2), r[1:]):
                numeric = lossy_threshold_numeric(spec, mode, r[0], gamma)
                if abs(numeric - closed) > 1e-6 * max(1.0, closed):
                    raise CheckFailure("threshold cross-check failed",
                                       {"mu": r[0], "mode": mode, "closed": closed, "numeric": numeric})
    return _table(cfg, ["mu", "t_mode0", "t_mode1", "t_mode2"], rows)


def cmd_clone(cfg) -> str:
    spec = _spec(cfg)
    noise = _noise(cfg)
    clones = []
    for h in range(1, spec.m + 1):
        f = clone_fidelity_closed(spec, noise, h)
        clones.append({"h": h, "n_h": 1.0 / f - 1.0, "F_h": f})
    result = {
        "clones": clones,
        "params": {"photons": list(spec.photon_numbers), "N0": spec.n0, "nu": noise.nu, "mu": noise.mu,
                   "tau0": noise.tau0, "tauc": noise.tauc, "delta": noise.delta, "x": noise.x},
    }
    if cfg["verify"]:
        report = run_protocol(build_noisy_support(spec, noise), InputState(), noise.delta)
        mismatches = []
        for c, r in zip(clones, report.clones):
            c["F_h_pipeline"] = r.fidelity
            if abs(c["F_h"] - r.fidelity) > 1e-9:
                mismatches.append({"h": c["h"], "closed": c["F_h"], "pipeline": r.fidelity})
        if mismatches:
            raise CheckFailure("closed-form and pipeline fidelities disagree", {"mismatches": mismatches})
        result["verified"] = True
    if cfg["format"] == "csv":
        return to_csv(["h", "n_h", "F_h"], [[c["h"], c["n_h"], c["F_h"]] for c in clones])
    return to_json(result)


def _tradeoff_row_m2(f2):
    f1 = tradeoff_m2(f2)
    if f2 >= 1:
        return [f2, f1, math.inf, math.inf, 0.0, True]
    n2 = 1.0 / f2 - 1.0
    res = n1_min_closed([n2])
    n1_photons, n2_photons = res.support.photon_numbers if res.support else (math.nan, math.nan)
    return [f2, f1, res.N0_opt, n1_photons, n2_photons, True]


def _tradeoff_row_m3(f2, f3):
    try:
        f1, support = f1_max_tradeoff_m3(f2, f3)
    except InfeasibleError:
        return [f2, f3, math.nan, math.nan, math.nan, math.nan, math.nan, False]
    return [f2, f3, f1, support.n0, *support.photon_numbers, True]


def cmd_tradeoff(cfg) -> str:
    ms = _ints(cfg["m"]) if cfg["m"] is not None else [2]
    if len(ms) != 1:
        raise InvalidArgumentError("tradeoff takes a single m")
    m = ms[0]
    if m == 2:
        _check_sweep_vars(cfg, {"F2"})
        rows = [_tradeoff_row_m2(float(f)) for f in _sweep_for(cfg, "F2", "F2:0.5:1:51")]
        return _table(cfg, ["F2", "F1_max", "N0_opt", "N1", "N2", "feasible"], rows)
    if m == 3:
        _check_sweep_vars(cfg, {"F2", "F3"})
        f2s = _sweep_for(cfg, "F2", "F2:0.51:0.99:25")
        f3s = _sweep_for(cfg, "F3", "F3:0.51:0.99:25")
        rows = [_tradeoff_row_m3(float(a), float(b)) for a in f2s for b in f3s]
        return _table(cfg, ["F2", "F3", "F1_max", "N0_opt", "N1", "N2", "N3", "feasible"], rows)
    if m < 2:
        raise InvalidArgumentError("tradeoff needs m >= 2")
    # m >= 4: the other m - 1 clones share one fixed fidelity
    _check_sweep_vars(cfg, {"F"})
    rows = []
    for f in _sweep_for(cfg, "F", "F:0.51:0.99:25"):
        f = float(f)
        res = n1_min_closed([1.0 / f - 1.0] * (m - 1), strict=False)
        rows.append([f, res.F1_max, res.N0_opt, res.feasible, res.attainable])
    return _table(cfg, ["F_other", "F1_max", "N0_opt", "feasible", "attainable"], rows)


def cmd_optimize(cfg) -> str:
    _check_sweep_vars(cfg, {"tauT"})
    ms = _ints(cfg["m"]) if cfg["m"] is not None else [2]
    base = _noise({**cfg, "tau0": 0.0, "tauc": 0.0, "tauT": None})
    taus = _sweep_for(cfg, "tauT", "tauT:0:4:81")

    def row(item):
        m, tau_t = item
        noise = NoiseParams(base.nu, base.mu, 0.0, float(tau_t), base.delta)
        best = optimize_symmetric_closed(noise, m)
        baselines = baseline_fidelities(noise, m)
        if cfg["verify"]:
            numeric = optimize_symmetric_numeric(noise, m)
            if abs(numeric.F_max - best.F_max) > 1e-6:
                raise CheckFailure("closed-form and numeric optima disagree",
                                   {"m": m, "tau_T": float(tau_t), "closed": best.F_max,
                                    "numeric": numeric.F_max})
        return [m, float(tau_t), best.F_max, baselines.F_tau0_zero, baselines.F_midpoint,
                best.regime.value, best.tau0_opt, best.N_opt]

    rows = _parallel_map(row, [(m, t) for m in ms for t in taus])
    header = ["m", "tau_T", "F_opt", "F_tau0_zero", "F_midpoint", "regime", "tau0_opt", "N_opt"]
    return _table(cfg, header, rows)


def cmd_montecarlo(cfg) -> str:
    samples = int(cfg["samples"])
    if samples < 1000:
        raise InvalidArgumentError(f"montecarlo needs at least 1000 samples, got {samples}")
    spec = _spec(cfg)
    noise = _noise(cfg)
    try:
        alpha = complex(str(cfg["alpha"]).replace(" ", ""))
    except ValueError:
        raise InvalidArgumentError(f"bad complex amplitude {cfg['alpha']!r}") from None
    support = GaussianState(build_noisy_support(spec, noise))
    rep = monte_carlo_protocol(support, InputState(alpha), noise.delta, samples, int(cfg["seed"]))
    result = {
        "seed": rep.seed,
        "samples": rep.samples,
        "photons": list(spec.photon_numbers),
        "analytic": {"mean": rep.analytic.output.mean, "cov": rep.analytic.output.cm.matrix,
                     "fidelities": rep.analytic.fidelities},
        "empirical": {"mean": rep.mean, "cov": rep.cov},
        "stderr": {"mean": rep.mean_stderr, "cov": rep.cov_stderr},
        "z": {"mean": rep.mean_z, "cov": rep.cov_z, "max_abs": rep.max_abs_z},
        "outcome": {"z_mean": [rep.outcome_z_mean.real, rep.outcome_z_mean.imag],
                    "z_var": list(rep.outcome_z_var), "z_var_expected": 0.5 * rep.analytic.outcome_cov[0, 0]},
    }
    if cfg["verify"] and rep.max_abs_z >= 5:
        raise CheckFailure("sampled moments deviate by 5 standard errors or more", {"max_abs_z": rep.max_abs_z})
    return to_json(result)


COMMANDS = {
    "thresholds": (cmd_thresholds, "csv"),
    "clone": (cmd_clone, "json"),
    "tradeoff": (cmd_tradeoff, "csv"),
    "optimize": (cmd_optimize, "csv"),
    "montecarlo": (cmd_montecarlo, "json"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvtc", description=__doc__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--m", help="number of clones (comma list for optimize)")
    parser.add_argument("--photons", help="support photon numbers N1,...,Nm")
    parser.add_argument("--nu", type=float, help="generation thermal photons")
    parser.add_argument("--mu", type=float, help="channel thermal photons")
    parser.add_argument("--tau0", type=float, help="effective time of mode a0")
    parser.add_argument("--tauc", type=float, help="effective time of the clone modes")
    parser.add_argument("--tauT", type=float, help="total line time (sets tauc = tauT - tau0)")
    parser.add_argument("--delta", type=float, help="detection noise (1 - eta)/eta")
    parser.add_argument("--gamma", type=float, help="loss rate for thresholds")
    parser.add_argument("--alpha", help="input coherent amplitude, e.g. 1+0.5j")
    parser.add_argument("--sweep", action="append", help="var:start:stop:steps (repeatable)")
    parser.add_argument("--preset", choices=sorted(PRESETS))
    parser.add_argument("--config", help="JSON file with default flag values")
    parser.add_argument("--verify", action="store_true", default=None, help="cross-check against an oracle")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--out", help="write output here instead of stdout")
    parser.add_argument("--format", choices=["csv", "json"])
    return parser


def _emit(text: str, path) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    func, default_format = COMMANDS[args.command]
    try:
        cfg = resolve_config(args)
        cfg["format"] = cfg["format"] or default_format
        out = func(cfg)
    except CheckFailure as exc:
        _emit(to_json({"error": "cross-check-failed", "message": str(exc), **exc.payload}), None)
        return EXIT_CHECK
    except (InvalidArgumentError, InfeasibleError, UnsupportedInputError) as exc:
        kind = "infeasible" if isinstance(exc, InfeasibleError) else "invalid-argument"
        _emit(to_json({"error": kind, "message": str(exc)}), None)
        return EXIT_INPUT
    _emit(out, cfg["out"])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
