"""Command-line surface.

Subcommands: check, bound, phase-limit, search, simulate, lyapunov,
power, sweep, reproduce. Systems are described by JSON config files;
flags override selected fields. Exit codes form a stable contract:
0 = positive verdict / success, 1 = analytic negative (not suitable,
phase limitation found, divergent simulation, ...), 2 = usage or
configuration error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .analysis import (
    CHANNELS,
    all_period_test,
    build_grid,
    gain_bound,
    gain_bound_table,
    lp_feasibility_test,
    phase_gap_test,
    rational_phase_limit,
    search_multiplier,
    suitability,
)
from .errors import (
    CertificationError,
    ConfigError,
    EmptyRange,
    UnknownExperiment,
    UnstablePlant,
)
from .experiments import list_experiments, run_experiment
from .lti import (
    RationalTransferFunction,
    StateSpaceRealization,
    eval_frequency_response,
    stability_report,
    to_state_space,
)
from .multipliers import TapMultiplier, identity_multiplier, multiplier_from_dict
from .simulation import (
    NonlinearitySpec,
    SinusoidForcing,
    decompose_periodic,
    lyapunov_exponent,
    power_seminorm_periodic,
    power_seminorm_tail,
    simulate_continuous,
    simulate_discrete,
    spectrum,
)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2


# --- serialization helpers ---

def _plain(obj):
    """Recursively convert results to JSON-friendly built-ins."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def _dump_json(payload) -> str:
    return json.dumps(_plain(payload), indent=2, sort_keys=True) + "\n"


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else repr(v) if isinstance(v, float) else v
                         for v in row])
    return buf.getvalue()


class _Emitter:
    """Routes command output to stdout and/or --out DIR with a manifest."""

    def __init__(self, args, command: str, resolved: dict):
        self.format = getattr(args, "format", "text")
        self.out = getattr(args, "out", None)
        self.command = command
        self.resolved = resolved
        self.files: dict[str, str] = {}

    def add_file(self, name: str, content: str) -> None:
        self.files[name] = content

    def finish(self, payload: dict, text_lines: Sequence[str],
               csv_data: tuple[Sequence[str], Sequence[Sequence[object]]] | None = None) -> None:
        if self.format == "json":
            body = _dump_json(payload)
        elif self.format == "csv":
            if csv_data is None:
                raise ConfigError(f"{self.command}: no CSV form; use --format json or text")
            body = _csv_text(*csv_data)
        else:
            body = "\n".join(text_lines) + "\n"
        if self.out is None:
            sys.stdout.write(body)
            return
        out_dir = Path(self.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        ext = {"json": "json", "csv": "csv", "text": "txt"}[self.format]
        self.files.setdefault(f"{self.command}.{ext}", body)
        manifest = {
            "command": self.command,
            **self.resolved,
            "outputs": sorted(self.files),
            "version": __version__,
        }
        for name, content in self.files.items():
            (out_dir / name).write_text(content)
        (out_dir / "manifest.json").write_text(_dump_json(manifest))
        sys.stdout.write("\n".join(text_lines) + "\n")
        sys.stdout.write(f"wrote {len(self.files) + 1} file(s) under {out_dir}\n")


# --- config loading ---

def _load_config(path: str | None) -> dict:
    if path is None:
        raise ConfigError("this command requires --config PATH")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror or exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top-level value must be an object")
    return cfg


def _cfg_field(cfg: dict, key: str) -> dict:
    try:
        val = cfg[key]
    except KeyError:
        raise ConfigError(f"config is missing the {key!r} field") from None
    if not isinstance(val, dict):
        raise ConfigError(f"config field {key!r} must be an object")
    return val


def _plant(cfg: dict, args) -> RationalTransferFunction:
    d = _cfg_field(cfg, "plant")
    try:
        tf = RationalTransferFunction.from_dict(d)
    except (ConfigError, TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"plant: {exc}") from None
    gain = getattr(args, "gain", None)
    if gain is not None:
        tf = tf.with_gain(gain)
    return tf


def _slope_bound(cfg: dict, args) -> float:
    k = getattr(args, "k", None)
    if k is None:
        k = cfg.get("k", math.inf)
    if isinstance(k, str):
        if k not in ("inf", "Infinity"):
            raise ConfigError(f"k: expected a number or 'inf', got {k!r}")
        k = math.inf
    k = float(k)
    if not (k > 0):
        raise ConfigError("k must be positive (use 'inf' for no slope bound)")
    return k


def _multiplier(cfg: dict, domain: str):
    d = cfg.get("multiplier")
    if d is None:
        return identity_multiplier(domain)
    if not isinstance(d, dict):
        raise ConfigError("config field 'multiplier' must be an object")
    try:
        return multiplier_from_dict(d)
    except (ConfigError, TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"multiplier: {exc}") from None


def _nonlinearity(cfg: dict) -> NonlinearitySpec:
    d = _cfg_field(cfg, "nonlinearity")
    try:
        return NonlinearitySpec.from_dict(d)
    except (ConfigError, TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"nonlinearity: {exc}") from None


def _realization(cfg: dict, tf: RationalTransferFunction,
                 args=None) -> StateSpaceRealization:
    d = cfg.get("realization")
    if d is None:
        return to_state_space(tf)
    if args is not None and getattr(args, "gain", None) is not None:
        raise ConfigError(
            "--gain cannot override an explicit realization; "
            "edit the realization or drop it from the config"
        )
    try:
        return StateSpaceRealization(
            A=np.asarray(d["A"], dtype=float),
            B=np.asarray(d["B"], dtype=float),
            C=np.asarray(d["C"], dtype=float),
            D=float(d.get("D", 0.0)),
            domain=tf.domain,
        )
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"realization: {exc}") from None


def _forcing(cfg: dict, key: str, domain: str, default):
    val = cfg.get(key, default)
    if val is None:
        return None
    if domain == "z":
        if isinstance(val, (int, float)):
            return (float(val),)
        if isinstance(val, (list, tuple)):
            return tuple(float(v) for v in val)
        raise ConfigError(f"{key}: discrete forcing must be a number or a periodic table")
    if isinstance(val, dict):
        try:
            return SinusoidForcing(
                const=float(val.get("const", 0.0)),
                amp=float(val.get("amp", 0.0)),
                freq=float(val.get("freq", 0.0)),
                phase=float(val.get("phase", 0.0)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: {exc}") from None
    if isinstance(val, (int, float)):
        return SinusoidForcing(const=float(val))
    raise ConfigError(f"{key}: continuous forcing must be a number or a sinusoid object")


def _x0(cfg: dict, order: int) -> np.ndarray:
    val = cfg.get("x0")
    if val is None:
        return np.zeros(order)
    arr = np.asarray(val, dtype=float)
    if arr.shape != (order,):
        raise ConfigError(f"x0: expected {order} entries, got shape {arr.shape}")
    return arr


def _check_stable(tf: RationalTransferFunction) -> None:
    rep = stability_report(tf)
    if rep.verdict == "unstable":
        raise UnstablePlant(
            f"plant is unstable ({rep.verdict}); certification does not apply"
        )


def _parse_period(text: str) -> float:
    t = text.strip().lower()
    if t.endswith("pi"):
        head = t[:-2].strip()
        scale = 1.0 if head in ("", "+") else float(head)
        val = scale * math.pi
    else:
        val = float(t)
    if not (val > 0) or not math.isfinite(val):
        raise ConfigError(f"period must be positive and finite, got {text!r}")
    return val


def _resolved(cfg: dict, args, **extra) -> dict:
    # effective config: the file contents with CLI overrides applied
    eff = dict(cfg)
    gain = getattr(args, "gain", None)
    if gain is not None and isinstance(eff.get("plant"), dict):
        eff["plant"] = {**eff["plant"], "g": gain}
    if getattr(args, "k", None) is not None:
        eff["k"] = args.k
    options: dict = {"config_file": getattr(args, "config", None)}
    for name in ("gain", "k", "grid_density", "seed", "table1_variant",
                 "channel", "side", "format"):
        val = getattr(args, name, None)
        if val is not None:
            options[name] = val
    options.update(extra)
    return _plain({"config": eff, "options": options})


# --- subcommands ---

def cmd_check(args) -> int:
    cfg = _load_config(args.config)
    tf = _plant(cfg, args)
    _check_stable(tf)
    k = _slope_bound(cfg, args)
    mult = _multiplier(cfg, tf.domain)
    grid = build_grid(tf, k=k, density=args.grid_density)
    res = suitability(tf, mult, k=k, grid=grid)
    payload = {"command": "check", "result": _plain(res)}
    lines = [
        f"verdict: {'suitable' if res.suitable else 'not suitable'}",
        f"margin: {res.margin:.9g}",
        f"w-at-min: {res.w_at_min:.9g}",
        f"k: {res.k:g}",
        f"grid-points: {res.grid_points}",
    ]
    csv_data = (
        ["suitable", "margin", "w_at_min", "k", "grid_points"],
        [[res.suitable, res.margin, res.w_at_min, res.k, res.grid_points]],
    )
    _Emitter(args, "check", _resolved(cfg, args)).finish(payload, lines, csv_data)
    return EXIT_OK if res.suitable else EXIT_NEGATIVE


def cmd_bound(args) -> int:
    cfg = _load_config(args.config)
    tf = _plant(cfg, args)
    _check_stable(tf)
    k = _slope_bound(cfg, args)
    mult = _multiplier(cfg, tf.domain)
    grid = build_grid(tf, k=k, density=args.grid_density)
    if args.channel == "all":
        results = gain_bound_table(tf, mult, k=k, grid=grid,
                                   variant=args.table1_variant)
    else:
        results = {args.channel: gain_bound(tf, mult, k=k, channel=args.channel,
                                            grid=grid, variant=args.table1_variant)}
    payload = {"command": "bound", "results": _plain(results)}
    lines = []
    rows = []
    for ch, r in results.items():
        lines.append(
            f"{ch}: bound={r.bound:.9g} w-at-sup={r.w_at_sup:.9g}"
            f"{' (floor active)' if r.floor_active else ''}"
        )
        rows.append([ch, r.bound, r.w_at_sup, r.floor_active, r.residual, r.margin])
    csv_data = (["channel", "bound", "w_at_sup", "floor_active", "residual", "margin"], rows)
    _Emitter(args, "bound", _resolved(cfg, args)).finish(payload, lines, csv_data)
    return EXIT_OK


def cmd_phase_limit(args) -> int:
    cfg = _load_config(args.config)
    tf = _plant(cfg, args)
    _check_stable(tf)
    k = _slope_bound(cfg, args)
    period = _parse_period(args.period) if args.period is not None else None
    if args.test != "all-period" and period is None:
        raise ConfigError(f"--period is required for the {args.test!r} test")

    if args.test == "rational":
        res = rational_phase_limit(tf, period, k=k, b_max=args.b_max, a_max=args.a_max)
        negative = res.witness
        lines = [f"test: rational", f"witness: {str(res.witness).lower()}"]
        for wit in res.witnesses[:5]:
            lines.append(
                f"  a={wit.a} b={wit.b} w={wit.w:.9g} phase={wit.phase:.6g}"
                f" threshold={wit.threshold:.6g}"
            )
        verdict = ("phase limitation found: no suitable multiplier of this period exists"
                   if negative else "no phase limitation detected")
    elif args.test == "gap":
        res = phase_gap_test(tf, period, n_max=args.n_max)
        negative = res.witness
        lines = [
            f"test: gap",
            f"witness: {str(res.witness).lower()}",
            f"gap: {res.gap:.9g} at w={res.w:.9g} (n={res.n})",
            f"phase-span: {res.phase_span:.9g}",
        ]
        verdict = ("phase limitation found: no suitable multiplier of this period exists"
                   if negative else "no phase limitation detected")
    elif args.test == "all-period":
        res = all_period_test(tf, k=k)
        negative = not res.passes
        lines = [
            f"test: all-period",
            f"passes: {str(res.passes).lower()}",
            f"max-abs-phase: {res.max_abs_phase:.9g} at w={res.w_at_max:.9g}",
        ]
        verdict = ("phase stays within +/- pi/2: suitable multipliers may exist at every period"
                   if res.passes else "phase leaves +/- pi/2")
    else:
        if args.beta is None or args.p_signs is None or args.n_indices is None:
            raise ConfigError("the lp test requires --beta, --p-signs and --n-indices")
        p_signs = _int_list(args.p_signs, "--p-signs")
        n_indices = _int_list(args.n_indices, "--n-indices")
        res = lp_feasibility_test(tf, period, args.beta, p_signs, n_indices,
                                  k=k, l_max=args.l_max, scaling=args.lp_scaling)
        negative = not res.feasible
        lines = [
            f"test: lp",
            f"feasible: {str(res.feasible).lower()}",
            f"frequencies: {', '.join(f'{w:.6g}' for w in res.frequencies)}",
        ]
        verdict = ("index set admits the required sign pattern" if res.feasible
                   else "phase limitation found: index-set constraints are infeasible")
    lines.append(verdict)
    payload = {"command": "phase-limit", "test": args.test, "result": _plain(res)}
    _Emitter(args, "phase-limit", _resolved(cfg, args, test=args.test,
                                            period=period)).finish(payload, lines)
    return EXIT_NEGATIVE if negative else EXIT_OK


def _int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ConfigError(f"{flag}: expected comma-separated integers, got {text!r}") from None


def cmd_search(args) -> int:
    cfg = _load_config(args.config)
    tf = _plant(cfg, args)
    _check_stable(tf)
    k = _slope_bound(cfg, args)
    grid = build_grid(tf, k=k, density=args.grid_density)
    res = search_multiplier(tf, k=k, side=args.side, channel=args.channel,
                            grid=grid, variant=args.table1_variant)
    taps = list(res.multiplier.taps)
    payload = {"command": "search", "result": _plain(res)}
    lines = [
        f"multiplier: 1 - sum c_i z^-offset_i with taps {taps}",
        f"bound: {res.bound:.9g}",
        f"margin: {res.margin:.9g}",
        f"side: {res.side}",
        f"candidates-checked: {res.candidates_checked}",
    ]
    csv_data = (
        ["offset", "coefficient"],
        [[off, c] for off, c in taps],
    )
    _Emitter(args, "search", _resolved(cfg, args)).finish(payload, lines, csv_data)
    return EXIT_OK


def _run_simulation(cfg: dict, args):
    tf = _plant(cfg, args)
    ss = _realization(cfg, tf, args)
    nl = _nonlinearity(cfg)
    x0 = _x0(cfg, ss.order)
    if tf.domain == "z":
        r2 = _forcing(cfg, "r2", "z", (0.0,))
        r1 = _forcing(cfg, "r1", "z", (0.0,))
        steps = args.steps if args.steps is not None else cfg.get("steps")
        if steps is None:
            raise ConfigError("discrete simulation requires --steps or a 'steps' field")
        res = simulate_discrete(ss, nl, r2, int(steps), r1=r1, x0=x0)
        times = np.arange(int(steps), dtype=float)
        return "z", res, times
    r2 = _forcing(cfg, "r2", "s", {"amp": 0.0})
    r1 = _forcing(cfg, "r1", "s", {"amp": 0.0})
    t_span = args.t_span if args.t_span is not None else cfg.get("t_span")
    if t_span is None:
        raise ConfigError("continuous simulation requires --t-span or a 't_span' field")
    h = args.h if args.h is not None else float(cfg.get("h", 1e-3))
    res = simulate_continuous(
        ss, nl, r2, t_span=float(t_span), h=h, r1=r1, x0=x0,
        record_from_time=args.record_from, record_every=args.record_every,
    )
    return "s", res, res.times


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    domain, res, times = _run_simulation(cfg, args)
    n = len(res.y2)
    header = ["time", "y1", "y2", "u1", "u2"]
    rows = [
        [float(times[i]), float(res.y1[i]), float(res.y2[i]),
         float(res.u1[i]), float(res.u2[i])]
        for i in range(n)
    ]
    payload = {
        "command": "simulate",
        "domain": domain,
        "samples": n,
        "x_final": _plain(res.x_final),
        "traces": {
            "time": _plain(times), "y1": _plain(res.y1), "y2": _plain(res.y2),
            "u1": _plain(res.u1), "u2": _plain(res.u2),
        },
    }
    lines = [
        f"samples: {n}",
        f"x-final: {_plain(res.x_final)}",
        f"max-abs-y2: {float(np.max(np.abs(res.y2))):.9g}",
    ]
    emitter = _Emitter(args, "simulate", _resolved(cfg, args))
    if emitter.out is not None:
        emitter.add_file("traces.csv", _csv_text(header, rows))
    emitter.finish(payload, lines, (header, rows))
    return EXIT_OK


def cmd_lyapunov(args) -> int:
    cfg = _load_config(args.config)
    tf = _plant(cfg, args)
    if tf.domain != "z":
        raise ConfigError("lyapunov estimation is defined for discrete plants")
    ss = _realization(cfg, tf, args)
    nl = _nonlinearity(cfg)
    r2 = _forcing(cfg, "r2", "z", (0.0,))
    lam = lyapunov_exponent(ss, nl, r2, args.steps, discard=args.discard, d0=args.d0)
    payload = {
        "command": "lyapunov",
        "exponent": lam,
        "steps": args.steps,
        "discard": args.discard,
        "d0": args.d0,
    }
    lines = [
        f"lyapunov-exponent: {lam:.9g}",
        f"steps: {args.steps} (discard {args.discard})",
        "interpretation: positive means chaotic divergence of nearby states",
    ]
    csv_data = (["exponent", "steps", "discard", "d0"],
                [[lam, args.steps, args.discard, args.d0]])
    _Emitter(args, "lyapunov", _resolved(cfg, args)).finish(payload, lines, csv_data)
    return EXIT_OK


def cmd_power(args) -> int:
    cfg = _load_config(args.config)
    domain, res, times = _run_simulation(cfg, args)
    sig = {"y1": res.y1, "y2": res.y2, "u1": res.u1, "u2": res.u2}[args.signal]
    payload: dict = {"command": "power", "signal": args.signal, "samples": len(sig)}
    lines = [f"signal: {args.signal}", f"samples: {len(sig)}"]
    rows = []
    if args.period_samples is not None:
        p = power_seminorm_periodic(sig, args.period_samples)
        payload["power"] = p
        lines.append(f"power-seminorm: {p:.9g} (periodic, {args.period_samples} samples)")
        rows.append(["power", p])
        if args.decompose:
            dec = decompose_periodic(sig, args.period_samples)
            payload["periodic_power"] = dec.periodic_power
            payload["residual_power"] = dec.residual_power
            payload["periods"] = dec.periods
            lines.append(f"periodic-part-power: {dec.periodic_power:.9g}")
            lines.append(f"residual-part-power: {dec.residual_power:.9g}")
            rows.append(["periodic_power", dec.periodic_power])
            rows.append(["residual_power", dec.residual_power])
    else:
        p = power_seminorm_tail(sig, settle_tol=args.settle_tol)
        payload["power"] = p
        lines.append(f"power-seminorm: {p:.9g} (settled tail)")
        rows.append(["power", p])
    emitter = _Emitter(args, "power", _resolved(cfg, args))
    if args.spectrum is not None:
        window = sig[-args.spectrum:]
        sp = spectrum(window)
        spec_rows = [
            [kk, float(sp.frequencies[kk]), float(sp.magnitudes[kk])]
            for kk in range(len(sp.magnitudes))
        ]
        payload["spectrum"] = {
            "n_samples": sp.n_samples,
            "parseval_residual": sp.parseval_residual,
        }
        lines.append(f"spectrum: {len(sp.magnitudes)} bins over {sp.n_samples} samples")
        if emitter.out is not None:
            emitter.add_file("spectrum.csv",
                             _csv_text(["bin", "frequency", "magnitude"], spec_rows))
        else:
            payload["spectrum"]["magnitudes"] = _plain(sp.magnitudes)
    emitter.finish(payload, lines, (["quantity", "value"], rows))
    return EXIT_OK


def _sweep_values(args) -> list[float]:
    if args.values is not None:
        try:
            vals = [float(tok) for tok in args.values.split(",") if tok.strip() != ""]
        except ValueError:
            raise ConfigError(f"--values: expected comma-separated numbers") from None
    else:
        if args.start is None or args.stop is None or args.step is None:
            raise ConfigError("sweep requires --values or all of --start/--stop/--step")
        if args.step <= 0:
            raise ConfigError("--step must be positive")
        vals = []
        v = args.start
        while v <= args.stop + 1e-12:
            vals.append(round(v, 12))
            v = args.start + (len(vals)) * args.step
    if not vals:
        raise EmptyRange("sweep range contains no points")
    return vals


def _scaled_taps(mult, scale_offsets=None, set_coefficient=None) -> TapMultiplier:
    if not isinstance(mult, TapMultiplier):
        raise ConfigError("theta/coefficient sweeps require a tap multiplier")
    taps = []
    for off, c in mult.taps:
        if scale_offsets is not None:
            off = off * scale_offsets
        if set_coefficient is not None:
            c = math.copysign(set_coefficient, c)
        taps.append((off, c))
    return TapMultiplier(mult.domain, tuple(taps))


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    tf = _plant(cfg, args)
    _check_stable(tf)
    k = _slope_bound(cfg, args)
    mult = _multiplier(cfg, tf.domain)
    values = _sweep_values(args)
    param = args.parameter

    if param == "frequency":
        warr = np.asarray(values, dtype=float)
        resp = eval_frequency_response(tf, warr) + (0.0 if math.isinf(k) else 1.0 / k)
        rows = [[v, float(np.angle(resp[i])), float(np.abs(resp[i]))]
                for i, v in enumerate(values)]
        header = ["w", "phase", "magnitude"]
    else:
        rows = []
        header = [param, "margin", "suitable"]
        if args.metric == "bound":
            header = [param, "margin", "suitable", "bound"]
        base_grid = None
        if param in ("theta", "coefficient"):
            base_grid = build_grid(tf, k=k, density=args.grid_density)
        for v in values:
            tf_i, mult_i = tf, mult
            if param == "gain":
                tf_i = tf.with_gain(v)
                grid = build_grid(tf_i, k=k, density=args.grid_density)
            else:
                grid = base_grid
                if param == "theta":
                    mult_i = _scaled_taps(mult, scale_offsets=v)
                else:
                    mult_i = _scaled_taps(mult, set_coefficient=v)
            s = suitability(tf_i, mult_i, k=k, grid=grid)
            row = [v, s.margin, s.suitable]
            if args.metric == "bound":
                if s.suitable:
                    b = gain_bound(tf_i, mult_i, k=k, channel=args.channel,
                                   grid=grid, variant=args.table1_variant,
                                   presuitability=s)
                    row.append(b.bound)
                else:
                    row.append(None)
            rows.append(row)
        if args.metric == "phase":
            raise ConfigError("metric 'phase' is only defined for --parameter frequency")
    payload = {"command": "sweep", "parameter": param, "metric": args.metric,
               "header": header, "rows": _plain(rows)}
    lines = [",".join(header)] + [",".join(str(x) for x in r) for r in rows]
    emitter = _Emitter(args, "sweep", _resolved(
        cfg, args, parameter=param, metric=args.metric, values=values))
    if emitter.out is not None:
        emitter.add_file("sweep.csv", _csv_text(header, rows))
    emitter.finish(payload, lines, (header, rows))
    return EXIT_OK


def cmd_reproduce(args) -> int:
    if args.all:
        names = list_experiments()
    elif args.name:
        names = [args.name]
    else:
        raise ConfigError("reproduce requires an experiment name or --all")
    reports = [run_experiment(name) for name in names]
    all_pass = all(rep.passed for rep in reports)
    lines = []
    for rep in reports:
        lines.append(f"experiment: {rep.name}")
        n_pass = 0
        n_xfail = 0
        for row in rep.rows:
            if row.passed:
                flag = "PASS"
                n_pass += 1
            elif row.expected_fail:
                flag = "XFAIL"
                n_xfail += 1
            else:
                flag = "FAIL"
            detail = f"value={row.value}"
            if row.expected is not None:
                detail += f" expected={row.expected}"
            if row.tol is not None:
                detail += f" tol={row.tol:g}"
            lines.append(f"  [{flag}] {row.quantity}: {detail} [{row.provenance}]")
        summary = f"{n_pass}/{len(rep.rows)} rows pass"
        if n_xfail:
            summary += f", {n_xfail} expected failure(s)"
        lines.append(f"result: {'PASS' if rep.passed else 'FAIL'} ({summary})")
        lines.append("")
    payload = {"command": "reproduce",
               "reports": [rep.to_dict() for rep in reports],
               "passed": all_pass}
    emitter = _Emitter(args, "reproduce", _plain({
        "experiments": names,
        "seed": getattr(args, "seed", None),
    }))
    if emitter.out is not None:
        for rep in reports:
            emitter.add_file(f"{rep.name}.json", _dump_json(rep.to_dict()))
    rows = []
    for rep in reports:
        for row in rep.rows:
            rows.append([rep.name, row.quantity, row.passed, row.provenance,
                         str(row.value), str(row.expected) if row.expected is not None else None])
    emitter.finish(payload, [ln for ln in lines if ln != ""] or ["no experiments"],
                   (["experiment", "quantity", "passed", "provenance", "value", "expected"], rows))
    return EXIT_OK if all_pass else EXIT_NEGATIVE


# --- parser ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="luryecert",
        description="Stability certificates and simulations for Lurye feedback loops",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--out", metavar="DIR", default=None,
                        help="write outputs plus manifest.json under this directory")
    common.add_argument("--seed", type=int, default=None, metavar="U64",
                        help="recorded in the manifest for provenance")

    system = argparse.ArgumentParser(add_help=False)
    system.add_argument("--config", metavar="PATH", required=True,
                        help="JSON system description")
    system.add_argument("--gain", type=float, default=None,
                        help="override the plant gain from the config")
    system.add_argument("--k", type=float, default=None,
                        help="override the slope bound (inf allowed)")
    system.add_argument("--grid-density", type=float, default=1.0, metavar="N")

    variant = argparse.ArgumentParser(add_help=False)
    variant.add_argument("--table1-variant", choices=("printed", "eq21"),
                         default="printed")

    p = sub.add_parser("check", parents=[common, system],
                       help="suitability of a multiplier for a plant")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bound", parents=[common, system, variant],
                       help="closed-form gain bounds per channel")
    p.add_argument("--channel", choices=CHANNELS + ("all",), default="r2->y2")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("phase-limit", parents=[common, system],
                       help="phase-limitation tests ruling out whole multiplier classes")
    p.add_argument("--test", choices=("rational", "gap", "all-period", "lp"),
                   default="rational")
    p.add_argument("--period", default=None,
                   help="excitation period; accepts forms like 3.14, pi, 2pi")
    p.add_argument("--b-max", type=int, default=12)
    p.add_argument("--a-max", type=int, default=12)
    p.add_argument("--n-max", type=int, default=5, help="gap test: harmonic shifts tried")
    p.add_argument("--beta", type=int, default=None, help="lp test: index-set size")
    p.add_argument("--p-signs", default=None, help="lp test: comma-separated 0/1 list")
    p.add_argument("--n-indices", default=None, help="lp test: comma-separated integers")
    p.add_argument("--l-max", type=int, default=50)
    p.add_argument("--lp-scaling", choices=("printed", "lattice"), default="printed")
    p.set_defaults(func=cmd_phase_limit)

    p = sub.add_parser("search", parents=[common, system, variant],
                       help="best single-tap multiplier over the coefficient grid")
    p.add_argument("--side", choices=("causal", "anticausal", "both"), default="both")
    p.add_argument("--channel", choices=CHANNELS, default="r2->y2")
    p.set_defaults(func=cmd_search)

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--steps", type=int, default=None, help="discrete horizon")
    sim.add_argument("--t-span", type=float, default=None, help="continuous horizon")
    sim.add_argument("--h", type=float, default=None, help="integration step")
    sim.add_argument("--record-from", type=float, default=None,
                     help="continuous: discard samples before this time")
    sim.add_argument("--record-every", type=int, default=1)

    p = sub.add_parser("simulate", parents=[common, system, sim],
                       help="run the closed loop and emit traces")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("lyapunov", parents=[common, system],
                       help="two-trajectory Lyapunov exponent estimate")
    p.add_argument("--steps", type=int, default=1_000_000)
    p.add_argument("--discard", type=int, default=1000)
    p.add_argument("--d0", type=float, default=1e-8)
    p.set_defaults(func=cmd_lyapunov)

    p = sub.add_parser("power", parents=[common, system, sim],
                       help="power seminorms, periodic splits, spectra")
    p.add_argument("--signal", choices=("y1", "y2", "u1", "u2"), default="y2")
    p.add_argument("--period-samples", type=int, default=None)
    p.add_argument("--decompose", action="store_true",
                   help="split into periodic part and residual")
    p.add_argument("--settle-tol", type=float, default=0.05)
    p.add_argument("--spectrum", type=int, default=None, metavar="N",
                   help="emit an N-sample FFT magnitude table (N a power of two)")
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("sweep", parents=[common, system, variant],
                       help="per-point metric curve over a parameter range")
    p.add_argument("--parameter", choices=("gain", "coefficient", "theta", "frequency"),
                   required=True)
    p.add_argument("--metric", choices=("margin", "bound", "phase"), default="margin")
    p.add_argument("--channel", choices=CHANNELS, default="r2->y2")
    p.add_argument("--start", type=float, default=None)
    p.add_argument("--stop", type=float, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--values", default=None, help="comma-separated explicit points")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("reproduce", parents=[common],
                       help="run a registered experiment and compare to expected values")
    p.add_argument("name", nargs="?", default=None)
    p.add_argument("--all", action="store_true")
    p.add_argument("--list", action="store_true", dest="list_names",
                   help="list registered experiment names")
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return EXIT_USAGE if code not in (0, None) else 0
    if getattr(args, "list_names", False):
        for name in list_experiments():
            print(name)
        return EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, UnknownExperiment, EmptyRange) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CertificationError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
