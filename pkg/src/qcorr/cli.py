"""Batch command-line front end.

Reports go to stdout as JSON (default) or CSV. Exit status: 0 on success,
1 on input errors, 2 on internal numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import sys
import time
from typing import Any, Callable, Sequence

import numpy as np

from . import discord, info, metrology, operational
from .errors import NumericalError, QcorrError
from .io import load_state, state_from_preset
from .optimize import OptimizerConfig

SWEEP_HEADER = ["family", "param", "measure", "value", "side", "starts", "evaluations", "spread", "seed"]
RECORD_HEADER = ["command", "state", "measure", "value", "side", "starts", "evaluations", "spread", "seed"]

SWEEP_FAMILIES = {"werner": "werner:p={}", "pure": "pure:theta={}", "product": "product:a={}"}


class InputError(QcorrError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _num(x: float) -> float | str:
    x = float(x)
    if math.isinf(x) and x > 0:
        return "inf"
    if not math.isfinite(x):
        raise NumericalError(f"non-finite value {x!r} in report")
    return float(f"{x:.12g}")


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _spectrum(text: str | None):
    if not text:
        return None
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"--spectrum must be a comma-separated list of reals, got {text!r}") from None


def _config(args) -> OptimizerConfig:
    cfg = OptimizerConfig(seed=args.seed)
    if args.starts is not None:
        cfg = cfg.with_(starts=args.starts)
    if args.grid is not None:
        cfg = cfg.with_(grid=(args.grid, 2 * args.grid))
    return cfg


# -- measures -----------------------------------------------------------------
# Each returns (value, side, diagnostics, extra values).

Measure = Callable[[Any, argparse.Namespace, OptimizerConfig], tuple]


def _report(r: discord.MeasureReport, extra=None):
    vals = dict(extra or {})
    for k, v in r.extras.items():
        if isinstance(v, (int, float)) and k != "fragments":
            vals[k] = v
    return r.value, r.side, r.diagnostics(), vals


def m_entropy(s, args, cfg):
    vals = {"S_A": info.von_neumann(s.rho_a), "S_B": info.von_neumann(s.rho_b)}
    if s.purity() > 1 - 1e-9:
        vals["entropy_of_entanglement"] = info.entropy_of_entanglement(s)
    return info.von_neumann(s), None, None, vals


def m_mutual(s, args, cfg):
    return info.quantum_mutual_information(s), None, None, {}


def m_discord(s, args, cfg):
    return _report(discord.quantum_discord(s, args.side, cfg))


def m_classical(s, args, cfg):
    return _report(discord.classical_correlations(s, args.side, cfg))


def m_red(s, args, cfg):
    sides = "both" if args.sides == "two" else args.side
    return _report(discord.relative_entropy_of_discord(s, sides, cfg))


def m_ip(s, args, cfg):
    spec = _spectrum(args.spectrum)
    if args.method == "closed-form":
        if spec is not None and sorted(spec) != [-1.0, 1.0]:
            raise InputError("the closed form is only defined for spectrum 1,-1")
        return _report(metrology.interferometric_power_qubit(s, args.side))
    return _report(metrology.interferometric_power(s, args.side, spec, cfg))


def m_broadcast(s, args, cfg):
    r = operational.broadcast_optimal_loss(s, args.fragments, args.side, cfg)
    vals = {f"fragment_{k + 1}": v for k, v in enumerate(r.extras["fragment_losses"])}
    return _report(r, vals)


def m_activation(s, args, cfg):
    return _report(operational.activation_measure(s, args.sides, args.side, cfg))


def m_negativity(s, args, cfg):
    return operational.negativity(s.rho, s.dims), None, None, {}


def m_detect(s, args, cfg):
    v = discord.detect_classical(s, args.flavor, args.tol, cfg)
    return v.distance, None, None, {"is_classical": bool(v.is_classical)}


MEASURES: dict[str, Measure] = {
    "entropy": m_entropy,
    "mutual-info": m_mutual,
    "discord": m_discord,
    "classical-correlations": m_classical,
    "rel-entropy-discord": m_red,
    "interferometric-power": m_ip,
    "broadcast-loss": m_broadcast,
    "activation": m_activation,
    "negativity": m_negativity,
    "detect-classical": m_detect,
}


# -- argument parsing ---------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, state: bool = True) -> None:
    if state:
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--state", metavar="FILE", help="JSON state file")
        src.add_argument("--preset", metavar="NAME[:params]", help="named state, e.g. werner:0.5")
    p.add_argument("--side", default="A", type=str.upper, choices=["A", "B"])
    p.add_argument("--sides", default="one", choices=["one", "two"])
    p.add_argument("--spectrum", default=None, help="generator spectrum k1,k2,...")
    p.add_argument("--method", default="optimize", choices=["optimize", "closed-form"])
    p.add_argument("--fragments", type=int, default=1)
    p.add_argument("--flavor", default="cq", choices=["cq", "qc", "cc"])
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--starts", type=int, default=None)
    p.add_argument("--grid", type=int, default=None, help="polar resolution of the qubit seed grid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default="json", choices=["json", "csv"])
    p.add_argument("--timing", action="store_true", help="include wall time in the report")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qcorr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in MEASURES:
        if name == "negativity":
            continue
        _add_common(sub.add_parser(name, help=f"compute {name}"))
    sw = sub.add_parser("sweep", help="scan a one-parameter state family")
    _add_common(sw, state=False)
    sw.add_argument("--family", required=True, choices=sorted(SWEEP_FAMILIES))
    grid = sw.add_mutually_exclusive_group(required=True)
    grid.add_argument("--values", help="comma-separated parameter values (may be empty)")
    grid.add_argument("--linspace", metavar="START,STOP,NUM")
    sw.add_argument("--measures", required=True, help="comma-separated measure names")
    st = sub.add_parser("selftest", help="run the built-in invariant suite")
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--quick", action="store_true", help="smaller corpora")
    return parser


def _load(args):
    if args.state:
        return load_state(args.state), args.state
    return state_from_preset(args.preset), args.preset


def _sweep_values(args) -> list[float]:
    if args.values is not None:
        items = [v for v in args.values.split(",") if v.strip()]
        try:
            return [float(v) for v in items]
        except ValueError:
            raise InputError(f"--values must be numbers, got {args.values!r}") from None
    try:
        a, b, n = args.linspace.split(",")
        return [float(v) for v in np.linspace(float(a), float(b), int(n))]
    except ValueError:
        raise InputError(f"--linspace must be START,STOP,NUM, got {args.linspace!r}") from None


def run_sweep(args, out) -> None:
    names = [m.strip() for m in args.measures.split(",") if m.strip()]
    unknown = [m for m in names if m not in MEASURES]
    if unknown:
        raise InputError(f"unknown measure(s) {unknown}; choose from {sorted(MEASURES)}")
    values = _sweep_values(args)
    cfg = _config(args)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for x in values:
        state = state_from_preset(SWEEP_FAMILIES[args.family].format(repr(x)))
        for name in names:
            value, side, diag, _ = MEASURES[name](state, args, cfg)
            diag = diag or {"starts": 0, "evaluations": 0, "spread": 0.0}
            writer.writerow(
                [args.family, repr(x), name, _num(value), side or "", diag["starts"], diag["evaluations"],
                 _num(diag["spread"]), args.seed]
            )


def run_measure(args, out) -> None:
    state, descriptor = _load(args)
    cfg = _config(args)
    t0 = time.perf_counter()
    value, side, diag, extra = MEASURES[args.command](state, args, cfg)
    elapsed = time.perf_counter() - t0
    record: dict[str, Any] = {
        "command": args.command,
        "state": descriptor,
        "value": value,
        "side": side,
        "values": extra,
        "diagnostics": diag or {},
        "seed": args.seed,
    }
    if args.timing:
        record["wall_time"] = elapsed
    if args.output == "json":
        json.dump(_clean(record), out, sort_keys=False)
        out.write("\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(RECORD_HEADER)
    d = diag or {"starts": 0, "evaluations": 0, "spread": 0.0}
    writer.writerow([args.command, descriptor, args.command, _num(value), side or "", d["starts"],
                     d["evaluations"], _num(d["spread"]), args.seed])
    for k, v in extra.items():
        writer.writerow([args.command, descriptor, k, _num(v) if not isinstance(v, bool) else v,
                         side or "", "", "", "", args.seed])


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    buf = _io.StringIO()
    try:
        if args.command == "selftest":
            from .selftest import run_selftest

            ok, report = run_selftest(seed=args.seed, quick=args.quick)
            json.dump(_clean(report), buf)
            buf.write("\n")
            out.write(buf.getvalue())
            return 0 if ok else 2
        if args.command == "sweep":
            run_sweep(args, buf)
        else:
            run_measure(args, buf)
    except QcorrError as exc:
        print(f"qcorr: input error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"qcorr: numerical failure: {exc}", file=sys.stderr)
        return 2
    out.write(buf.getvalue())
    return 0


if __name__ == "__main__":
    sys.exit(main())
