"""Command-line front end.

Subcommands::

    netcalc analyze FILE          run the configured analysis, print a report
    netcalc compare-tandem        homogeneous-tandem delay comparison sweep
    netcalc dump-curve FILE ID    exact breakpoints (or samples) of one curve
    netcalc check FILE            structure classification and stability only

Exit codes: 0 success, 1 I/O or schema error, 2 analysis refused
(gating mismatch, interleaved windows, or a curve-kind gate), 3 instability.

Reports print delays in seconds and data quantities in the file's data
unit; rates use the file's rate unit.  Decimal rendering keeps 9
significant digits by default (``--precision``); ``--exact`` prints the
underlying rationals verbatim.  The ``NETCALC_MAX_SEGMENTS`` environment
variable caps intermediate curve complexity for every subcommand.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .curves import Curve, KindError
from .feedback import (
    FeedbackNetwork,
    GATING_MISMATCH,
    InstabilityReport,
    StructureRefused,
    classify_structure,
    feedback_analysis,
    instability_witness,
    is_stable,
    stability_check,
    window_throttles,
)
from .netfile import (
    DATA_UNITS,
    NetworkFile,
    RATE_UNITS,
    SchemaError,
    dump_curve_text,
    load_network,
)
from .tandem import (
    AnalysisRefused,
    AnalysisReport,
    conventional_delay_closed_form,
    pmoo_analysis,
    sequential_analysis,
    unconventional_delay_bound,
)
from .upp import DomainError, INF, ResourceError, UppFunction

Value = Fraction | float  # float only ever holds +inf

__all__ = ["main", "run"]

_R_PRIME_DEFAULT = (Fraction(1, 2), Fraction(5, 4), Fraction(5, 2),
                    Fraction(15, 4), Fraction(5))
_SWEEP_RATE = Fraction(20)          # Mbps
_SWEEP_LATENCY = Fraction(1, 20)    # s
_SWEEP_FLOW_RATE = Fraction(5)      # Mbps
_SWEEP_BURST = Fraction(1)          # Mb
_SWEEP_MIN_LATENCY = Fraction(1, 20)  # s


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse API
        raise _UsageError(message)


# --- number rendering --------------------------------------------------------

def format_decimal(x: Fraction, sig: int) -> str:
    """Plain decimal with ``sig`` significant digits, trailing zeros
    stripped; round-half-even, so identical inputs render identically."""
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    x = abs(x)
    e = len(str(x.numerator)) - len(str(x.denominator))
    while Fraction(10) ** e > x:
        e -= 1
    while Fraction(10) ** (e + 1) <= x:
        e += 1
    digits = round(x / Fraction(10) ** (e - sig + 1))
    if digits == 10 ** sig:
        digits //= 10
        e += 1
    text = str(digits)
    if e >= sig - 1:
        out = text + "0" * (e - sig + 1)
    elif e >= 0:
        out = (text[:e + 1] + "." + text[e + 1:]).rstrip("0").rstrip(".")
    else:
        out = ("0." + "0" * (-e - 1) + text).rstrip("0").rstrip(".")
    return sign + out


def _fmt(x: Value, exact: bool, sig: int) -> str:
    if x is INF:
        return "inf"
    return str(x) if exact else format_decimal(Fraction(x), sig)


# --- shared report assembly --------------------------------------------------

def _scaled(x: Value, unit: Fraction) -> Value:
    return x if x is INF else x / unit


def _curve_lines(fn: UppFunction) -> list[str]:
    return dump_curve_text(fn).splitlines()


def _witness_fields(nf: NetworkFile, report: InstabilityReport,
                    exact: bool, sig: int) -> list[tuple[str, str]]:
    data = DATA_UNITS[nf.units.data]
    rate = RATE_UNITS[nf.units.rate]
    fields = [
        ("gated_flow", report.gated_flow),
        ("uncontrolled_flow", report.uncontrolled_flow),
        ("window", _fmt(_scaled(report.window, data), exact, sig)),
    ]
    if report.growth_rate is not None:
        fields.append(("growth_rate",
                       _fmt(_scaled(report.growth_rate, rate), exact, sig)))
        fields.append(("onset", _fmt(report.onset, exact, sig)))
    fields.append(("buffer_demand",
                   _fmt(_scaled(report.buffer_bound, data), exact, sig)))
    fields.append(("exceeds_window",
                   "true" if report.window_exceeded else "false"))
    return fields


def _try_witness(fb: FeedbackNetwork) -> InstabilityReport | None:
    if classify_structure(fb).name != GATING_MISMATCH:
        return None
    try:
        return instability_witness(fb)
    except DomainError:
        return None


def _emit(args, lines_text: list[str], rows_csv: list[tuple[str, str]],
          payload: dict) -> None:
    """Render one report in the selected format to stdout."""
    if args.format == "text":
        sys.stdout.write("\n".join(lines_text) + "\n")
    elif args.format == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["key", "value"])
        writer.writerows(rows_csv)
        sys.stdout.write(out.getvalue())
    else:
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _margin_block(nf: NetworkFile, margins, exact: bool, sig: int):
    rate = RATE_UNITS[nf.units.rate]
    text: list[str] = []
    rows: list[tuple[str, str]] = []
    payload: list[dict] = []
    for (j, agg, srv) in margins:
        agg_s = _fmt(_scaled(agg, rate), exact, sig)
        srv_s = _fmt(_scaled(srv, rate), exact, sig)
        text.append(f"  server {j}: arrival rate {agg_s} {nf.units.rate} "
                    f"/ service rate {srv_s} {nf.units.rate}")
        rows.append((f"margin.{j}.arrival_rate", agg_s))
        rows.append((f"margin.{j}.service_rate", srv_s))
        payload.append({"server": j, "arrival_rate": str(agg),
                        "service_rate": str(srv)})
    return text, rows, payload


def _refusal_report(args, nf: NetworkFile, reason: str,
                    witness: InstabilityReport | None) -> None:
    exact, sig = args.exact, args.precision
    text = [f"refused: {reason}"]
    rows: list[tuple[str, str]] = [("refused", "true"), ("reason", reason)]
    payload: dict = {"refused": True, "reason": reason}
    if witness is not None:
        fields = _witness_fields(nf, witness, exact, sig)
        text.append("instability witness:")
        text.extend(f"  {key}: {value}" for key, value in fields)
        rows.extend((f"witness.{key}", value) for key, value in fields)
        payload["witness"] = {
            "gated_flow": witness.gated_flow,
            "uncontrolled_flow": witness.uncontrolled_flow,
            "window": str(witness.window),
            "growth_rate": (None if witness.growth_rate is None
                            else str(witness.growth_rate)),
            "onset": None if witness.onset is None else str(witness.onset),
            "buffer_bound": str(witness.buffer_bound),
            "exceeds_window": witness.window_exceeded,
        }
    _emit(args, text, rows, payload)


# --- analyze -----------------------------------------------------------------

def _cmd_analyze(args) -> int:
    nf = load_network(args.file)
    method = nf.analysis.method
    throttles: list[tuple[str, Curve]] = []
    if method == "feedback":
        fb = nf.feedback()
        try:
            report = feedback_analysis(fb)
        except StructureRefused as err:
            _refusal_report(args, nf, str(err), _try_witness(fb))
            return 2
        if fb.triples and report.stable:
            throttles = _named_throttles(nf, fb)
    elif method == "pmoo":
        report = pmoo_analysis(nf.tandem())
    else:
        report = sequential_analysis(nf.tandem())
    _report_out(args, nf, method, report, throttles)
    if args.plot:
        _plot_analysis(nf, report, args.plot)
    return 3 if (report.delay_bound is INF or not report.stable) else 0


def _named_throttles(nf: NetworkFile,
                     fb: FeedbackNetwork) -> list[tuple[str, Curve]]:
    curves = window_throttles(fb)
    by_span = {(t.start, t.end): c for t, c in zip(fb.triples, curves)}
    return [(w.name, by_span[(w.start, w.end)]) for w in nf.windows]


def _report_out(args, nf: NetworkFile, method: str, report: AnalysisReport,
                throttles: list[tuple[str, Curve]]) -> None:
    exact, sig = args.exact, args.precision
    data = DATA_UNITS[nf.units.data]
    foi = nf.analysis.flow_of_interest
    stable = report.stable and report.delay_bound is not INF
    delay_s = _fmt(report.delay_bound, exact, sig)
    backlog_s = _fmt(_scaled(report.backlog_bound, data), exact, sig)

    m_text, m_rows, m_payload = _margin_block(
        nf, report.stability_margins, exact, sig)
    text = [f"method: {method}",
            f"flow of interest: {foi}",
            f"stability: {'stable' if stable else 'UNSTABLE'}"]
    text += m_text
    text.append(f"delay bound: {delay_s} s")
    text.append(f"backlog bound: {backlog_s} {nf.units.data}")
    rows = [("method", method), ("flow_of_interest", foi),
            ("stable", "true" if stable else "false")]
    rows += m_rows
    rows.append(("delay_bound", delay_s))
    rows.append(("backlog_bound", backlog_s))
    payload: dict = {
        "method": method,
        "flow_of_interest": foi,
        "stable": stable,
        "margins": m_payload,
        "delay_bound_s": (None if report.delay_bound is INF
                          else str(report.delay_bound)),
        "backlog_bound": (None if report.backlog_bound is INF
                          else str(_scaled(report.backlog_bound, data))),
        "units": {"delay": "s", "data": nf.units.data,
                  "rate": nf.units.rate},
    }

    if report.e2e_curve is not None:
        lines = _curve_lines(report.e2e_curve.fn)
        text.append("end-to-end service curve:")
        text.extend(f"  {line}" for line in lines)
        rows.extend((f"e2e.{i}", line)
                    for i, line in enumerate(lines, start=1))
        payload["e2e_curve"] = lines
    else:
        payload["e2e_curve"] = None

    if throttles:
        text.append("throttle curves:")
        for name, curve in throttles:
            lines = _curve_lines(curve.fn)
            text.append(f"  window {name}:")
            text.extend(f"    {line}" for line in lines)
            rows.extend((f"throttle.{name}.{i}", line)
                        for i, line in enumerate(lines, start=1))
        payload["throttles"] = {name: _curve_lines(curve.fn)
                                for name, curve in throttles}

    if report.diagnostics:
        text.append("diagnostics:")
        text.extend(f"  - {note}" for note in report.diagnostics)
        rows.extend((f"diagnostic.{i}", note)
                    for i, note in enumerate(report.diagnostics, start=1))
    payload["diagnostics"] = list(report.diagnostics)
    _emit(args, text, rows, payload)


# --- check -------------------------------------------------------------------

def _cmd_check(args) -> int:
    nf = load_network(args.file)
    fb = nf.feedback()
    exact, sig = args.exact, args.precision
    structure = classify_structure(fb)
    label = structure.name if fb.triples else "plain tandem"
    if not structure.supported:
        reason = (structure.mismatch.reason
                  if structure.mismatch is not None
                  else "window spans and gated flows interleave")
        witness = _try_witness(fb)
        text = [f"structure: {label}", f"  {reason}"]
        rows = [("structure", label), ("reason", reason)]
        payload: dict = {"structure": label, "supported": False,
                         "reason": reason}
        if witness is not None:
            fields = _witness_fields(nf, witness, exact, sig)
            text.append("instability witness:")
            text.extend(f"  {key}: {value}" for key, value in fields)
            rows.extend((f"witness.{key}", value) for key, value in fields)
            payload["witness"] = {key: value for key, value in fields}
        _emit(args, text, rows, payload)
        return 2
    margins = stability_check(fb)
    stable = is_stable(margins)
    m_text, m_rows, m_payload = _margin_block(nf, margins, exact, sig)
    text = [f"structure: {label}",
            f"stability: {'stable' if stable else 'UNSTABLE'}"]
    text += m_text
    rows = [("structure", label),
            ("stable", "true" if stable else "false")]
    rows += m_rows
    payload = {"structure": label, "supported": True, "stable": stable,
               "margins": m_payload}
    _emit(args, text, rows, payload)
    return 0 if stable else 3


# --- dump-curve --------------------------------------------------------------

def _resolve_curve(nf: NetworkFile, curve_id: str) -> UppFunction:
    kind, sep, rest = curve_id.partition(":")
    servers = {s.name: s.curve.fn for s in nf.servers}
    flows = {f.name: f.alpha.fn for f in nf.flows}
    if sep:
        if kind == "server" and rest in servers:
            return servers[rest]
        if kind == "flow" and rest in flows:
            return flows[rest]
        if kind == "window":
            return _window_curve(nf, rest)
        raise SchemaError(f"unknown curve id {curve_id!r}")
    if curve_id == "e2e":
        return _e2e_curve(nf)
    hits = []
    if curve_id in servers:
        hits.append(("server", servers[curve_id]))
    if curve_id in flows:
        hits.append(("flow", flows[curve_id]))
    if any(w.name == curve_id for w in nf.windows):
        hits.append(("window", None))
    if not hits:
        raise SchemaError(f"unknown curve id {curve_id!r}")
    if len(hits) > 1:
        kinds = "/".join(kind for kind, _ in hits)
        raise SchemaError(f"curve id {curve_id!r} is ambiguous ({kinds}); "
                          f"qualify it, e.g. {hits[0][0]}:{curve_id}")
    kind, fn = hits[0]
    if kind == "window":
        return _window_curve(nf, curve_id)
    return fn


def _window_curve(nf: NetworkFile, name: str) -> UppFunction:
    for w in nf.windows:
        if w.name == name:
            fb = nf.feedback()
            curves = window_throttles(fb)
            for t, c in zip(fb.triples, curves):
                if (t.start, t.end) == (w.start, w.end):
                    return c.fn
    raise SchemaError(f"unknown curve id 'window:{name}'")


def _e2e_curve(nf: NetworkFile) -> UppFunction:
    method = nf.analysis.method
    if method == "feedback":
        report = feedback_analysis(nf.feedback())
    elif method == "pmoo":
        report = pmoo_analysis(nf.tandem())
    else:
        report = sequential_analysis(nf.tandem())
    if report.e2e_curve is None:
        raise AnalysisRefused("the analysis produced no end-to-end curve "
                              "(unstable network)")
    return report.e2e_curve.fn


def _cmd_dump_curve(args) -> int:
    nf = load_network(args.file)
    fn = _resolve_curve(nf, args.id)
    if (args.dt is None) != (args.horizon is None):
        raise _UsageError("--dt and --horizon go together")
    if args.dt is not None:
        if args.dt <= 0 or args.horizon <= 0:
            raise _UsageError("--dt and --horizon must be positive")
        data = DATA_UNITS[nf.units.data]
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["t", "value"])
        t = Fraction(0)
        while t <= args.horizon:
            value = fn.eval(t)
            writer.writerow([_fmt(t, args.exact, args.precision),
                             _fmt(_scaled(value, data),
                                  args.exact, args.precision)])
            t += args.dt
        sys.stdout.write(out.getvalue())
    else:
        sys.stdout.write(dump_curve_text(fn))
    if args.plot:
        _plot_curves(args.plot, [(args.id, fn)],
                     nf.analysis.dt, nf.analysis.horizon)
    return 0


# --- compare-tandem ----------------------------------------------------------

def _sweep_row(n: int, r_prime: Fraction) -> tuple[Value, Value]:
    conventional = conventional_delay_closed_form(
        n, _SWEEP_RATE, _SWEEP_LATENCY, _SWEEP_BURST,
        _SWEEP_FLOW_RATE, _SWEEP_BURST, _SWEEP_FLOW_RATE, _SWEEP_BURST)
    unconventional = unconventional_delay_bound(
        n, _SWEEP_RATE, _SWEEP_LATENCY, _SWEEP_BURST,
        _SWEEP_FLOW_RATE, _SWEEP_BURST, _SWEEP_FLOW_RATE, _SWEEP_BURST,
        r_prime, _SWEEP_MIN_LATENCY)
    return conventional, unconventional


def _cmd_compare(args) -> int:
    if args.n_max < 1:
        raise _UsageError("--n-max must be at least 1: every tandem "
                          "needs a non-empty path")
    for rp in args.r_prime:
        if not 0 < rp <= _SWEEP_FLOW_RATE:
            raise _UsageError(
                f"--r-prime values must be in (0, {_SWEEP_FLOW_RATE}] Mbps "
                f"(a minimum envelope of the {_SWEEP_FLOW_RATE} Mbps flow)")
    params = [(n, rp) for n in range(1, args.n_max + 1)
              for rp in args.r_prime]
    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(lambda p: _sweep_row(*p), params))
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["n", "r_prime", "D_conventional", "D_unconventional"])
    for (n, rp), (d_conv, d_unconv) in zip(params, results):
        writer.writerow([str(n), _fmt(rp, args.exact, args.precision),
                         _fmt(d_conv, args.exact, args.precision),
                         _fmt(d_unconv, args.exact, args.precision)])
    if args.out is None:
        sys.stdout.write(out.getvalue())
    else:
        Path(args.out).write_text(out.getvalue(), encoding="utf-8")
        if not args.no_figure:
            _plot_sweep(Path(args.out), params, results, args.r_prime)
    return 0


# --- figures -----------------------------------------------------------------

def _agg_pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _plot_sweep(out: Path, params, results,
                r_primes: Sequence[Fraction]) -> None:
    plt = _agg_pyplot()
    target = out.with_suffix(".png")
    if target == out:
        target = out.with_name(out.name + "-figure.png")
    by_rp: dict[Fraction, list[tuple[int, float]]] = {rp: [] for rp in r_primes}
    conventional: dict[int, float] = {}
    for (n, rp), (d_conv, d_unconv) in zip(params, results):
        if d_unconv is not INF:
            by_rp[rp].append((n, float(d_unconv)))
        if d_conv is not INF:
            conventional[n] = float(d_conv)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ns = sorted(conventional)
    ax.plot(ns, [conventional[n] for n in ns], "k--",
            label="aggregate bound")
    for rp in r_primes:
        pts = by_rp[rp]
        ax.plot([n for n, _ in pts], [d for _, d in pts], marker=".",
                label=f"minimum rate {format_decimal(rp, 6)} Mbps")
    ax.set_xlabel("subsystems n")
    ax.set_ylabel("delay bound [s]")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(target, dpi=120)
    plt.close(fig)
    print(f"figure written to {target}", file=sys.stderr)


def _grid_for(fn: UppFunction, dt: Fraction | None,
              horizon: Fraction | None) -> tuple[Fraction, Fraction]:
    if horizon is None:
        if fn.period_segments is not None and fn.d > 0:
            horizon = fn.rank + 4 * fn.d
        else:
            horizon = fn.rank + 1
        if horizon <= 0:
            horizon = Fraction(1)
    if dt is None:
        dt = horizon / 128
    return dt, horizon


def _plot_curves(path: str, curves: list[tuple[str, UppFunction]],
                 dt: Fraction | None, horizon: Fraction | None) -> None:
    plt = _agg_pyplot()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, fn in curves:
        step, stop = _grid_for(fn, dt, horizon)
        ts: list[float] = []
        vs: list[float] = []
        t = Fraction(0)
        while t <= stop:
            v = fn.eval(t)
            if v is not INF:
                ts.append(float(t))
                vs.append(float(v))
            t += step
        ax.plot(ts, vs, label=label)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("data [bit]")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    print(f"figure written to {path}", file=sys.stderr)


def _plot_analysis(nf: NetworkFile, report: AnalysisReport,
                   path: str) -> None:
    curves: list[tuple[str, UppFunction]] = []
    foi = next(f for f in nf.flows
               if f.name == nf.analysis.flow_of_interest)
    curves.append((f"arrival {foi.name}", foi.alpha.fn))
    if report.e2e_curve is not None:
        curves.append(("end-to-end service", report.e2e_curve.fn))
    _plot_curves(path, curves, nf.analysis.dt, nf.analysis.horizon)


# --- wiring ------------------------------------------------------------------

def _fraction_arg(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return value


def _add_render_flags(sub) -> None:
    sub.add_argument("--format", choices=("text", "csv", "structured"),
                     default="text",
                     help="report format (default: text)")
    sub.add_argument("--precision", type=_positive_int, default=9,
                     metavar="N",
                     help="significant digits for decimals (default 9)")
    sub.add_argument("--exact", action="store_true",
                     help="print exact rationals instead of decimals")


def _build_parser() -> _Parser:
    parser = _Parser(prog="netcalc",
                     description="exact min-plus network calculus")
    subs = parser.add_subparsers(dest="command", required=True)

    analyze = subs.add_parser("analyze",
                              help="run the analysis a file configures")
    analyze.add_argument("file")
    _add_render_flags(analyze)
    analyze.add_argument("--plot", metavar="PNG",
                         help="render arrival and end-to-end curves")
    analyze.set_defaults(handler=_cmd_analyze)

    compare = subs.add_parser(
        "compare-tandem",
        help="delay comparison sweep over homogeneous tandems")
    compare.add_argument("--n-max", type=_positive_int, default=20,
                         metavar="N", help="largest tandem size (default 20)")
    compare.add_argument("--r-prime", type=_fraction_arg, nargs="+",
                         default=list(_R_PRIME_DEFAULT), metavar="MBPS",
                         help="minimum-rate envelope values "
                              "(default 0.5 1.25 2.5 3.75 5)")
    compare.add_argument("--out", metavar="CSV",
                         help="write the table here instead of stdout "
                              "(and a .png figure next to it)")
    compare.add_argument("--no-figure", action="store_true",
                         help="skip the figure when --out is given")
    compare.add_argument("--precision", type=_positive_int, default=9,
                         metavar="N")
    compare.add_argument("--exact", action="store_true")
    compare.set_defaults(handler=_cmd_compare)

    dump = subs.add_parser("dump-curve",
                           help="exact breakpoints of one curve")
    dump.add_argument("file")
    dump.add_argument("id",
                      help="server:NAME, flow:NAME, window:NAME, e2e, "
                           "or a bare unambiguous name")
    dump.add_argument("--dt", type=_fraction_arg, metavar="SECONDS",
                      help="sample instead: grid step")
    dump.add_argument("--horizon", type=_fraction_arg, metavar="SECONDS",
                      help="sample instead: last grid point")
    dump.add_argument("--precision", type=_positive_int, default=9,
                      metavar="N")
    dump.add_argument("--exact", action="store_true")
    dump.add_argument("--plot", metavar="PNG", help="render the curve")
    dump.set_defaults(handler=_cmd_dump_curve)

    check = subs.add_parser(
        "check", help="classify the feedback structure, check stability")
    check.add_argument("file")
    _add_render_flags(check)
    check.set_defaults(handler=_cmd_check)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (SchemaError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except StructureRefused as err:
        print(f"refused: {err}", file=sys.stderr)
        return 2
    except (AnalysisRefused, KindError) as err:
        print(f"refused: {err}", file=sys.stderr)
        return 2
    except (DomainError, ResourceError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def main(argv: Sequence[str] | None = None) -> None:
    raise SystemExit(run(argv))


if __name__ == "__main__":  # pragma: no cover
    main()
