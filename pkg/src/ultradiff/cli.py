"""Command-line front door: reproducible analyses with file outputs.

Every run writes its effective configuration to ``run.cfg`` (sorted
key=value lines) next to the reports, and the same configuration fed
back through ``--config`` reproduces the outputs byte for byte: reports
carry no timestamps, no machine names, and no unseeded randomness.

Output is files only -- JSON for verdicts, CSV for tabulations, SVG for
the wavefront picture.  Exit codes: 0 on success, 1 when a module
computation fails, 2 for usage errors (unknown flags, malformed specs).
Partial failures inside a grid (single rays erroring out) stay in the
report and do not affect the exit code unless ``--strict`` is given.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import almost_analytic as aa
from . import distributions
from . import symbols
from . import wavefront
from . import weights
from .errors import TruncationExhausted, UltradiffError
from .fbi import PlateauWindow, classical, quartic


class UsageError(Exception):
    """Bad spec strings or config keys: the user's input, not the math."""


# ---------------------------------------------------------------------------
# configuration plumbing

_COMMON = {"out": ".", "strict": "false"}

DEFAULTS = {
    "weights analyze": dict(_COMMON, weight="gevrey:1", t_min="0.01",
                            t_max="100", t_points="41"),
    "weights compare": dict(_COMMON, weight="gevrey:0.5", weight2="gevrey:1"),
    "weights eval": dict(_COMMON, weight="gevrey:1", t="1",
                         omega="false", small_h="false", h_tilde="false"),
    "wf": dict(_COMMON, weight="gevrey:1", dist="delta",
               gen_poly="classical:1", points="0",
               directions="-1,1", lambda_min="4", lambda_max="512",
               lambda_points="12", tau_reg="0.5", tau_sing="0.1"),
    "aa verify": dict(_COMMON, weight="gevrey:1", func="flat:1",
                      theta="0.5", order="32", x_span="-1,1", y_max="0.25"),
    "aa jump": dict(_COMMON, tol="1e-6"),
    "aa trend": dict(_COMMON, weight="gevrey:1", func="flat:1",
                     theta="0.5", order="40", x_span="0.1,0.5"),
    "symbol char": dict(_COMMON, symbol="xi1^2 + xi2^2", points="0,0",
                        tol="1e-9"),
    "symbol bichar": dict(_COMMON, symbol="xi1^2 - xi2^2",
                          start="0,0,1,1", t_span="0,10", steps="2000"),
    "symbol bracket": dict(_COMMON, kind="poisson", p="xi1", q="x1"),
    "symbol type": dict(_COMMON, fields="1; 0 | 0; x1", point="0,0",
                        max_length="4"),
    "symbol holmgren": dict(_COMMON, symbol="xi1^2 + xi2^2", grad="1,0",
                            x0="0,0", tol="1e-9"),
}


def _read_config_file(path):
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _effective_config(command, args):
    """defaults <- config file <- explicit flags, as documented."""
    base = dict(DEFAULTS[command])
    config_path = getattr(args, "config", None)
    if config_path:
        for key, value in _read_config_file(config_path).items():
            if key not in base:
                raise UsageError(
                    f"config key {key!r} is not used by '{command}'")
            base[key] = value
    for key in base:
        given = getattr(args, key, None)
        if given is not None:
            base[key] = str(given)
    return base


def _write_run_config(command, config, out_dir):
    lines = [f"# command: {command}"]
    lines += [f"{k}={config[k]}" for k in sorted(config)]
    (out_dir / "run.cfg").write_text("\n".join(lines) + "\n")


def _write_json(path, payload):
    path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")


def _out_dir(config):
    out = Path(config["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _flag(config, key):
    return config[key].lower() in ("true", "1", "yes", "on")


def _floats(text):
    return tuple(float(v) for v in str(text).split(","))


# ---------------------------------------------------------------------------
# spec parsing (usage errors, not module errors)

def _parse_weight(spec):
    try:
        return weights.from_name(spec)
    except (ValueError, TypeError) as err:
        raise UsageError(f"bad weight spec {spec!r}: {err}")


def _parse_distribution(spec):
    """An atom name, or a signed sum like ``abs - 2*delta``.

    Operators in sums must be surrounded by spaces so that atom
    arguments (file paths, negative locations) keep their dashes.
    """
    text = str(spec).strip()
    pieces = text.replace(" + ", "\x00+\x00").replace(" - ", "\x00-\x00") \
        .split("\x00")
    terms, sign = [], 1.0
    try:
        for piece in pieces:
            piece = piece.strip()
            if piece == "+":
                sign = 1.0
            elif piece == "-":
                sign = -1.0
            else:
                if piece.startswith("-"):
                    sign, piece = -sign, piece[1:]
                coeff, star, name = piece.partition("*")
                if star:
                    factor, name = float(coeff), name.strip()
                else:
                    factor, name = 1.0, piece
                terms.append((sign * factor, distributions.from_name(name)))
                sign = 1.0
    except (ValueError, TypeError) as err:
        raise UsageError(f"bad distribution spec {spec!r}: {err}")
    if not terms:
        raise UsageError(f"bad distribution spec {spec!r}: empty")
    if len(terms) == 1 and terms[0][0] == 1.0:
        return terms[0][1]
    return distributions.combine(*terms)


def _parse_gen_poly(spec):
    family, _, arg = str(spec).partition(":")
    n = int(arg) if arg else 1
    if family == "classical":
        return classical(n)
    if family == "quartic":
        return quartic(n)
    raise UsageError(f"bad generator polynomial spec {spec!r}")


_AA_SOURCES = {"flat": aa.flat_source, "exp": aa.exponential_source}


def _parse_function(spec):
    base, _, arg = str(spec).partition(":")
    try:
        if base == "poly":
            return aa.polynomial_source([float(c) for c in arg.split(",")])
        if base in _AA_SOURCES:
            return _AA_SOURCES[base](float(arg)) if arg \
                else _AA_SOURCES[base]()
    except (ValueError, TypeError) as err:
        raise UsageError(f"bad function spec {spec!r}: {err}")
    raise UsageError(
        f"bad function spec {spec!r}: expected flat:S, exp:RATE or"
        " poly:c0,c1,...")


def _parse_symbol_text(text, n=None):
    try:
        return symbols.parse_symbol(text, n=n)
    except symbols.SymbolParseError as err:
        raise UsageError(f"bad symbol {text!r}: {err}")


def _x_polynomial(text, n):
    """A polynomial in x1..xn only, for vector-field components."""
    p = _parse_symbol_text(text, n=n).scalar
    if any(sum(e[n:]) for e in p.terms):
        raise UsageError(
            f"vector-field component {text!r} must not mention xi variables")
    return symbols.Polynomial(n, {e[:n]: c for e, c in p.terms.items()})


def _parse_fields(text):
    rows = [row for row in text.split("|")]
    comps = [[c for c in row.split(";")] for row in rows]
    n = len(comps[0])
    if any(len(row) != n for row in comps):
        raise UsageError("every field needs one component per variable")
    parsed = tuple(tuple(_x_polynomial(c, n) for c in row) for row in comps)
    return symbols.VectorFieldSystem(n, parsed)


# ---------------------------------------------------------------------------
# commands

def _cmd_weights_analyze(config):
    out = _out_dir(config)
    M = _parse_weight(config["weight"])
    regular = weights.check_regular(M)
    growth = weights.check_moderate_growth(M)
    qa = weights.quasianalytic(M)
    payload = {
        "config": dict(config, command="weights analyze"),
        "weight": M.name,
        "K": int(M.K),
        "regular": bool(regular.m1_ok and regular.m2_ok
                        and regular.m3_ok and regular.m4_ok),
        "axioms": {"m1": bool(regular.m1_ok), "m2": bool(regular.m2_ok),
                   "m3": bool(regular.m3_ok), "m4": bool(regular.m4_ok)},
        "moderate_growth": {"ok": bool(growth.ok), "C": float(growth.C),
                            "rho": float(growth.rho)},
        "quasianalytic": qa.classification,
        "caveat": qa.caveat,
    }
    _write_json(out / "analysis.json", payload)

    ts = np.geomspace(float(config["t_min"]), float(config["t_max"]),
                      int(config["t_points"]))
    lines = ["t,omega,log_small_h,log_h_tilde"]
    for t in ts:
        row = [repr(float(t))]
        for fn in (M.omega, M.log_small_h, M.log_h_tilde):
            try:
                # + 0.0 folds the signed zero omega returns left of its kink
                row.append(repr(float(fn(t)) + 0.0))
            except TruncationExhausted:
                # the table certifies a finite range; outside it the cell
                # stays empty rather than silently extrapolated
                row.append("nan")
        lines.append(",".join(row))
    (out / "omega_table.csv").write_text("\n".join(lines) + "\n")
    return 0


def _cmd_weights_compare(config):
    out = _out_dir(config)
    M = _parse_weight(config["weight"])
    N = _parse_weight(config["weight2"])
    forward = weights.precedes(M, N)
    backward = weights.precedes(N, M)
    payload = {
        "config": dict(config, command="weights compare"),
        "first": M.name,
        "second": N.name,
        "precedes": bool(forward.ok),
        "precedes_reverse": bool(backward.ok),
        "equivalent": bool(weights.equivalent(M, N)),
        "witness": float(forward.witness),
    }
    _write_json(out / "compare.json", payload)
    return 0


def _cmd_weights_eval(config):
    out = _out_dir(config)
    M = _parse_weight(config["weight"])
    ts = _floats(config["t"])
    wanted = [key for key in ("omega", "small_h", "h_tilde")
              if _flag(config, key)]
    if not wanted:
        wanted = ["omega"]
    fns = {"omega": M.omega,
           "small_h": M.log_small_h,
           "h_tilde": M.log_h_tilde}
    payload = {"config": dict(config, command="weights eval"),
               "weight": M.name, "t": list(ts)}
    for key in wanted:
        payload[key] = [float(fns[key](t)) for t in ts]
    _write_json(out / "eval.json", payload)
    return 0


def _cmd_wf(config):
    out = _out_dir(config)
    u = _parse_distribution(config["dist"])
    M = _parse_weight(config["weight"])
    p = _parse_gen_poly(config["gen_poly"])
    lambdas = wavefront.magnitude_grid(float(config["lambda_min"]),
                                       float(config["lambda_max"]),
                                       int(config["lambda_points"]))
    window = PlateauWindow(0.0, 0.5, 0.75)
    estimate = wavefront.estimate_wavefront(
        u, _floats(config["points"]), _floats(config["directions"]),
        M, window, p, lambdas=lambdas,
        tau_reg=float(config["tau_reg"]), tau_sing=float(config["tau_sing"]))
    wavefront.save_estimate(estimate, out / "wavefront.json")
    wavefront.render_svg(estimate, out / "wavefront.svg")
    errored = [e for e in estimate.entries if e.error is not None]
    if errored and _flag(config, "strict"):
        print(f"{len(errored)} rays failed; see wavefront.json",
              file=sys.stderr)
        return 1
    return 0


def _extension(config):
    return aa.extend(_parse_function(config["func"]),
                     _parse_weight(config["weight"]),
                     theta=float(config["theta"]),
                     order=int(config["order"]),
                     x_span=_floats(config["x_span"]),
                     y_max=float(config["y_max"]))


def _cmd_aa_verify(config):
    out = _out_dir(config)
    report = aa.verify_dbar_bound(_extension(config))
    payload = report.to_dict()
    payload["config"] = dict(config, command="aa verify")
    _write_json(out / "dbar_report.json", payload)
    return 0


def _cmd_aa_jump(config):
    out = _out_dir(config)
    report = aa.verify_jump(tol=float(config["tol"]))
    payload = {
        "config": dict(config, command="aa jump"),
        "ok": bool(report.ok),
        "note": report.note,
        "rows": [{"center": float(c), "residual": float(r),
                  "bound": float(b), "ok": bool(k)}
                 for c, r, b, k in report.rows],
    }
    _write_json(out / "jump.json", payload)
    return 0


def _cmd_aa_trend(config):
    out = _out_dir(config)
    trend = aa.dbar_scale_trend(_parse_function(config["func"]),
                                _parse_weight(config["weight"]),
                                theta=float(config["theta"]),
                                order=int(config["order"]),
                                x_span=_floats(config["x_span"]))
    payload = {
        "config": dict(config, command="aa trend"),
        "levels": [float(v) for v in trend.levels],
        "scales": [float(v) for v in trend.scales],
        "growth": float(trend.growth),
        "scale_cap": float(trend.scale_cap),
        "exceeded": bool(trend.exceeded),
        "ok": bool(trend.ok),
    }
    _write_json(out / "trend.json", payload)
    return 0


def _cmd_symbol_char(config):
    out = _out_dir(config)
    sym = _parse_symbol_text(config["symbol"])
    points = [_floats(p) for p in config["points"].split("|")]
    sample = symbols.char_set(sym, points, tol=float(config["tol"]))
    payload = {
        "config": dict(config, command="symbol char"),
        "tol": sample.tol,
        "points": [list(p) for p in sample.points],
        "characteristic": [[list(x), list(d)]
                           for x, d in sample.characteristic_pairs()],
        "count": int(sample.mask.sum()),
    }
    _write_json(out / "char.json", payload)

    n = sym.n
    header = [f"x{i+1}" for i in range(n)] + [f"xi{i+1}" for i in range(n)] \
        + ["det", "scale", "characteristic"]
    lines = [",".join(header)]
    for i, x in enumerate(sample.points):
        for j, d in enumerate(sample.directions):
            lines.append(",".join(
                [repr(v) for v in x] + [repr(v) for v in d]
                + [repr(float(sample.detvals[i, j])),
                   repr(float(sample.scales[i, j])),
                   str(bool(sample.mask[i, j])).lower()]))
    (out / "char.csv").write_text("\n".join(lines) + "\n")
    return 0


def _cmd_symbol_bichar(config):
    out = _out_dir(config)
    sym = _parse_symbol_text(config["symbol"])
    curve = symbols.bicharacteristic(sym.scalar, _floats(config["start"]),
                                     t_span=_floats(config["t_span"]),
                                     steps=int(config["steps"]))
    symbols.save_curve(curve, out / "curve.csv")
    payload = {
        "config": dict(config, command="symbol bichar"),
        "drift": curve.drift,
        "on_characteristic": curve.on_characteristic,
        "symbol_start": curve.symbol_start,
        "endpoint": [float(v) for v in curve.states[-1]],
    }
    _write_json(out / "bichar.json", payload)
    return 0


def _cmd_symbol_bracket(config):
    out = _out_dir(config)
    kind = config["kind"]
    if kind == "poisson":
        # infer the common dimension from both operands, then re-parse
        n = max(_parse_symbol_text(config["p"]).n,
                _parse_symbol_text(config["q"]).n)
        p = _parse_symbol_text(config["p"], n=n).scalar
        q = _parse_symbol_text(config["q"], n=n).scalar
        result = symbols.poisson_bracket(p, q)
        text = result.to_text()
    elif kind == "lie":
        sys_x = _parse_fields(config["p"])
        sys_y = _parse_fields(config["q"])
        if sys_x.nvars != sys_y.nvars:
            raise UsageError("both fields must live on the same space")
        bracket = symbols.lie_bracket(sys_x.fields[0], sys_y.fields[0])
        names = [f"x{i+1}" for i in range(sys_x.nvars)]
        text = " | ".join(c.to_text(names=names) for c in bracket)
    else:
        raise UsageError(f"unknown bracket kind {kind!r}")
    payload = {
        "config": dict(config, command="symbol bracket"),
        "kind": kind,
        "bracket": text,
    }
    _write_json(out / "bracket.json", payload)
    return 0


def _cmd_symbol_type(config):
    out = _out_dir(config)
    system = _parse_fields(config["fields"])
    report = symbols.finite_type(system, _floats(config["point"]),
                                 max_length=int(config["max_length"]))
    payload = {
        "config": dict(config, command="symbol type"),
        "point": list(report.point),
        "rank_by_length": list(report.rank_by_length),
        "type_length": report.type_length,
        "finite": report.finite,
    }
    _write_json(out / "type.json", payload)
    return 0


def _cmd_symbol_holmgren(config):
    out = _out_dir(config)
    sym = _parse_symbol_text(config["symbol"])
    grad = _floats(config["grad"])
    report = symbols.noncharacteristic_surface(
        sym, lambda x: grad, _floats(config["x0"]),
        tol=float(config["tol"]))
    payload = {
        "config": dict(config, command="symbol holmgren"),
        "noncharacteristic": report.noncharacteristic,
        "det": report.det_value,
        "conormal": list(report.conormal),
        "statement": report.statement,
    }
    _write_json(out / "holmgren.json", payload)
    return 0


_HANDLERS = {
    "weights analyze": _cmd_weights_analyze,
    "weights compare": _cmd_weights_compare,
    "weights eval": _cmd_weights_eval,
    "wf": _cmd_wf,
    "aa verify": _cmd_aa_verify,
    "aa jump": _cmd_aa_jump,
    "aa trend": _cmd_aa_trend,
    "symbol char": _cmd_symbol_char,
    "symbol bichar": _cmd_symbol_bichar,
    "symbol bracket": _cmd_symbol_bracket,
    "symbol type": _cmd_symbol_type,
    "symbol holmgren": _cmd_symbol_holmgren,
}


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(parser):
    parser.add_argument("--out", help="output directory (default: .)")
    parser.add_argument("--config", help="key=value file; flags override it")
    parser.add_argument("--strict", action="store_const", const="true",
                        help="exit 1 on partial grid failures")


def build_parser():
    root = argparse.ArgumentParser(
        prog="ultradiff",
        description="Weight sequences, wavefront estimates, almost-analytic"
                    " checks and symbol calculus, with file reports.")
    top = root.add_subparsers(dest="command", required=True)

    w = top.add_parser("weights", help="weight-sequence analyses")
    wsub = w.add_subparsers(dest="subcommand", required=True)
    p = wsub.add_parser("analyze", help="regularity, growth, quasianalyticity")
    p.add_argument("weight_pos", nargs="?", metavar="WEIGHT")
    p.add_argument("--weight")
    p.add_argument("--t-min", dest="t_min")
    p.add_argument("--t-max", dest="t_max")
    p.add_argument("--t-points", dest="t_points")
    _add_common(p)
    p = wsub.add_parser("compare", help="precedence and equivalence")
    p.add_argument("weight_pos", nargs="?", metavar="WEIGHT")
    p.add_argument("weight2_pos", nargs="?", metavar="WEIGHT2")
    p.add_argument("--weight")
    p.add_argument("--weight2")
    _add_common(p)
    p = wsub.add_parser("eval", help="evaluate omega / h at given t")
    p.add_argument("weight_pos", nargs="?", metavar="WEIGHT")
    p.add_argument("--weight")
    p.add_argument("--t")
    p.add_argument("--omega", action="store_const", const="true")
    p.add_argument("--small-h", dest="small_h", action="store_const",
                   const="true")
    p.add_argument("--h-tilde", dest="h_tilde", action="store_const",
                   const="true")
    _add_common(p)

    p = top.add_parser("wf", help="wavefront estimate with JSON + SVG output")
    p.add_argument("--dist")
    p.add_argument("--weight")
    p.add_argument("--gen-poly", dest="gen_poly")
    p.add_argument("--points")
    p.add_argument("--directions")
    p.add_argument("--lambda-min", dest="lambda_min")
    p.add_argument("--lambda-max", dest="lambda_max")
    p.add_argument("--lambda-points", dest="lambda_points")
    p.add_argument("--tau-reg", dest="tau_reg")
    p.add_argument("--tau-sing", dest="tau_sing")
    _add_common(p)

    a = top.add_parser("aa", help="almost-analytic extension checks")
    asub = a.add_subparsers(dest="subcommand", required=True)
    p = asub.add_parser("verify", help="defect-decay certificate")
    p.add_argument("--func")
    p.add_argument("--weight")
    p.add_argument("--theta")
    p.add_argument("--order")
    p.add_argument("--x-span", dest="x_span")
    p.add_argument("--y-max", dest="y_max")
    _add_common(p)
    p = asub.add_parser("jump", help="boundary-value jump check")
    p.add_argument("--tol")
    _add_common(p)
    p = asub.add_parser("trend", help="certificate scale across band levels")
    p.add_argument("--func")
    p.add_argument("--weight")
    p.add_argument("--theta")
    p.add_argument("--order")
    p.add_argument("--x-span", dest="x_span")
    _add_common(p)

    s = top.add_parser("symbol", help="polynomial symbol calculus")
    ssub = s.add_subparsers(dest="subcommand", required=True)
    p = ssub.add_parser("char", help="sampled characteristic set")
    p.add_argument("--symbol")
    p.add_argument("--points", help="points like '0,0|1,0'")
    p.add_argument("--tol")
    _add_common(p)
    p = ssub.add_parser("bichar", help="bicharacteristic curve")
    p.add_argument("--symbol")
    p.add_argument("--start")
    p.add_argument("--t-span", dest="t_span")
    p.add_argument("--steps")
    _add_common(p)
    p = ssub.add_parser("bracket", help="Poisson or Lie bracket")
    p.add_argument("--kind", choices=("poisson", "lie"))
    p.add_argument("--p")
    p.add_argument("--q")
    _add_common(p)
    p = ssub.add_parser("type", help="finite-type rank filtration")
    p.add_argument("--fields", help="fields like '1; 0 | 0; x1'")
    p.add_argument("--point")
    p.add_argument("--max-length", dest="max_length")
    _add_common(p)
    p = ssub.add_parser("holmgren", help="non-characteristic surface check")
    p.add_argument("--symbol")
    p.add_argument("--grad")
    p.add_argument("--x0")
    p.add_argument("--tol")
    _add_common(p)
    return root


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    if getattr(args, "subcommand", None):
        command = f"{command} {args.subcommand}"

    # positional spec shorthands map onto the corresponding flags
    if getattr(args, "weight_pos", None) and getattr(args, "weight", None) \
            is None:
        args.weight = args.weight_pos
    if getattr(args, "weight2_pos", None) and getattr(args, "weight2", None) \
            is None:
        args.weight2 = args.weight2_pos

    try:
        config = _effective_config(command, args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: cannot read config: {err}", file=sys.stderr)
        return 2

    try:
        out = _out_dir(config)
        _write_run_config(command, config, out)
        return _HANDLERS[command](config)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (UltradiffError, ValueError, ZeroDivisionError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
