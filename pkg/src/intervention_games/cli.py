import sys
import logging
import argparse

from typing import Any, Callable, Dict, List, Optional, Tuple

from .config import (
    EXIT_INCONSISTENT,
    EXIT_INVALID,
    Action,
    ConsistencyError,
    RunConfig,
    exit_code,
    load_game,
    parse_params,
    thread_count,
)
from .imperfect import DEFAULT_ALPHA_STEP, ImperfectParams, classify, fig4_data
from .report import Table, format_value, write_csv, write_json, write_workbook
from .search import DEFAULT_PROFILE_STEP, DEFAULT_RULE_STEP, gap_certificate, solve
from .wireless import (
    WirelessParams,
    a0_min,
    benchmarks,
    default_a_i_values,
    fig5_data,
    fig6_data,
    v_star_curve,
)

logger = logging.getLogger(__name__)

IMPERFECT_PARAMS = ("a_low", "a_high", "y_high", "y_low", "p", "q", "r")
IMPERFECT_P_VALUES = (0.9, 0.94, 0.96)

WIRELESS_PARAMS = ("N", "q", "b", "a_bar", "a0_bar")
REGION_A0_VALUES = (0.0, 0.1, 0.51, 5.0, 12.0)
CURVE_A0_VALUES = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.52, 1.0, 5.0)

ALLOWED_PARAMS = {
    "finite": (),
    "imperfect": IMPERFECT_PARAMS,
    "wireless": WIRELESS_PARAMS,
}

def _attempt(history : List[Action], name : str, func : Callable, *args, **kwargs) -> Tuple[bool, Any]:
    """Run one step, recording a failed Action instead of raising
    """

    try:
        return True, func(*args, **kwargs)
    except ConsistencyError as e:
        history.append(Action(name, False, str(e), EXIT_INCONSISTENT))
    except (AssertionError, ValueError, KeyError, OSError) as e:
        history.append(Action(name, False, str(e) or e.__class__.__name__, EXIT_INVALID))

    return False, None

def _write_workbook(history : List[Action], config : RunConfig, tables : Dict[str, Table]):
    if config.workbook is None:
        return

    ok, _ = _attempt(history, "Workbook", write_workbook, tables, config.workbook)
    if ok:
        history.append(Action("Workbook", True, "Wrote %d tables to %s" % (len(tables), config.workbook)))

def _key_value_table(data : Dict[str, Any]) -> Table:
    return Table(
        ("key", "value"),
        tuple((key, value) for key, value in sorted(data.items()) if isinstance(value, (int, float, str, bool))),
    )

def run_finite(config : RunConfig) -> List[Action]:
    history = []

    ok, game = _attempt(history, "Game", load_game, config.input_path)
    if not ok:
        return history
    history.append(Action("Game", True, "Loaded %d users from %s" % (game.num_users, config.input_path)))

    ok, summary = _attempt(
        history, "Solve", solve, game,
        rule_grid_step=config.rule_step or DEFAULT_RULE_STEP,
        profile_grid_step=config.grid_step or DEFAULT_PROFILE_STEP,
        tolerance=config.tolerance,
        symmetric=config.symmetric,
        workers=config.workers,
    )
    if not ok:
        return history
    history.append(Action("Solve", True, "v_bar=%s v_star=%s after %d rules" % (
        format_value(summary.v_bar),
        format_value(summary.v_star) if summary.v_star is not None else "none",
        summary.rules_evaluated,
    )))

    ok, certificate = _attempt(history, "Gap", gap_certificate, game, summary, config.tolerance)
    if not ok:
        return history
    history.append(Action("Gap", True, "certified gap %s" % format_value(certificate.gap) if certificate else "no gap certified"))

    data = summary.to_dict(game)
    data["gap"] = certificate.to_dict() if certificate is not None else None

    path = config.output_path("summary.json")
    ok, _ = _attempt(history, "Output", write_json, data, path)
    if ok:
        history.append(Action("Output", True, "Wrote %s" % path))

    _write_workbook(history, config, {"summary": _key_value_table(data)})
    return history

def run_imperfect(config : RunConfig) -> List[Action]:
    history = []

    overrides = dict(config.params)
    p_values = (overrides.pop("p"),) if "p" in overrides else IMPERFECT_P_VALUES
    alpha_step = config.grid_step or DEFAULT_ALPHA_STEP

    tables = {}
    for p in p_values:
        name = "p=%s" % format_value(p)

        ok, params = _attempt(history, name, ImperfectParams, p=p, **overrides)
        if not ok:
            continue

        ok, table = _attempt(history, name, fig4_data, params, alpha_step)
        if not ok:
            continue

        classification = classify(params)

        csv_path = config.output_path("fig4_p%s.csv" % format_value(p))
        json_path = config.output_path("classification_p%s.json" % format_value(p))

        ok, _ = _attempt(history, name, write_csv, table, csv_path)
        ok = ok and _attempt(history, name, write_json, classification.to_dict(), json_path)[0]
        if not ok:
            continue

        tables["w0_p%s" % format_value(p)] = table
        tables["case_p%s" % format_value(p)] = _key_value_table(classification.to_dict())

        history.append(Action(name, True, "case (%s), v_star=%s, wrote %s and %s" % (
            classification.label.case.value, format_value(classification.v_star), csv_path, json_path,
        )))

    _write_workbook(history, config, tables)
    return history

def _wireless_params(params : Dict[str, float]) -> WirelessParams:
    num_users = params.get("N", 2)
    assert num_users == int(num_users), "Parameter `N` must be an integer, got %s" % num_users
    num_users = int(num_users)

    a_bar = (params["a_bar"],) * num_users if "a_bar" in params else None

    return WirelessParams(
        num_users=num_users,
        q=params.get("q", 12.0),
        b=params.get("b", 1.0),
        a_bar=a_bar,
        a0_bar=params.get("a0_bar", 5.0),
    )

def run_wireless(config : RunConfig) -> List[Action]:
    history = []

    ok, params = _attempt(history, "Parameters", _wireless_params, config.params)
    if not ok:
        return history
    history.append(Action("Parameters", True, "%d users, q=%s, b=%s, a0_bar=%s" % (
        params.num_users, format_value(params.q), format_value(params.b), format_value(params.a0_bar),
    )))

    tables = {}

    if params.num_users == 2:
        for a0_bar in sorted(set(REGION_A0_VALUES + (params.a0_bar,))):
            name = "Region a0=%s" % format_value(a0_bar)
            path = config.output_path("fig5_a0_%s.csv" % format_value(a0_bar))

            ok, table = _attempt(history, name, fig5_data, params.with_a0_bar(a0_bar))
            if ok and _attempt(history, name, write_csv, table, path)[0]:
                tables["region_a0_%s" % format_value(a0_bar)] = table
                history.append(Action(name, True, "%d of %d profiles sustainable, wrote %s" % (
                    int(table.column("member").sum()), table.rows, path,
                )))

        path = config.output_path("fig6.csv")
        ok, table = _attempt(history, "Affine rule", fig6_data, params, default_a_i_values(params))
        if ok and _attempt(history, "Affine rule", write_csv, table, path)[0]:
            tables["affine_rule"] = table
            history.append(Action("Affine rule", True, "Wrote %s" % path))
    else:
        history.append(Action("Region", True, "Skipped region and payoff data, they need exactly two users"))

    a0_values = sorted(set(CURVE_A0_VALUES + (params.a0_bar,)))
    ok, curve = _attempt(history, "Curve", v_star_curve, params, a0_values, config.grid_step)
    if not ok:
        return history

    path = config.output_path("v_star_curve.csv")
    if _attempt(history, "Curve", write_csv, curve, path)[0]:
        tables["v_star_curve"] = curve
        history.append(Action("Curve", True, "Wrote %s" % path))

    v_star = dict(zip(curve.column("a0_bar").tolist(), curve.column("v_star").tolist()))[params.a0_bar]

    ok, bench = _attempt(history, "Benchmarks", benchmarks, params)
    if not ok:
        return history

    data = bench.to_dict()
    data.update({"a0_min": a0_min(params), "v_star": v_star, "a0_bar": params.a0_bar})

    path = config.output_path("benchmarks.json")
    if _attempt(history, "Benchmarks", write_json, data, path)[0]:
        tables["benchmarks"] = _key_value_table(data)
        history.append(Action("Benchmarks", True, "v_star=%s, wrote %s" % (format_value(v_star), path)))

    _write_workbook(history, config, tables)
    return history

def _report(history : List[Action]) -> int:
    for action in history:
        print(action)
    return exit_code(history)

def cmd_finite(config : RunConfig) -> int:
    return _report(run_finite(config))

def cmd_imperfect(config : RunConfig) -> int:
    return _report(run_imperfect(config))

def cmd_wireless(config : RunConfig) -> int:
    return _report(run_wireless(config))

COMMANDS = {
    "finite": cmd_finite,
    "imperfect": cmd_imperfect,
    "wireless": cmd_wireless,
}

def _add_common(parser : argparse.ArgumentParser):
    parser.add_argument('--out', metavar="DIR", default=".", help="Directory where output files are written. Created if missing.")
    parser.add_argument('--grid-step', type=float, metavar="X", help="Profile grid step; for `imperfect`, the alpha step of the w0 table.")
    parser.add_argument('--rule-step', type=float, metavar="X", help="Rule grid step, as a probability.")
    parser.add_argument('--tol', type=float, metavar="X", default=1e-9, help="Numerical tolerance for equilibrium checks.")
    parser.add_argument('--param', action='append', metavar="key=value", help="Override a parameter. May be repeated.")
    parser.add_argument('--xlsx', metavar="output.xlsx", help="Also write every output table to this workbook.")
    parser.add_argument('--verbose', action='store_true', help="Log solver diagnostics.")

def build_arg_parser():

    parser = argparse.ArgumentParser(description="Solve intervention games and reproduce the worked examples.")
    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    finite = commands.add_parser('finite', help="Search intervention rules for a finite game described in JSON.")
    finite.add_argument('game', metavar="game.json", help="The game document.")
    finite.add_argument('--symmetric', action='store_true', help="Only consider profiles where all users mix identically.")
    _add_common(finite)

    imperfect = commands.add_parser('imperfect', help="Two users sharing a resource, monitored through quality. Parameters: %s." % ", ".join(IMPERFECT_PARAMS))
    _add_common(imperfect)

    wireless = commands.add_parser('wireless', help="N users sharing a channel, monitored perfectly. Parameters: %s." % ", ".join(WIRELESS_PARAMS))
    _add_common(wireless)

    return parser

def build_config(args : argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        output_directory=args.out,
        input_path=getattr(args, "game", None),
        params=parse_params(args.param, ALLOWED_PARAMS[args.command]),
        grid_step=args.grid_step,
        rule_step=args.rule_step,
        tolerance=args.tol,
        symmetric=getattr(args, "symmetric", False),
        workbook=args.xlsx,
        workers=thread_count(),
    )

def main(argv : Optional[List[str]] = None):
    parser = build_arg_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)

    try:
        config = build_config(args)
    except (AssertionError, OSError) as e:
        print(Action("Configuration", False, str(e), EXIT_INVALID))
        sys.exit(EXIT_INVALID)

    sys.exit(COMMANDS[config.command](config))

if __name__ == '__main__':
    main()
