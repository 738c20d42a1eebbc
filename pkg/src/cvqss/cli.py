"""Command-line front end: sweeps, threshold analysis, simulation, validation.

Subcommands::

    cvqss sweep      key rates over a squeezing/transmissivity grid (CSV/JSON)
    cvqss threshold  per-structure breakdown of a (k, n) scheme
    cvqss simulate   Monte Carlo protocol run with a SECURE/INSECURE verdict
    cvqss validate   physicality diagnostics of a constructed resource state

Common flags (given after the subcommand): ``--seed``, ``--output``,
``--format csv|json``, ``--quiet``, ``--config FILE``. The config file is
flat ``key=value`` text (keys are the long flag names); command-line flags
override it. Exit codes: 0 success, 1 configuration error, 2 I/O error,
3 unphysical-state error.
"""

import argparse
import json
import sys
from dataclasses import asdict, is_dataclass

import numpy as np

from .gaussian import UnphysicalStateError, validate
from .keyrate import (
    SECURITY_THRESHOLD,
    enumerate_structures,
    keyrate_eavesdropping,
    keyrate_qss,
)
from .simulation import UndersampledError, run_protocol
from .states import ChannelSpec, build_kn_state, chain_topology, star_topology

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_UNPHYSICAL = 3

SWEEP_HEADER = ("r,T,K_eve,K_qss,V_xa_given_xbar,V_pa_given_pbar,"
                "V_pa_given_honest_max,E_ABC")

TOPOLOGIES = {"chain": chain_topology, "star": star_topology}


def _fmt(value: float) -> str:
    """Floating-point rendering used in all text output: 12 significant digits."""
    return format(float(value), ".12g")


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the config code (1)."""

    def error(self, message):
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="PRNG seed (default 0)")
    parser.add_argument("--output", default=None, help="output file (default stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="output format (default csv)")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress informational output")
    parser.add_argument("--config", default=None,
                        help="flat key=value file providing flag defaults")


def _state_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--r", type=float, default=1.15,
                        help="input squeezing parameter (default 1.15)")
    parser.add_argument("--transmissivity", "-T", dest="transmissivity",
                        type=float, default=1.0,
                        help="channel transmissivity for every player (default 1)")
    parser.add_argument("--excess-noise", type=float, default=0.0,
                        help="channel excess noise in vacuum units (default 0)")
    parser.add_argument("--cz-weight", type=float, default=1.0,
                        help="coupling-gate weight on every edge (default 1)")
    parser.add_argument("--n", type=int, default=2, help="number of players (default 2)")
    parser.add_argument("--k", type=int, default=2,
                        help="reconstruction threshold (default 2)")
    parser.add_argument("--topology", choices=sorted(TOPOLOGIES), default="chain",
                        help="resource graph family (default chain)")


def build_parser() -> _Parser:
    parser = _Parser(prog="cvqss", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="key rates over an (r, T) grid",
                             parents=[], add_help=True)
    p_sweep.add_argument("--r-min", type=float, default=0.0)
    p_sweep.add_argument("--r-max", type=float, default=1.5)
    p_sweep.add_argument("--r-steps", type=int, default=61)
    p_sweep.add_argument("--transmissivities", default="1,0.95,0.9,0.85",
                         help="comma-separated channel transmissivities")
    p_sweep.add_argument("--excess-noise", type=float, default=0.0)
    p_sweep.add_argument("--cz-weight", type=float, default=1.0)
    p_sweep.add_argument("--n", type=int, default=2)
    p_sweep.add_argument("--k", type=int, default=2)
    p_sweep.add_argument("--topology", choices=sorted(TOPOLOGIES), default="chain")
    _common_flags(p_sweep)

    p_thr = sub.add_parser("threshold", help="per-structure (k, n) breakdown")
    _state_flags(p_thr)
    _common_flags(p_thr)

    p_sim = sub.add_parser("simulate", help="Monte Carlo protocol run")
    _state_flags(p_sim)
    p_sim.add_argument("--rounds", type=int, default=100000)
    p_sim.add_argument("--reveal-fraction", type=float, default=0.5)
    p_sim.add_argument("--basis-probability", type=float, default=0.5)
    _common_flags(p_sim)

    p_val = sub.add_parser("validate", help="state physicality diagnostics")
    _state_flags(p_val)
    _common_flags(p_val)

    return parser


def _load_config(path: str) -> list:
    """Turn a flat key=value file into a flag list (flags on argv override)."""
    flags = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            flags.append(f"--{key.strip().replace('_', '-')}")
            value = value.strip()
            if value:
                flags.append(value)
    return flags


def _apply_config(argv: list) -> list:
    """Splice config-file flags in right after the subcommand token."""
    path = None
    for position, token in enumerate(argv):
        if token == "--config":
            path = argv[position + 1]
        elif token.startswith("--config="):
            path = token.split("=", 1)[1]
    if path is None:
        return argv
    return [argv[0]] + _load_config(path) + argv[1:]


def _build_state(args):
    topology = TOPOLOGIES[args.topology](args.n)
    spec = ChannelSpec(args.transmissivity, args.excess_noise)
    labels = [f"B{i}" for i in range(1, args.n + 1)]
    return build_kn_state(args.n, args.r, {lab: spec for lab in labels}, topology,
                          cz_weight=args.cz_weight)


def _write_text(path, text: str, quiet: bool) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
        if not quiet:
            print(f"wrote {path}", file=sys.stderr)


def _jsonable(value):
    if is_dataclass(value) and not isinstance(value, type):
        return _jsonable(asdict(value))
    if isinstance(value, dict):
        return {_json_key(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    return value


def _json_key(key):
    if isinstance(key, tuple):
        return "+".join(str(k) for k in key) or "(none)"
    return str(key)


def cmd_sweep(args) -> int:
    if args.r_min > args.r_max or args.r_steps < 1:
        raise ValueError("need r_min <= r_max and r_steps >= 1")
    transmissivities = [float(t) for t in args.transmissivities.split(",") if t]
    if not transmissivities:
        raise ValueError("need at least one transmissivity")
    if any(not 0.0 <= t <= 1.0 for t in transmissivities):
        raise ValueError("transmissivities must lie in [0, 1]")
    scheme = enumerate_structures(args.n, args.k)
    grid = np.linspace(args.r_min, args.r_max, args.r_steps)

    rows = []
    for transmissivity in transmissivities:
        for r in grid:
            point = argparse.Namespace(
                r=float(r), transmissivity=transmissivity,
                excess_noise=args.excess_noise, cz_weight=args.cz_weight,
                n=args.n, topology=args.topology)
            state, layout = _build_state(point)
            eav = keyrate_eavesdropping(state, layout)
            report = keyrate_qss(state, layout, scheme)
            honest_max = max(report.adversarial_conditional_variance.values())
            rows.append((float(r), transmissivity, eav.rate, report.combined_rate,
                         eav.v_x_conditional, eav.v_p_conditional, honest_max,
                         eav.inference_product))

    if args.format == "json":
        keys = SWEEP_HEADER.split(",")
        payload = {"rows": [dict(zip(keys, row)) for row in rows]}
        text = json.dumps(_jsonable(payload), indent=2) + "\n"
    else:
        lines = [SWEEP_HEADER]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    _write_text(args.output, text, args.quiet)
    return EXIT_OK


def cmd_threshold(args) -> int:
    scheme = enumerate_structures(args.n, args.k)
    state, layout = _build_state(args)
    report = keyrate_qss(state, layout, scheme)

    if args.format == "json":
        text = json.dumps(_jsonable(report), indent=2) + "\n"
        _write_text(args.output, text, args.quiet)
        return EXIT_OK

    lines = []
    if not args.quiet:
        lines.append(f"(k, n) = ({args.k}, {args.n})  topology={args.topology}  "
                     f"r={_fmt(args.r)}  T={_fmt(args.transmissivity)}")
        lines.append("")
        lines.append(f"{'kind':<12} {'structure':<18} {'bits':>16}  binding")
        for players, mi in report.access_mutual_information.items():
            mark = "*" if players == report.binding_access else ""
            lines.append(f"{'access':<12} {_group(players):<18} {_fmt(mi):>16}  {mark}")
        for colluders, chi in report.adversarial_holevo.items():
            mark = "*" if colluders == report.binding_adversarial else ""
            lines.append(f"{'adversarial':<12} {_group(colluders):<18} "
                         f"{_fmt(chi):>16}  {mark}")
        lines.append("")
        lines.append(f"eavesdropping-only rate: {_fmt(report.eavesdropping_rate)}")
        for player, rate in report.dishonest_rates.items():
            lines.append(f"dishonest {player}: {_fmt(rate)}")
    lines.append(f"K = {_fmt(report.combined_rate)}")
    lines.append("verdict: " + ("positive key rate" if report.positive
                                else "no secure key"))
    _write_text(args.output, "\n".join(lines) + "\n", args.quiet)
    return EXIT_OK


def _group(players) -> str:
    return "{" + ",".join(str(p) for p in players) + "}" if players else "{}"


def cmd_simulate(args) -> int:
    scheme = enumerate_structures(args.n, args.k)
    state, layout = _build_state(args)
    report = run_protocol(state, layout, scheme, rounds=args.rounds,
                          reveal_fraction=args.reveal_fraction, seed=args.seed,
                          basis_probability=args.basis_probability)

    lines = []
    if not args.quiet:
        analytic = report.analytic
        eav = keyrate_eavesdropping(state, layout)
        lines.append(f"rounds={report.rounds} seed={report.seed} "
                     f"reveal_fraction={_fmt(report.reveal_fraction)}")
        lines.append(f"key pattern {report.key_pattern}: "
                     f"{report.sifted_counts[report.key_pattern]} sifted, "
                     f"{report.revealed_key_rounds} revealed, "
                     f"{report.raw_key_length} raw key rounds")
        lines.append(f"check pattern {report.check_pattern}: "
                     f"{report.sifted_counts[report.check_pattern]} sifted, "
                     f"{report.revealed_check_rounds} revealed")
        lines.append("")
        lines.append(f"{'quantity':<36} {'empirical':>16} {'analytic':>16}")
        rows = [("V(X_A | all players)", report.inference_x.variance,
                 eav.v_x_conditional),
                ("V(P_A | all players)", report.inference_p.variance,
                 eav.v_p_conditional)]
        for players, fit in report.access_variance.items():
            rows.append((f"V(X_A | access {_group(players)})", fit.variance,
                         analytic.access_conditional_variance[players]))
        for colluders, fit in report.adversarial_variance.items():
            rows.append((f"V(P_A | honest vs {_group(colluders)})", fit.variance,
                         analytic.adversarial_conditional_variance[colluders]))
        for name, emp, ana in rows:
            lines.append(f"{name:<36} {_fmt(emp):>16} {_fmt(ana):>16}")
        lines.append("")
        lines.append(f"empirical eavesdropping rate: {_fmt(report.eavesdropping_rate)} "
                     f"(analytic {_fmt(analytic.eavesdropping_rate)})")
    lines.append(f"combined rate = {_fmt(report.combined_rate)} "
                 f"+- {_fmt(report.combined_rate_standard_error)} "
                 f"(analytic {_fmt(report.analytic.combined_rate)})")
    lines.append("SECURE" if report.secure else "INSECURE")
    sys.stdout.write("\n".join(lines) + "\n")

    if args.output is not None:
        if args.format == "json":
            text = json.dumps(_jsonable(report), indent=2) + "\n"
        else:
            out = ["quantity,structure,value,standard_error"]
            for name, count in report.sifted_counts.items():
                out.append(f"sifted_count,{name},{count},")
            for players, fit in report.access_variance.items():
                out.append(f"V_x_conditional,{_group(players)},"
                           f"{_fmt(fit.variance)},{_fmt(fit.standard_error)}")
            for colluders, fit in report.adversarial_variance.items():
                out.append(f"V_p_conditional,honest_of_{_group(colluders)},"
                           f"{_fmt(fit.variance)},{_fmt(fit.standard_error)}")
            out.append(f"combined_rate,,{_fmt(report.combined_rate)},"
                       f"{_fmt(report.combined_rate_standard_error)}")
            text = "\n".join(out) + "\n"
        _write_text(args.output, text, quiet=True)
    return EXIT_OK


def cmd_validate(args) -> int:
    state, layout = _build_state(args)
    diagnostics = validate(state)
    if args.format == "json":
        text = json.dumps(_jsonable(diagnostics), indent=2) + "\n"
    else:
        lines = [
            f"modes: {','.join(str(lab) for lab in state.labels)}",
            f"dealer: {layout.dealer_mode}  "
            f"players: {','.join(str(p) for p in layout.player_modes)}  "
            f"conjugate: {','.join(sorted(str(p) for p in layout.conjugate_players)) or '-'}",
            f"symmetry residual: {_fmt(diagnostics.symmetry_residual)}",
            "symplectic eigenvalues: "
            + ",".join(_fmt(nu) for nu in diagnostics.symplectic_eigenvalues),
            f"min symplectic eigenvalue: {_fmt(diagnostics.min_symplectic_eigenvalue)}",
            f"purity: {_fmt(diagnostics.purity)}",
            f"physical: {diagnostics.physical}",
        ]
        text = "\n".join(lines) + "\n"
    _write_text(args.output, text, args.quiet)
    return EXIT_OK if diagnostics.physical else EXIT_UNPHYSICAL


_COMMANDS = {
    "sweep": cmd_sweep,
    "threshold": cmd_threshold,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(argv)
    except OSError as exc:
        print(f"cvqss: cannot read config file: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, IndexError) as exc:
        print(f"cvqss: bad config file: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except UnphysicalStateError as exc:
        print(f"cvqss: unphysical state: {exc}", file=sys.stderr)
        return EXIT_UNPHYSICAL
    except OSError as exc:
        print(f"cvqss: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, UndersampledError) as exc:
        print(f"cvqss: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
