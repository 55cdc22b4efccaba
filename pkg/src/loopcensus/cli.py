"""Command line driver: census runs, counting experiments, lemma reports.

Subcommands
    census          build (or extend) a census file, print a summary
    count           loop counts over a time grid
    sector          counts restricted to outgoing/incoming sectors
    homology        per-coset counts and shares for a finite-index scheme
    cover           closing proportion of loop lifts to the scheme's cover
    fit             exponential growth fit with a bootstrap band
    verify-lemmas   boundary lemma verifiers, JSON report
    export          census binary to CSV

Exit codes: 0 success or inconclusive, 1 verification failure, 2 usage or
configuration error, 3 record budget exhausted.  Flags override config file
values; the LOOPCENSUS_OUTPUT_DIR variable overrides the configured output
directory.  Every output file embeds the config fingerprint and the package
version.  Plot emission is plain column data plus, on request, a gnuplot
script; nothing renders in-process.
"""

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .boundary import (
    verify_full_branch,
    verify_inclusion_lemmas,
    verify_scaling_lemma,
)
from .census import (
    CensusBudgetError,
    enumerate_orbit,
    export_csv,
    extend_census,
    load_census,
    save_census,
)
from .config import ConfigError, load_config
from .groups import build_surface_group
from .statistics import (
    count_arcs,
    count_by_coset,
    count_sector,
    coset_shares,
    cover_lift_proportion,
    fit_asymptotics,
    write_columns,
    write_series_csv,
)

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def _provenance(config):
    return f"fingerprint={config.fingerprint()} version={__version__}"


def _coerce(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj).__name__}")


def _write_json(path, config, payload):
    body = {
        "artifact_version": __version__,
        "config_fingerprint": config.fingerprint(),
        **payload,
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(body, sort_keys=True, indent=2, default=_coerce) + "\n")


def _output_dir(config, args):
    directory = args.output_dir or config.resolved_output_directory()
    os.makedirs(directory, exist_ok=True)
    return directory


def _out_path(config, args, name):
    if os.path.isabs(name):
        return name
    return os.path.join(_output_dir(config, args), name)


def _load(args):
    return load_census(args.census)


def _grid_for(config, census):
    if math.isnan(config.grid_stop):
        return config.time_grid(census.t)
    return config.time_grid()


def _write_plot_script(path, dat_name, config, curves, logscale=True):
    lines = [f"# gnuplot script; run: gnuplot -persist {os.path.basename(path)}"]
    lines.append(f"# {_provenance(config)}")
    if logscale:
        lines.append("set logscale y")
    lines.append("set xlabel 't'")
    lines.append("plot " + ", \\\n     ".join(curves).replace("DATA", dat_name))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _emit_plot(config, args, stem, columns, header, curves, logscale=True):
    dat = _out_path(config, args, stem + ".dat")
    write_columns(dat, columns, header=header, provenance=_provenance(config))
    print(f"wrote {dat}")
    if args.plot_script:
        script = _out_path(config, args, stem + ".gp")
        _write_plot_script(script, os.path.basename(dat), config, curves, logscale)
        print(f"wrote {script}")


# -- subcommands -------------------------------------------------------------


def cmd_census(config, args):
    group = build_surface_group(config.genus)
    started = time.perf_counter()
    exit_code = EXIT_OK
    try:
        if args.extend:
            census = extend_census(load_census(args.extend), config.t, config.budget)
        else:
            census = enumerate_orbit(group, config.t, config.slack, config.budget)
    except CensusBudgetError as exc:
        census = exc.partial
        exit_code = EXIT_BUDGET
        print(f"warning: {exc}; partial census flagged incomplete", file=sys.stderr)
    elapsed = time.perf_counter() - started

    census.counters["config_fingerprint"] = config.fingerprint()
    census.counters["artifact_version"] = __version__
    path = _out_path(config, args, args.out)
    save_census(census, path)

    n = census.n_records
    top = float(census.displacements[-1]) if n else math.nan
    c = census.counters
    print(f"records {n}")
    print("max displacement " + (f"{top:.12g}" if n else "none"))
    print(
        f"dedup: stored {c.get('stored')} children {c.get('children')} "
        f"duplicates {c.get('duplicates')} beyond_cutoff {c.get('beyond_cutoff')}"
    )
    print(f"kernel {c.get('kernel')} elapsed {elapsed:.2f} s")
    print(f"wrote {path}")

    summary = {
        "records": n,
        "max_displacement": None if not n else top,
        "t": census.t,
        "slack": census.slack,
        "budget": census.budget,
        "complete": census.complete,
        "counters": {k: v for k, v in c.items()},
        "file": os.path.basename(path),
    }
    summary_path = os.path.splitext(path)[0] + ".summary.json"
    _write_json(summary_path, config, summary)
    print(f"wrote {summary_path}")
    return exit_code


def cmd_count(config, args):
    census = _load(args)
    grid = _grid_for(config, census)
    series = count_arcs(census, grid)
    path = _out_path(config, args, args.out)
    write_series_csv(path, [series], provenance=_provenance(config))
    print(f"wrote {path}")
    if args.plot or args.plot_script:
        stem = os.path.splitext(args.out)[0]
        _emit_plot(
            config,
            args,
            stem,
            [series.grid, series.counts],
            ["t", "count"],
            ["'DATA' using 1:2 with steps title 'N(t)'"],
        )
    return EXIT_OK


def cmd_sector(config, args):
    census = _load(args)
    grid = _grid_for(config, census)
    series = count_sector(
        census, config.outgoing_sector(), config.incoming_sector(), grid
    )
    path = _out_path(config, args, args.out)
    write_series_csv(path, [series], provenance=_provenance(config))
    print(f"wrote {path}")
    if args.plot or args.plot_script:
        stem = os.path.splitext(args.out)[0]
        _emit_plot(
            config,
            args,
            stem,
            [series.grid, series.counts],
            ["t", "count"],
            ["'DATA' using 1:2 with steps title 'sector count'"],
        )
    return EXIT_OK


def cmd_homology(config, args):
    census = _load(args)
    scheme = config.coset_scheme()
    grid = _grid_for(config, census)
    per_coset = count_by_coset(census, scheme, grid)
    path = _out_path(config, args, args.out)
    write_series_csv(path, list(per_coset.values()), provenance=_provenance(config))
    print(f"wrote {path}")

    t_share = float(grid[-1])
    shares = coset_shares(census, scheme, t_share)
    rows = [
        {
            "coset": list(label),
            "count": int(per_coset[label].counts[-1]),
            "numerator": share.numerator,
            "denominator": share.denominator,
            "share": float(share),
        }
        for label, share in zip(scheme.labels(), shares)
    ]
    payload = {
        "t": t_share,
        "index": scheme.index,
        "cosets": rows,
        "share_sum_exact": str(sum(shares)),
    }
    shares_path = _out_path(config, args, os.path.splitext(args.out)[0] + "_shares.json")
    _write_json(shares_path, config, payload)
    print(f"wrote {shares_path}")
    return EXIT_OK


def cmd_cover(config, args):
    census = _load(args)
    scheme = config.coset_scheme()
    grid = _grid_for(config, census)
    series = cover_lift_proportion(census, scheme, grid)
    stem = os.path.splitext(args.out)[0]
    dat = _out_path(config, args, stem + ".dat")
    write_columns(
        dat,
        [series.grid, series.proportions],
        header=["t", "closing_proportion"],
        provenance=_provenance(config),
    )
    print(f"wrote {dat}")
    props = [None if math.isnan(p) else float(p) for p in series.proportions]
    payload = {
        "index": scheme.index,
        "grid": [float(t) for t in series.grid],
        "proportions": props,
        "final_t": float(series.grid[-1]),
        "final_proportion": props[-1],
    }
    path = _out_path(config, args, stem + ".json")
    _write_json(path, config, payload)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_fit(config, args):
    census = _load(args)
    grid = _grid_for(config, census)
    series = count_arcs(census, grid)
    fit = fit_asymptotics(
        series, config.fit_window, bootstrap=config.fit_bootstrap, seed=config.seed
    )
    path = _out_path(config, args, args.out)
    _write_json(path, config, {"fit": fit.as_dict(), "grid_points": len(series)})
    print(
        f"h {fit.h_estimate:.6f}  a {fit.a_estimate:.6f}  "
        f"band [{fit.a_band[0]:.6f}, {fit.a_band[1]:.6f}]  residual {fit.residual:.3g}"
    )
    print(f"wrote {path}")
    if args.plot or args.plot_script:
        stem = os.path.splitext(args.out)[0]
        fitted = fit.a_estimate * np.exp(fit.h_estimate * series.grid)
        _emit_plot(
            config,
            args,
            stem,
            [series.grid, series.counts, fitted],
            ["t", "count", "fitted"],
            [
                "'DATA' using 1:2 with steps title 'N(t)'",
                "'DATA' using 1:3 with lines title 'a e^{ht}'",
            ],
        )
    return EXIT_OK


def cmd_verify_lemmas(config, args):
    census = _load(args)
    params = config.box_parameters()
    rho = config.rho_fraction * params.theta
    rho_prime = config.rho_prime_fraction * params.theta_prime
    t_list = list(config.verify_t_values)

    inclusion = verify_inclusion_lemmas(census, params, rho, rho_prime, t_list)
    scaling = verify_scaling_lemma(census, params, t_list)
    branch = verify_full_branch(
        census, params, t_list, samples=config.verify_samples, seed=config.seed
    )

    violations = (
        inclusion["total_violations"]
        + scaling["total_violations"]
        + branch["total_disagreements"]
    )
    inconclusive = (
        inclusion["all_empty"] or scaling["inconclusive"] or branch["inconclusive"]
    )
    payload = {
        "inclusion": inclusion,
        "scaling": scaling,
        "full_branch": branch,
        "violations": int(violations),
        "inconclusive": bool(inconclusive),
        "passed": violations == 0,
    }
    path = _out_path(config, args, args.out)
    _write_json(path, config, payload)

    for name in ("vis1", "vis2", "vis3"):
        bad = sum(row[f"{name}_violations"] for row in inclusion["rows"])
        if name == "vis3":
            bad += sum(row["vis3_displacement_violations"] for row in inclusion["rows"])
        t0 = inclusion["empirical_t0"][name]
        t0_text = "none" if t0 is None else f"{t0:g}"
        print(f"{name}: {'PASS' if bad == 0 else 'FAIL'} ({bad} violations, empirical t0 {t0_text})")
    s_state = "inconclusive" if scaling["inconclusive"] else (
        "PASS" if scaling["total_violations"] == 0 else "FAIL"
    )
    print(f"scaling: {s_state} ({scaling['total_violations']} violations)")
    b_state = "inconclusive" if branch["inconclusive"] else (
        "PASS" if branch["total_disagreements"] == 0 else "FAIL"
    )
    print(f"full-branch: {b_state} ({branch['total_disagreements']} disagreements)")
    if inconclusive and violations == 0:
        print("note: some member sets were empty; their checks are inconclusive")
    print(f"wrote {path}")
    return EXIT_OK if violations == 0 else EXIT_VERIFICATION


def cmd_export(config, args):
    census = _load(args)
    path = _out_path(config, args, args.out)
    export_csv(census, path, provenance=_provenance(config))
    print(f"wrote {path}")
    return EXIT_OK


# -- argument plumbing -------------------------------------------------------


def _add_common(sub, census_input=True):
    sub.add_argument("--config", metavar="FILE", help="config file (key = value sections)")
    sub.add_argument("--output-dir", metavar="DIR", help="where outputs land")
    sub.add_argument("--seed", type=int, help="seed for sampled verifiers and bootstrap")
    if census_input:
        sub.add_argument("--census", required=True, metavar="FILE", help="census binary to read")


def _add_grid(sub):
    sub.add_argument("--grid-start", type=float, metavar="T")
    sub.add_argument("--grid-stop", type=float, metavar="T")
    sub.add_argument("--grid-step", type=float, metavar="DT")


def _add_plot(sub):
    sub.add_argument("--plot", action="store_true", help="emit plot-ready column data")
    sub.add_argument(
        "--plot-script", action="store_true", help="also emit a gnuplot script"
    )


_GRID_MAP = {
    "grid_start": ("grid", "start"),
    "grid_stop": ("grid", "stop"),
    "grid_step": ("grid", "step"),
}
_SEED_MAP = {"seed": ("output", "seed")}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="loopcensus",
        description="Geodesic loop counting and boundary-lemma checks on a genus-g surface.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("census", help="enumerate orbit points, write a census file")
    _add_common(p, census_input=False)
    p.add_argument("--genus", type=int)
    p.add_argument("--t", type=float, help="census radius")
    p.add_argument("--slack", type=float, help="frontier slack beyond t")
    p.add_argument("--budget", type=int, help="stored-element budget")
    p.add_argument("--extend", metavar="FILE", help="extend this census instead of starting fresh")
    p.add_argument("--out", default="census.bin", metavar="FILE")
    p.set_defaults(
        func=cmd_census,
        override_map={
            "genus": ("census", "genus"),
            "t": ("census", "t"),
            "slack": ("census", "slack"),
            "budget": ("census", "budget"),
            **_SEED_MAP,
        },
    )

    p = commands.add_parser("count", help="loop counts over a time grid")
    _add_common(p)
    _add_grid(p)
    _add_plot(p)
    p.add_argument("--out", default="counts.csv", metavar="FILE")
    p.set_defaults(func=cmd_count, override_map={**_GRID_MAP, **_SEED_MAP})

    p = commands.add_parser("sector", help="counts restricted to direction sectors")
    _add_common(p)
    _add_grid(p)
    _add_plot(p)
    p.add_argument("--outgoing-base", type=float, metavar="ANGLE")
    p.add_argument("--outgoing-half", type=float, metavar="ANGLE")
    p.add_argument("--incoming-base", type=float, metavar="ANGLE")
    p.add_argument("--incoming-half", type=float, metavar="ANGLE")
    p.add_argument("--out", default="sector_counts.csv", metavar="FILE")
    p.set_defaults(
        func=cmd_sector,
        override_map={
            **_GRID_MAP,
            **_SEED_MAP,
            "outgoing_base": ("sector", "outgoing_base"),
            "outgoing_half": ("sector", "outgoing_half"),
            "incoming_base": ("sector", "incoming_base"),
            "incoming_half": ("sector", "incoming_half"),
        },
    )

    coset_map = {
        "kind": ("coset", "kind"),
        "modulus": ("coset", "modulus"),
        "rows": ("coset", "rows"),
        "moduli": ("coset", "moduli"),
    }

    p = commands.add_parser("homology", help="per-coset counts and shares")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--kind", choices=["mod", "trivial", "rows"])
    p.add_argument("--modulus", type=int)
    p.add_argument("--rows", metavar="ROWS", help="integer rows, ';' between rows")
    p.add_argument("--moduli", metavar="MODULI", help="space-separated moduli")
    p.add_argument("--out", default="homology_counts.csv", metavar="FILE")
    p.set_defaults(func=cmd_homology, override_map={**_GRID_MAP, **_SEED_MAP, **coset_map})

    p = commands.add_parser("cover", help="closing proportion of lifts to a finite cover")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--kind", choices=["mod", "trivial", "rows"])
    p.add_argument("--modulus", type=int)
    p.add_argument("--rows", metavar="ROWS")
    p.add_argument("--moduli", metavar="MODULI")
    p.add_argument("--out", default="cover_proportion.json", metavar="FILE")
    p.set_defaults(func=cmd_cover, override_map={**_GRID_MAP, **_SEED_MAP, **coset_map})

    p = commands.add_parser("fit", help="exponential growth fit over a window")
    _add_common(p)
    _add_grid(p)
    _add_plot(p)
    p.add_argument("--window-start", type=float, metavar="T")
    p.add_argument("--window-stop", type=float, metavar="T")
    p.add_argument("--bootstrap", type=int, metavar="N")
    p.add_argument("--out", default="fit.json", metavar="FILE")
    p.set_defaults(
        func=cmd_fit,
        override_map={
            **_GRID_MAP,
            **_SEED_MAP,
            "window_start": ("fit", "window_start"),
            "window_stop": ("fit", "window_stop"),
            "bootstrap": ("fit", "bootstrap"),
        },
    )

    p = commands.add_parser("verify-lemmas", help="boundary lemma verifiers, JSON report")
    _add_common(p)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--theta-prime", type=float)
    p.add_argument("--base-angle", type=float)
    p.add_argument("--base-angle-prime", type=float)
    p.add_argument("--t-values", metavar="LIST", help="space-separated times")
    p.add_argument("--rho-fraction", type=float)
    p.add_argument("--rho-prime-fraction", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--out", default="verify_lemmas.json", metavar="FILE")
    p.set_defaults(
        func=cmd_verify_lemmas,
        override_map={
            **_SEED_MAP,
            "epsilon": ("box", "epsilon"),
            "alpha": ("box", "alpha"),
            "theta": ("box", "theta"),
            "theta_prime": ("box", "theta_prime"),
            "base_angle": ("box", "base_angle"),
            "base_angle_prime": ("box", "base_angle_prime"),
            "t_values": ("verify", "t_values"),
            "rho_fraction": ("verify", "rho_fraction"),
            "rho_prime_fraction": ("verify", "rho_prime_fraction"),
            "samples": ("verify", "samples"),
        },
    )

    p = commands.add_parser("export", help="census binary to CSV")
    _add_common(p)
    p.add_argument("--out", default="census_export.csv", metavar="FILE")
    p.set_defaults(func=cmd_export, override_map={**_SEED_MAP})

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {}
    for dest, key in args.override_map.items():
        value = getattr(args, dest)
        if value is not None:
            overrides[key] = str(value)
    try:
        config = load_config(args.config, overrides)
        return args.func(config, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CensusBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
