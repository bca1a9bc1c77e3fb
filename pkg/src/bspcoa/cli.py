"""Command-line interface: fit, simulate, project, diagnose.

Every output file embeds the effective configuration (JSON files as a
``config`` object, CSV files as a leading ``# config: ...`` comment),
so a run can be reconstructed from its outputs. Exit codes: 0 success,
1 usage error, 2 data error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import (
    DiagnosticsReport,
    bm_acc,
    delta,
    delta_star,
    exi,
    rescale_loadings,
    silhouette_2d,
    variance_explained,
)
from .errors import DataError, NumericalError
from .model import BspcoaConfig, fit, subsample_fit_project
from .ordination import DISTANCE_FUNCTIONS, pcoa
from .shrinkage import TpbnHyper
from .simgen import SCENARIOS, STUDY_COLUMNS, run_study, summarize_study
from .svgplot import heatmap_svg, scatter_panels_svg
from .tables import (
    fmt_float,
    parse_count_table,
    prevalence_filter,
    read_matrix_csv,
    to_relative_abundance,
)

SCHEMA_VERSION = 1


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits with status 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_io_args(p, input_required=True):
    p.add_argument("--input", required=input_required, help="input count table (CSV/TSV)")
    p.add_argument("--output-dir", required=True, help="directory for output files")
    p.add_argument("--force", action="store_true", help="overwrite existing output files")
    p.add_argument("--delimiter", default=None, help="input delimiter (default: auto-detect)")


def _add_preprocess_args(p):
    p.add_argument(
        "--prevalence-threshold",
        type=float,
        default=None,
        help="drop taxa present in fewer than this fraction of samples (e.g. 0.1)",
    )
    p.add_argument(
        "--relative-abundance",
        action="store_true",
        help="convert counts to relative abundances (after any prevalence filter)",
    )


def _add_model_args(p):
    p.add_argument("--distance", choices=sorted(DISTANCE_FUNCTIONS), default="bray-curtis")
    p.add_argument("--k", type=int, default=2, help="number of ordination axes")
    p.add_argument("--iters", type=int, default=2000, help="Gibbs iterations per outer step")
    p.add_argument("--burn-in", type=int, default=500, help="discarded Gibbs iterations")
    p.add_argument("--ci-level", type=float, default=0.95, help="credible-interval level")
    p.add_argument(
        "--tau",
        type=float,
        default=None,
        help="global shrinkage scale (default: 1 / (p n log n))",
    )
    p.add_argument("--max-outer", type=int, default=20, help="maximum outer iterations")
    p.add_argument("--outer-tol", type=float, default=1e-4, help="outer convergence tolerance")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.add_argument(
        "--no-center",
        action="store_true",
        help="skip column-centering of the feature matrix before regression",
    )


def build_parser():
    parser = _Parser(prog="bspcoa", description=__doc__)
    parser.add_argument("--version", action="version", version=f"bspcoa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", parser_class=_Parser, help="fit ordination and sparse surrogate")
    _add_io_args(p_fit)
    _add_preprocess_args(p_fit)
    _add_model_args(p_fit)
    p_fit.add_argument("--labels", default=None, help="optional sample_id,label CSV for plots/metrics")
    p_fit.add_argument("--plot", action="store_true", help="also write SVG figures")
    p_fit.set_defaults(func=cmd_fit)

    p_sim = sub.add_parser("simulate", parser_class=_Parser, help="run a simulation study")
    p_sim.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    p_sim.add_argument("--replicates", type=int, default=100)
    p_sim.add_argument("--output-dir", required=True)
    p_sim.add_argument("--force", action="store_true")
    _add_model_args(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_proj = sub.add_parser(
        "project", parser_class=_Parser, help="fit on a subsample and embed all samples"
    )
    _add_io_args(p_proj)
    _add_preprocess_args(p_proj)
    _add_model_args(p_proj)
    p_proj.add_argument("--subsample-m", type=int, required=True, help="subsample size")
    p_proj.add_argument("--subsample-seed", type=int, default=None,
                        help="seed for row selection (default: --seed)")
    p_proj.add_argument("--time-full-pcoa", action="store_true",
                        help="also time a full-data PCoA for comparison")
    p_proj.set_defaults(func=cmd_project)

    p_diag = sub.add_parser(
        "diagnose", parser_class=_Parser, help="delta/ExI/delta* for user-supplied loadings"
    )
    _add_io_args(p_diag)
    _add_preprocess_args(p_diag)
    p_diag.add_argument("--coordinates", required=True, help="target coordinates CSV")
    p_diag.add_argument("--loadings", required=True, help="loadings CSV (taxon,axis,estimate,...)")
    p_diag.add_argument("--no-center", action="store_true")
    p_diag.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"bspcoa: data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"bspcoa: numerical error: {exc}", file=sys.stderr)
        return 3


# ---------------------------------------------------------------------------
# shared helpers


def _prepare_outputs(args, names):
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {name: out_dir / name for name in names}
    if not args.force:
        existing = [str(p) for p in paths.values() if p.exists()]
        if existing:
            raise DataError(
                f"refusing to overwrite existing outputs (use --force): {', '.join(existing)}"
            )
    return paths


def _config_echo(args, extra=None):
    skip = {"func", "command"}
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    cfg["subcommand"] = args.command
    cfg["version"] = __version__
    if extra:
        cfg.update(extra)
    return cfg


def _config_comment(echo):
    return "# config: " + json.dumps(echo, sort_keys=True, default=str)


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _load_table(args):
    table = parse_count_table(args.input, delimiter=args.delimiter)
    if args.prevalence_threshold is not None:
        table, dropped = prevalence_filter(table, args.prevalence_threshold)
        print(
            f"prevalence filter ({args.prevalence_threshold}): dropped {dropped} taxa, "
            f"{table.n_taxa} remain",
            file=sys.stderr,
        )
    if args.relative_abundance:
        table = to_relative_abundance(table)
    return table


def _read_labels(path, row_ids):
    path = Path(path)
    if not path.exists():
        raise DataError(f"labels file not found: {path}")
    mapping = {}
    with open(path, newline="") as fh:
        first = fh.readline()
        delim = "\t" if "\t" in first else ","
        fh.seek(0)
        for line_no, row in enumerate(csv.reader(fh, delimiter=delim), start=1):
            if not row or row[0].startswith("#"):
                continue
            if line_no == 1 and row[0].strip().lower() in ("sample_id", "sample", "id"):
                continue
            if len(row) < 2:
                raise DataError(f"{path}: line {line_no} needs two fields (sample_id, label)")
            mapping[row[0].strip()] = row[1].strip()
    missing = [rid for rid in row_ids if rid not in mapping]
    if missing:
        raise DataError(f"{path}: no label for sample {missing[0]!r}")
    return np.asarray([mapping[rid] for rid in row_ids])


def _resolve_config(args, n, p):
    hyper = None
    if args.tau is not None:
        hyper = TpbnHyper(u=0.5, a=0.5, tau=args.tau)
    cfg = BspcoaConfig(
        k=args.k,
        hyper=hyper,
        mcmc_iters=args.iters,
        burn_in=args.burn_in,
        ci_level=args.ci_level,
        max_outer=args.max_outer,
        outer_tol=args.outer_tol,
        seed=args.seed,
        center_x=not args.no_center,
    )
    tau_eff = args.tau if args.tau is not None else TpbnHyper.horseshoe(n=n, p=p).tau
    return cfg, tau_eff


def _write_coordinates(path, echo, row_ids, blocks):
    """blocks: list of (prefix, matrix) written side by side."""
    with open(path, "w", newline="") as fh:
        fh.write(_config_comment(echo) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        header = ["sample_id"]
        for prefix, mat in blocks:
            header.extend(f"{prefix}_{r + 1}" for r in range(mat.shape[1]))
        writer.writerow(header)
        for i, rid in enumerate(row_ids):
            row = [rid]
            for _, mat in blocks:
                row.extend(fmt_float(v) for v in mat[i])
            writer.writerow(row)


def _write_loadings(path, echo, col_ids, result):
    with open(path, "w", newline="") as fh:
        fh.write(_config_comment(echo) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["taxon", "axis", "estimate", "ci_lower", "ci_upper", "selected"])
        p, k = result.B_hat.shape
        for j in range(p):
            for r in range(k):
                writer.writerow(
                    [
                        col_ids[j],
                        r + 1,
                        fmt_float(result.B_hat[j, r]),
                        fmt_float(result.ci_lower[j, r]),
                        fmt_float(result.ci_upper[j, r]),
                        "true" if result.selected_rows[j] else "false",
                    ]
                )


# ---------------------------------------------------------------------------
# subcommands


def cmd_fit(args) -> int:
    table = _load_table(args)
    labels = _read_labels(args.labels, table.row_ids) if args.labels else None
    X = table.to_feature_matrix()
    n, p = X.values.shape
    cfg, tau_eff = _resolve_config(args, n, p)
    echo = _config_echo(args, extra={"tau_effective": tau_eff, "n": n, "p": p})

    names = ["coordinates.csv", "loadings.csv", "diagnostics.json"]
    if args.plot:
        names += ["ordination.svg", "loadings_heatmap.svg"]
    paths = _prepare_outputs(args, names)

    D = DISTANCE_FUNCTIONS[args.distance](X)
    pco = pcoa(D, cfg.k)
    result = fit(X, D, cfg)
    Xc = X.values - result.x_offset
    surrogate = Xc @ result.B_hat

    _write_coordinates(
        paths["coordinates.csv"], echo, table.row_ids,
        [("pcoa", pco.coordinates), ("bspcoa", surrogate)],
    )
    _write_loadings(paths["loadings.csv"], echo, table.col_ids, result)

    sil = acc = None
    if labels is not None and surrogate.shape[1] >= 2 and np.unique(labels).size == 2:
        sil = silhouette_2d(surrogate[:, :2], labels)
        acc = bm_acc(labels, surrogate[:, :2], rng=np.random.default_rng([cfg.seed, 97]))
    report = DiagnosticsReport(
        delta_B=result.delta_res,
        exi_B=result.exi,
        delta_star=result.delta_star,
        exi_star=float(np.sqrt(max(0.0, 1.0 - result.delta_star**2))),
        var_explained_pc=tuple(float(v) for v in variance_explained(pco)),
        n_selected_taxa=result.n_selected,
        silhouette_2d=sil,
        bm_acc=acc,
    )
    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": echo,
        "diagnostics": _jsonable(report.to_dict()),
        "outer_iters_used": result.outer_iters_used,
        "converged": result.converged,
        "delta_res_trace": [float(v) for v in result.trace],
        "positive_eigenvalue_count": pco.positive_count,
    }
    _write_json(paths["diagnostics.json"], payload)

    if args.plot:
        if surrogate.shape[1] >= 2:
            scatter_panels_svg(
                [
                    ("PCoA", pco.coordinates[:, :2], labels),
                    ("BSPCoA", surrogate[:, :2], labels),
                ],
                paths["ordination.svg"],
            )
        else:
            print("skipping ordination.svg: need k >= 2", file=sys.stderr)
        if np.ptp(result.B_hat) > 0:
            heatmap_svg(
                rescale_loadings(result.B_hat),
                table.col_ids,
                [f"axis {r + 1}" for r in range(result.B_hat.shape[1])],
                paths["loadings_heatmap.svg"],
            )
        else:
            print("skipping loadings_heatmap.svg: constant loading matrix", file=sys.stderr)
    return 0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if np.isnan(v) else v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def cmd_simulate(args) -> int:
    paths = _prepare_outputs(args, ["results.csv"])
    spec = SCENARIOS[args.scenario]
    echo = _config_echo(args, extra={"spec": asdict(spec)})
    cfg, _ = _resolve_config(args, n=spec.n_a + spec.n_b, p=spec.p)
    rows = run_study(args.scenario, args.replicates, cfg, seed=args.seed)
    summary = summarize_study(rows)
    with open(paths["results.csv"], "w", newline="") as fh:
        fh.write(_config_comment(echo) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(STUDY_COLUMNS)
        for row in rows:
            writer.writerow([row["Method"], *(fmt_float(row[c]) for c in STUDY_COLUMNS[1:])])
        for method in ("PCoA", "BSPCoA"):
            for stat in ("mean", "sd"):
                vals = summary[method][stat]
                writer.writerow(
                    [f"{method} {stat}", *(fmt_float(vals[c]) for c in STUDY_COLUMNS[1:])]
                )
    return 0


def cmd_project(args) -> int:
    table = _load_table(args)
    X = table.to_feature_matrix()
    n, p = X.values.shape
    cfg, tau_eff = _resolve_config(args, n=min(args.subsample_m, n), p=p)
    echo = _config_echo(args, extra={"tau_effective": tau_eff, "n": n, "p": p})
    paths = _prepare_outputs(args, ["coordinates.csv", "loadings.csv", "timings.json"])

    timings = {"n": n, "m": args.subsample_m}
    if args.time_full_pcoa:
        t0 = time.perf_counter()
        DISTANCE_FUNCTIONS[args.distance](X)
        t1 = time.perf_counter()
        D_full = DISTANCE_FUNCTIONS[args.distance](X)
        pcoa(D_full, cfg.k)
        timings["full_pcoa_seconds"] = time.perf_counter() - t1
        timings["full_distance_seconds"] = t1 - t0
        del D_full
    else:
        timings["full_pcoa_seconds"] = None

    sub_seed = args.subsample_seed if args.subsample_seed is not None else args.seed
    t0 = time.perf_counter()
    result, _ = subsample_fit_project(
        X, cfg, args.subsample_m, args.distance, np.random.default_rng(sub_seed)
    )
    t1 = time.perf_counter()
    full_coords = (X.values - result.x_offset) @ result.B_hat
    timings["projection_seconds"] = time.perf_counter() - t1
    timings["subsample_fit_seconds"] = t1 - t0

    _write_coordinates(paths["coordinates.csv"], echo, table.row_ids, [("bspcoa", full_coords)])
    _write_loadings(paths["loadings.csv"], echo, table.col_ids, result)
    _write_json(
        paths["timings.json"],
        {"schema_version": SCHEMA_VERSION, "config": echo, "timings": _jsonable(timings)},
    )
    return 0


def _read_loadings_long(path, col_ids):
    """Read the long-format loadings written by cmd_fit back into a matrix."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"loadings file not found: {path}")
    entries = {}
    max_axis = 0
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for row in reader:
            if not row or row[0].startswith("#"):
                continue
            if row[0] == "taxon":
                continue
            taxon, axis, estimate = row[0], int(row[1]), float(row[2])
            entries[(taxon, axis)] = estimate
            max_axis = max(max_axis, axis)
    if not entries:
        raise DataError(f"{path}: no loading entries found")
    B = np.zeros((len(col_ids), max_axis))
    index = {t: j for j, t in enumerate(col_ids)}
    for (taxon, axis), val in entries.items():
        if taxon not in index:
            raise DataError(f"{path}: loading for unknown taxon {taxon!r}")
        B[index[taxon], axis - 1] = val
    return B


def cmd_diagnose(args) -> int:
    table = _load_table(args)
    X = table.to_feature_matrix()
    echo = _config_echo(args)
    paths = _prepare_outputs(args, ["diagnostics.json"])

    ids, colnames, mat = read_matrix_csv(args.coordinates)
    pcoa_cols = [j for j, c in enumerate(colnames) if c.startswith("pcoa_")]
    Z = mat[:, pcoa_cols] if pcoa_cols else mat
    if list(ids) != list(table.row_ids):
        raise DataError("coordinate sample IDs do not match the input table")
    B = _read_loadings_long(args.loadings, table.col_ids)
    if B.shape[1] != Z.shape[1]:
        raise DataError(
            f"loadings have {B.shape[1]} axes but coordinates have {Z.shape[1]}"
        )
    Xc = X.values - (X.values.mean(axis=0) if not args.no_center else 0.0)
    d_res = delta(B, Xc, Z)
    try:
        exi_val = exi(B, Xc, Z)
    except DataError:
        exi_val = None
    dstar, _ = delta_star(Xc, Z)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "config": echo,
        "diagnostics": _jsonable(
            {
                "delta_B": d_res,
                "exi_B": exi_val,
                "delta_star": dstar,
                "exi_star": float(np.sqrt(max(0.0, 1.0 - dstar**2))),
            }
        ),
    }
    _write_json(paths["diagnostics.json"], payload)
    return 0


if __name__ == "__main__":
    sys.exit(main())
