"""Command-line entry point.

Subcommands map one-to-one onto the harness runners:

    spectrum       diagonalize seeded draws, export spectra.csv + histogram
    sweep          distance metrics per (n, replica) -> rows.csv
    concentration  exceedance frequencies and the e^{-c n t^2} fit
    lipschitz      coefficient-space Lipschitz contract ratios
    cf             characteristic-function deviation statistic
    gclass         sup over the piecewise-linear test class, m/R trade-off
    sphere         spherical-model pipeline (d_BL to held-out DOS + series)
    moments        exact Wick moments vs Monte Carlo / Hutchinson

Settings come from --config JSON overridden by flags; every run writes
meta.json capturing the full effective configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .ensembles import CustomLawSpec


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=str, help="JSON config file")
    p.add_argument("--seed", type=int, help="master seed (64-bit)")
    p.add_argument("--out", type=str, help="output directory")
    p.add_argument("--threads", type=int, help="worker threads")
    p.add_argument("--replicas", type=int, help="replicas per n")
    p.add_argument("--n-list", type=str, help="comma-separated site counts")
    p.add_argument("--law", type=str, choices=("gaussian_iid", "sphere", "custom"))
    p.add_argument("--model", type=str, help='geometry: "chain", "pspin:<p>", or a JSON file path')
    p.add_argument("--t-grid", type=str, help="comma-separated t values")
    p.add_argument("--no-plots", action="store_true", help="skip figure rendering")


def _parse_model(text: str) -> dict:
    if text == "chain":
        return {"model": "chain"}
    if text.startswith("pspin:"):
        return {"model": "pspin", "p": int(text.split(":", 1)[1])}
    path = Path(text)
    if path.exists():
        return json.loads(path.read_text())
    raise SystemExit(f"cannot parse model {text!r}")


def _build_config(args, **defaults) -> harness.ExperimentConfig:
    settings = dict(defaults)
    if args.config:
        settings.update(json.loads(Path(args.config).read_text()))
    if args.seed is not None:
        settings["master_seed"] = args.seed
    if args.out is not None:
        settings["output_dir"] = args.out
    if args.threads is not None:
        settings["threads"] = args.threads
    if args.replicas is not None:
        settings["replicas"] = args.replicas
    if args.n_list is not None:
        settings["n_list"] = tuple(int(s) for s in args.n_list.split(","))
    if args.law is not None:
        settings["law"] = args.law
    if args.model is not None:
        settings["model"] = _parse_model(args.model)
    if args.t_grid is not None:
        settings["t_grid"] = tuple(float(s) for s in args.t_grid.split(","))
    if isinstance(settings.get("custom_law"), dict):
        settings["custom_law"] = CustomLawSpec(**settings["custom_law"])
    if isinstance(settings.get("metrics"), list):
        settings["metrics"] = tuple(settings["metrics"])
    return harness.ExperimentConfig(**settings)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spinglass",
        description="quantum spin-glass spectral laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="export eigenvalue CSV and histogram")
    _add_common(p)
    p.add_argument("--method", default="lapack", choices=("lapack", "ql"))

    p = sub.add_parser("sweep", help="distance metrics per (n, replica)")
    _add_common(p)
    p.add_argument("--metrics", type=str, help="comma-separated metric names")

    p = sub.add_parser("concentration", help="exceedance-frequency experiment")
    _add_common(p)
    p.add_argument("--offsets", type=str, default="0.005,0.01,0.02")

    p = sub.add_parser("lipschitz", help="Lipschitz contract check")
    _add_common(p)
    p.add_argument("--pairs", type=int, default=100)

    p = sub.add_parser("cf", help="characteristic-function bound check")
    _add_common(p)

    p = sub.add_parser("gclass", help="test-class supremum trade-off")
    _add_common(p)
    p.add_argument("--m-list", type=str, default="16,64,256")
    p.add_argument("--r-mode", type=str, default="sqrt_n")
    p.add_argument("--f-samples", type=int, default=64)

    p = sub.add_parser("sphere", help="spherical-model pipeline")
    _add_common(p)

    p = sub.add_parser("moments", help="exact moments vs estimates")
    _add_common(p)
    p.add_argument("--stochastic-n", type=int, help="n for the Hutchinson check")
    p.add_argument("--probes", type=int, default=64)

    args = parser.parse_args(argv)
    out_dir = None

    if args.command == "spectrum":
        config = _build_config(args, replicas=1, n_list=(8,))
        out_dir = Path(config.output_dir or "spinglass-out")
        measures = harness.run_spectrum(config, out_dir, method=args.method)
        if not args.no_plots:
            from . import plots

            plots.spectrum_figure(measures, out_dir / "spectrum.png")
        print(f"wrote {out_dir}/spectra.csv ({len(measures)} spectra)")
        return 0

    if args.command == "sweep":
        config = _build_config(args, replicas=50)
        if args.metrics:
            config.metrics = tuple(args.metrics.split(","))
        report = harness.run_distance_sweep(config)
    elif args.command == "concentration":
        config = _build_config(args, replicas=500, n_list=(6, 10))
        offsets = tuple(float(s) for s in args.offsets.split(","))
        report = harness.run_concentration(config, offsets)
    elif args.command == "lipschitz":
        config = _build_config(args, replicas=2, n_list=(4, 6))
        report = harness.run_lipschitz_check(config, pairs=args.pairs)
    elif args.command == "cf":
        config = _build_config(args, replicas=100, n_list=(6, 8, 10))
        report = harness.run_cf_check(config)
    elif args.command == "gclass":
        config = _build_config(args, replicas=20, n_list=(8,))
        m_list = tuple(int(s) for s in args.m_list.split(","))
        report = harness.run_g_class_sup(config, m_list, args.r_mode, args.f_samples)
    elif args.command == "sphere":
        config = _build_config(args, replicas=100, n_list=(4, 6, 8), law="sphere")
        report = harness.run_sphere_pipeline(config)
    elif args.command == "moments":
        config = _build_config(args, replicas=200, n_list=(4, 6))
        report = harness.run_moment_check(config, stochastic_n=args.stochastic_n, n_probes=args.probes)
    else:  # pragma: no cover
        parser.error(f"unknown command {args.command}")
        return 2

    out_dir = Path(config.output_dir or "spinglass-out")
    report.write(out_dir)
    if not args.no_plots:
        from . import plots

        figures = plots.render_report(report, out_dir)
        note = f" + {len(figures)} figure(s)" if figures else ""
    else:
        note = ""
    print(f"wrote rows.csv, aggregates.csv, fits.json, meta.json to {out_dir}{note}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
