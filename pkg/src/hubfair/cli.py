"""Command-line surface: score / fit / bundle / synth / serve-export.

A YAML run configuration drives the pipeline; a handful of flags override
the file. Exit codes: 0 success, 1 analysis failure, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import shutil
import sys
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import __version__
from .design import MODEL_CATALOG, build_design
from .diagnostics import fit_diagnostics, screen_collinearity
from .errors import AnalysisError, HubfairError, InputDataError
from .fairness import (ViewConfig, audit_bundle_consistency, build_bundle,
                       config_hash, relative_effects, save_bundle)
from .glm import fit_glm
from .ingest import (join_panel, parse_covariates, parse_forecasts,
                     parse_metadata, parse_truth)
from .metrics import QUANTILE_LEVELS
from .panel import build_panel
from .phases import load_phase_config
from .synth import SynthConfig, generate

EXIT_OK, EXIT_ANALYSIS, EXIT_INPUT = 0, 1, 2


@dataclass
class RunConfig:
    forecasts: list = field(default_factory=list)  # files or directories
    truth: str = ""
    demographics: str = ""
    urbanization: str = ""
    health: str = ""
    metadata: str = ""
    quantiles: tuple = QUANTILE_LEVELS
    trim_frac: float = 0.01
    scale_factor: float = 100_000.0
    phases: str = "default"
    specs: list = field(default_factory=lambda: ["GLM-1", "GLM-2"])
    gvif_threshold: float = 2.0
    group: str = "race"
    seed: int = 0
    threads: int = 1
    out_dir: str = "out"

    @classmethod
    def load(cls, path, overrides=None):
        raw = {}
        if path:
            p = Path(path)
            if not p.exists():
                raise InputDataError(f"config file not found: {p}")
            raw = yaml.safe_load(p.read_text()) or {}
        unknown = set(raw) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise InputDataError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**raw)
        for key, value in (overrides or {}).items():
            if value is not None:
                setattr(cfg, key, value)
        if not cfg.specs:
            raise InputDataError("config must request at least one model spec")
        bad = [s for s in cfg.specs if s not in MODEL_CATALOG]
        if bad:
            raise InputDataError(
                f"unknown model specs {bad}; available: {sorted(MODEL_CATALOG)}")
        return cfg

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @property
    def hash(self):
        return config_hash(self.to_dict())


def _forecast_files(cfg):
    files = []
    for entry in cfg.forecasts:
        p = Path(entry)
        if p.is_dir():
            files.extend(sorted(p.glob("*.csv")))
        elif p.exists():
            files.append(p)
        else:
            raise InputDataError(f"forecast path not found: {p}")
    if not files:
        raise InputDataError("no forecast files configured")
    return files


def _require(path, what):
    if not path or not Path(path).exists():
        raise InputDataError(f"{what} file not found: {path!r}")
    return path


def _score(cfg):
    """Shared ingest + scoring path; returns (panel, trim report, drop info)."""
    phase_config = load_phase_config(cfg.phases)
    forecasts = []
    parse_stats = {}
    for path in _forecast_files(cfg):
        res = parse_forecasts(path, cfg.quantiles)
        forecasts.extend(res.records)
        parse_stats[Path(path).name] = {
            "rows": len(res.records),
            "dropped_non_county": res.dropped_non_county,
            "excluded_incomplete_groups": res.excluded_incomplete_groups,
            "repaired_crossings": res.repaired_crossings,
            "row_errors": len(res.row_errors),
        }
    cov = parse_covariates(_require(cfg.demographics, "demographics"),
                           _require(cfg.urbanization, "urbanization"),
                           _require(cfg.health, "health"))
    truth = parse_truth(_require(cfg.truth, "truth"), known_fips=set(cov.covariates))
    meta = parse_metadata(_require(cfg.metadata, "metadata"))
    joined = join_panel(forecasts, truth.records, cov.covariates, meta, phase_config)
    if not joined.rows:
        raise InputDataError("join produced no scored rows; check input alignment")
    panel, trim_report = build_panel(joined, cfg.scale_factor, cfg.trim_frac)
    info = {
        "files": parse_stats,
        "counties_retained": cov.retained,
        "drop_counts": dict(joined.drop_counts),
        "clamped_negative_truth": truth.clamped_negative,
    }
    return panel, trim_report, info


def _write_manifest(cfg, out, trim_report, extra=None):
    manifest = {
        "config_hash": cfg.hash,
        "config": cfg.to_dict(),
        "n_obs": extra.get("n_obs") if extra else None,
        "trimmed": trim_report.to_dict() if trim_report else {},
        **(extra or {}),
    }
    with open(out / "run_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return manifest


def cmd_score(cfg):
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    panel, trim_report, info = _score(cfg)
    panel.write_csv(out / "panel.csv")
    with open(out / "trim_report.json", "w") as fh:
        json.dump(trim_report.to_dict(), fh, indent=2)
        fh.write("\n")
    _write_manifest(cfg, out, trim_report, {"n_obs": panel.n, "ingest": info})
    print(f"scored panel: {panel.n} observations -> {out / 'panel.csv'}")
    print(f"trimmed {trim_report.n_removed} of {trim_report.n_input} "
          f"(threshold {trim_report.threshold:.6g})")
    return EXIT_OK


def _fit_one(cfg, panel, name):
    design = build_design(MODEL_CATALOG[name], panel)
    reduced, removal_log, gvif_report = screen_collinearity(
        design, threshold=cfg.gvif_threshold)
    fit = fit_glm(reduced, link="log")
    diag = fit_diagnostics(fit, reduced)
    effects = (relative_effects(fit, reduced)
               if MODEL_CATALOG[name].interaction_with else [])
    return reduced, removal_log, gvif_report, fit, diag, effects


def cmd_fit(cfg):
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    panel, trim_report, info = _score(cfg)

    failures = {}
    all_effects = []
    summary = {}
    results = {}
    if cfg.threads > 1 and len(cfg.specs) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            futures = {name: pool.submit(_fit_one, cfg, panel, name)
                       for name in cfg.specs}
        for name, fut in futures.items():
            results[name] = fut
    for name in cfg.specs:
        try:
            if name in results:
                reduced, removal_log, gvif_report, fit, diag, effects = \
                    results[name].result()
            else:
                reduced, removal_log, gvif_report, fit, diag, effects = _fit_one(
                    cfg, panel, name)
        except AnalysisError as exc:
            failures[name] = str(exc)
            print(f"[{name}] FAILED: {exc}", file=sys.stderr)
            continue
        tag = name.lower().replace("-", "")
        fit.to_table().to_csv(out / f"coefficients_{tag}.csv", index=False)
        gvif_report.to_frame(removed=[r.term for r in removal_log]).to_csv(
            out / f"gvif_{tag}.csv", index=False)
        if effects:
            import pandas as pd
            pd.DataFrame([e.to_dict(model=name) for e in effects]).to_csv(
                out / f"relative_effects_{tag}.csv", index=False)
            all_effects.extend(e.to_dict(model=name) for e in effects)
        summary[name] = {
            "n": fit.n, "p": fit.p, "iterations": fit.iterations,
            "pseudo_r2_cs": fit.pseudo_r2_cs,
            "removed_terms": [r.term for r in removal_log],
            "max_cooks": diag.max_cooks,
        }
        print(f"[{name}] n={fit.n} p={fit.p} pseudoR2={fit.pseudo_r2_cs:.3f} "
              f"removed={[r.term for r in removal_log]}")
    _write_manifest(cfg, out, trim_report,
                    {"n_obs": panel.n, "fits": summary, "failures": failures,
                     "ingest": info})
    if all_effects:
        with open(out / "relative_effects.json", "w") as fh:
            json.dump(all_effects, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if failures and len(failures) == len(cfg.specs):
        return EXIT_ANALYSIS
    return EXIT_OK


def cmd_bundle(cfg):
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    panel, trim_report, info = _score(cfg)
    effects = []
    for name in cfg.specs:
        if MODEL_CATALOG[name].interaction_with is None:
            continue
        if MODEL_CATALOG[name].sensitive_block != cfg.group:
            continue
        try:
            _, _, _, fit, _, eff = _fit_one(cfg, panel, name)
            effects.extend(e.to_dict(model=name) for e in eff)
        except AnalysisError as exc:
            print(f"[{name}] skipped in bundle: {exc}", file=sys.stderr)
    bundle = build_bundle(
        panel, ViewConfig(group_by=cfg.group), effects,
        run_manifest={"config_hash": cfg.hash, "n_obs": panel.n,
                      "trimmed": trim_report.to_dict()})
    audit_bundle_consistency(bundle)
    save_bundle(bundle, out / "bundle.json")
    cells = sum(len(t["cells"]) for t in bundle["teams"])
    medians = {t["team_id"]: t["median_aer"] for t in bundle["teams"]}
    print(f"bundle: {len(bundle['teams'])} teams, {cells} cells -> "
          f"{out / 'bundle.json'}")
    for team, med in sorted(medians.items()):
        print(f"  {team}: median AER {med if med is None else round(med, 3)}")
    return EXIT_OK


def cmd_synth(cfg, args):
    out = Path(args.out or cfg.out_dir)
    planted = []
    for item in args.plant or []:
        label, _, value = item.partition("=")
        if not value:
            raise InputDataError(f"--plant expects label=effect, got {item!r}")
        planted.append((label, float(value)))
    synth_cfg = SynthConfig(seed=cfg.seed, n_counties=args.counties,
                            n_weeks=args.weeks,
                            planted_effects=tuple(planted),
                            noise_sd=args.noise_sd,
                            outlier_frac=args.outlier_frac)
    data = generate(synth_cfg)
    paths = data.write(out)
    echo = {
        "seed": cfg.seed, "n_counties": args.counties, "n_weeks": args.weeks,
        "planted_effects": planted, "noise_sd": args.noise_sd,
        "outlier_frac": args.outlier_frac,
        "files": {k: str(v) if not isinstance(v, list) else [str(x) for x in v]
                  for k, v in paths.items()},
    }
    with open(out / "synth_config.json", "w") as fh:
        json.dump(echo, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"synthetic corpus ({data.n} forecast groups) -> {out}")
    return EXIT_OK


def cmd_serve_export(cfg, args):
    out = Path(args.out or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bundle_path = Path(args.bundle)
    if not bundle_path.exists():
        raise InputDataError(f"bundle not found: {bundle_path}")
    shutil.copy(bundle_path, out / "bundle.json")
    dist = Path(args.assets) if args.assets else Path(__file__).resolve(
    ).parents[2] / "frontend" / "dist"
    if dist.is_dir():
        for item in dist.iterdir():
            target = out / item.name
            if item.is_dir():
                shutil.copytree(item, target, dirs_exist_ok=True)
            else:
                shutil.copy(item, target)
        print(f"dashboard assets + bundle -> {out} (open index.html)")
    else:
        print(f"bundle -> {out}; dashboard assets not built "
              f"(expected {dist}); run the frontend build first")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hubfair",
        description="Fairness audit pipeline for county-level quantile forecasts")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML run configuration")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--threads", type=int, help="worker thread cap")
        p.add_argument("--trim", type=float, help="trim fraction override")
        p.add_argument("--specs", help="comma-separated model specs")
        p.add_argument("--group", choices=["race", "urbanicity"],
                       help="protected grouping for bundles")
        p.add_argument("--seed", type=int, help="seed override")

    for name in ("score", "fit", "bundle"):
        common(sub.add_parser(name, help=f"run the {name} stage"))

    synth = sub.add_parser("synth", help="write a synthetic corpus")
    common(synth)
    synth.add_argument("--counties", type=int, default=300)
    synth.add_argument("--weeks", type=int, default=40)
    synth.add_argument("--noise-sd", type=float, default=0.05)
    synth.add_argument("--outlier-frac", type=float, default=0.0)
    synth.add_argument("--plant", action="append",
                       help="planted effect label=value (repeatable)")

    serve = sub.add_parser("serve-export",
                           help="copy the bundle beside the dashboard assets")
    common(serve)
    serve.add_argument("--bundle", required=True, help="bundle.json to export")
    serve.add_argument("--assets", help="built dashboard asset directory")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {
        "out_dir": args.out,
        "threads": args.threads,
        "trim_frac": args.trim,
        "group": args.group,
        "seed": args.seed,
        "specs": args.specs.split(",") if getattr(args, "specs", None) else None,
    }
    try:
        cfg = RunConfig.load(args.config, overrides)
        if args.command == "score":
            return cmd_score(cfg)
        if args.command == "fit":
            return cmd_fit(cfg)
        if args.command == "bundle":
            return cmd_bundle(cfg)
        if args.command == "synth":
            return cmd_synth(cfg, args)
        if args.command == "serve-export":
            return cmd_serve_export(cfg, args)
        raise InputDataError(f"unknown command {args.command!r}")
    except InputDataError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except HubfairError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
