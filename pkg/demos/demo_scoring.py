"""Score a synthetic forecast corpus end to end.

Walks the ingest -> pinball -> normalize -> trim -> sqrt path on generated
files, printing what each stage did. Run from the repo root:

    python3 demos/demo_scoring.py
"""
import tempfile
from pathlib import Path

from hubfair import (DEFAULT_PHASES, SynthConfig, build_panel, generate,
                     join_panel, parse_covariates, parse_forecasts,
                     parse_metadata, parse_truth)

workdir = Path(tempfile.mkdtemp(prefix="hubfair_demo_"))
print(f"writing synthetic corpus to {workdir}")

config = SynthConfig(seed=42, n_counties=80, n_weeks=10,
                     planted_effects=(("pct_hispanic", 1.1), ("lookahead28", 1.3)),
                     noise_sd=0.05)
paths = generate(config).write(workdir)

forecasts = []
for path in paths["forecasts"]:
    result = parse_forecasts(path)
    print(f"{path.name}: {len(result.records)} quantile rows, "
          f"{result.excluded_incomplete_groups} incomplete groups, "
          f"{result.repaired_crossings} crossings repaired")
    forecasts.extend(result.records)

truth = parse_truth(paths["truth"])
print(f"truth: {len(truth.records)} county-weeks, "
      f"{truth.clamped_negative} negatives clamped")

cov = parse_covariates(paths["demographics"], paths["urbanization"], paths["health"])
print(f"covariates: {cov.retained} counties retained, "
      f"{cov.excluded_missing_source} dropped by the intersection rule")

meta = parse_metadata(paths["metadata"])
joined = join_panel(forecasts, truth.records, cov.covariates, meta, DEFAULT_PHASES)
print(f"join: {len(joined.rows)} scored groups, drops by cause: "
      f"{dict(joined.drop_counts)}")

panel, trim = build_panel(joined, scale_factor=config.scale_factor, trim_frac=0.01)
print(f"panel: {panel.n} observations after trimming {trim.n_removed} "
      f"(threshold {trim.threshold:.4g})")
print("\nfirst rows of the exported panel:")
print(panel.to_frame().head(8).to_string(index=False))
