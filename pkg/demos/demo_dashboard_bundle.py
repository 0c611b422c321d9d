"""Build an audit bundle with AER cells and nutritional cards, the JSON the
dashboard consumes.

    python3 demos/demo_dashboard_bundle.py
"""
import json
import tempfile
from pathlib import Path

from hubfair import (SynthConfig, ViewConfig, audit_bundle_consistency,
                     build_bundle, generate, save_bundle)

config = SynthConfig(seed=9, n_counties=150, n_weeks=12,
                     planted_effects=(("pct_hispanic", 1.03),),
                     noise_sd=0.05,
                     race_alpha=(6.0, 4.0, 4.0, 3.0, 1.0))  # mixed pluralities
panel, trim = generate(config).to_panel(trim_frac=0.01)

bundle = build_bundle(panel, ViewConfig(group_by="race"),
                      run_manifest={"config_hash": "demo", "n_obs": panel.n,
                                    "trimmed": trim.to_dict()})
print(f"teams: {[t['team_id'] for t in bundle['teams']]}")
for team in bundle["teams"]:
    populated = [c for c in team["cells"] if c["aer"] is not None]
    print(f"  {team['team_id']}: {len(populated)} populated AER cells, "
          f"median AER {team['median_aer']:.3f}, {len(team['cards'])} cards")

card = next(c for c in bundle["teams"][0]["cards"]
            if c["view"]["group"] == "Hispanic"
            and c["view"]["phase"] == "all" and c["view"]["lookahead"] == "all")
print("\nsample nutritional card (Hispanic vs White, all phases, all lookaheads):")
print(json.dumps(card, indent=2))

drift = audit_bundle_consistency(bundle)
print(f"\nself-consistency audit: max card-vs-cells discrepancy {drift:.2e}")

out = Path(tempfile.mkdtemp(prefix="hubfair_bundle_")) / "bundle.json"
save_bundle(bundle, out)
print(f"bundle written to {out} "
      f"({out.stat().st_size / 1024:.0f} KiB); point the dashboard at it")
