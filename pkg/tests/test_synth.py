import filecmp

import numpy as np
import pytest

from hubfair.design import MODEL_CATALOG, build_design
from hubfair.errors import InputDataError
from hubfair.glm import fit_glm
from hubfair.ingest import (join_panel, parse_covariates, parse_forecasts,
                            parse_metadata, parse_truth)
from hubfair.panel import build_panel
from hubfair.phases import DEFAULT_PHASES
from hubfair.synth import SynthConfig, generate


def small_config(**overrides):
    base = dict(seed=7, n_counties=60, n_weeks=6,
                planted_effects=(("pct_hispanic", 1.2),), noise_sd=0.05)
    base.update(overrides)
    return SynthConfig(**base)


class TestDeterminism:
    def test_same_seed_same_arrays(self):
        a, b = generate(small_config()), generate(small_config())
        np.testing.assert_array_equal(a.forecast_values, b.forecast_values)
        np.testing.assert_array_equal(a.truth_cases, b.truth_cases)

    def test_same_seed_byte_identical_files(self, tmp_path):
        generate(small_config()).write(tmp_path / "a")
        generate(small_config()).write(tmp_path / "b")
        names = sorted(str(p.relative_to(tmp_path / "a"))
                       for p in (tmp_path / "a").rglob("*") if p.is_file())
        match, mismatch, errors = filecmp.cmpfiles(
            tmp_path / "a", tmp_path / "b", names, shallow=False)
        assert not mismatch and not errors
        assert set(match) == set(names)

    def test_different_seed_differs(self):
        a = generate(small_config())
        b = generate(small_config(seed=8))
        assert not np.array_equal(a.forecast_values, b.forecast_values)


class TestValidation:
    def test_min_counties_enforced(self):
        with pytest.raises(InputDataError):
            small_config(n_counties=10)

    def test_non_positive_effect_rejected(self):
        with pytest.raises(InputDataError):
            small_config(planted_effects=(("pct_hispanic", 0.0),))

    def test_infeasible_noise_is_error(self):
        with pytest.raises(InputDataError, match="non-positive"):
            generate(small_config(base_sqrt_pbl=0.01, noise_sd=5.0))

    def test_unknown_label_rejected(self):
        with pytest.raises(InputDataError, match="label"):
            generate(small_config(planted_effects=(("pct_klingon", 1.2),)))


class TestPipelineAgreement:
    def test_file_path_matches_array_path(self, tmp_path):
        """Writing files and re-ingesting reproduces the in-memory panel."""
        data = generate(small_config(n_weeks=3, lookaheads=(7, 14)))
        paths = data.write(tmp_path)

        forecasts = []
        for fp in paths["forecasts"]:
            res = parse_forecasts(fp)
            assert not res.row_errors
            forecasts.extend(res.records)
        truth = parse_truth(paths["truth"]).records
        cov = parse_covariates(paths["demographics"], paths["urbanization"],
                               paths["health"]).covariates
        meta = parse_metadata(paths["metadata"])
        joined = join_panel(forecasts, truth, cov, meta, DEFAULT_PHASES)
        assert sum(joined.drop_counts.values()) == 0
        file_panel, _ = build_panel(joined, scale_factor=data.config.scale_factor)

        mem_panel, _ = data.to_panel()
        key = lambda p: sorted(zip(p.team_id, p.fips, p.week_end, p.lookahead,
                                   np.round(p.pbl_norm, 9)))
        assert key(file_panel) == key(mem_panel)

    def test_scored_panel_reproduces_targets(self):
        data = generate(small_config(noise_sd=0.0))
        panel, _ = data.to_panel()
        # pipeline-scored sqrt pbl equals the planted expectation exactly
        np.testing.assert_allclose(np.sort(panel.sqrt_pbl),
                                   np.sort(data.target_sqrt), rtol=1e-9)


class TestRecovery:
    def test_zero_effects_zero_noise_recovers_flat_model(self):
        data = generate(small_config(planted_effects=(), noise_sd=0.0))
        panel, _ = data.to_panel()
        design = build_design(MODEL_CATALOG["GLM-1"], panel)
        fit = fit_glm(design, link="log")
        sensitive = [design.column_labels.index(lab)
                     for lab in design.sensitive_labels]
        assert np.all(np.abs(fit.beta[sensitive]) < 1e-6)

    def test_planted_effect_recovered(self):
        cfg = small_config(n_counties=120, n_weeks=10, noise_sd=0.1,
                           planted_effects=(("pct_hispanic", 1.2),))
        panel, _ = generate(cfg).to_panel()
        design = build_design(MODEL_CATALOG["GLM-1"], panel)
        fit = fit_glm(design, link="log")
        i = design.column_labels.index("pct_hispanic")
        lo, hi = fit.ci95[i]
        assert lo <= np.log(1.2) <= hi

    def test_outlier_rows_trimmed_back_out(self):
        cfg = small_config(outlier_frac=0.01)
        data = generate(cfg)
        panel_trimmed, report = data.to_panel(trim_frac=0.01)
        k = int(np.floor(data.n * 0.01))
        assert report.n_removed == k
        # the trim removed exactly the k inflated rows: every inflated target
        # sits above the surviving maximum
        full, _ = data.to_panel(trim_frac=0.0)
        inflated = np.sort(full.pbl_norm)[-k:]
        assert panel_trimmed.pbl_norm.max() < inflated.min()
        np.testing.assert_allclose(np.sort(full.pbl_norm)[:-k],
                                   np.sort(panel_trimmed.pbl_norm), rtol=1e-12)
