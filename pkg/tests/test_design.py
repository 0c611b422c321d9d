import numpy as np
import pytest

from hubfair.design import (MODEL_CATALOG, ModelSpec, build_design,
                            expected_column_count, hypothesis_vector)
from hubfair.errors import InputDataError
from hubfair.glm import fit_glm, predict

from conftest import make_panel


class TestBuildDesign:
    def test_race_main_effects_structure(self, panel):
        design = build_design(MODEL_CATALOG["GLM-1"], panel)
        assert design.column_labels[0] == "intercept"
        assert design.column_labels[1:4] == ("pct_black", "pct_hispanic", "pct_asian")
        assert design.sensitive_labels == ("pct_black", "pct_hispanic", "pct_asian")
        # treatment coding: 4 lookaheads -> 3 dummies
        assert design.term_groups["lookahead"] == tuple(
            design.column_labels.index(f"lookahead{k}") for k in (14, 21, 28))

    def test_four_level_factor_gives_three_dummies(self, panel):
        design = build_design(MODEL_CATALOG["GLM-1"], panel)
        assert len(design.term_groups["lookahead"]) == 3

    def test_urbanicity_sensitive_columns(self, panel):
        design = build_design(MODEL_CATALOG["GLM-2"], panel)
        assert design.sensitive_labels == ("urb_smm", "urb_mc")
        assert set(design.term_groups["urbanicity"]) == {
            design.column_labels.index("urb_smm"),
            design.column_labels.index("urb_mc")}

    def test_race_by_lookahead_interaction_count(self, panel):
        design = build_design(MODEL_CATALOG["GLM-1a"], panel)
        inter = [lab for lab in design.column_labels if ":" in lab]
        assert len(inter) == 9  # 3 race shares x 3 non-reference lookaheads
        assert "pct_hispanic:lookahead14" in inter

    def test_column_count_formula(self, panel):
        design = build_design(MODEL_CATALOG["GLM-1a"], panel)
        n_states = len(set(panel.state))
        expected = expected_column_count(
            n_sensitive=3,
            factor_levels=[4, 3, 2, 2],  # lookahead, phase, model type, mobility
            n_interactions=9,
            n_controls=9 + 1,            # health outcomes + age 65+
            n_states=n_states)
        assert design.p == expected
        assert design.p == len(design.column_labels)
        assert len(set(design.column_labels)) == design.p

    def test_interaction_columns_are_products(self, panel):
        design = build_design(MODEL_CATALOG["GLM-1a"], panel)
        x = design.X
        i = design.column_labels.index("pct_hispanic:lookahead14")
        j = design.column_labels.index("pct_hispanic")
        k = design.column_labels.index("lookahead14")
        np.testing.assert_allclose(x[:, i], x[:, j] * x[:, k])

    def test_deterministic_rebuild(self, panel):
        d1 = build_design(MODEL_CATALOG["GLM-2b"], panel)
        d2 = build_design(MODEL_CATALOG["GLM-2b"], panel)
        assert d1.column_labels == d2.column_labels
        np.testing.assert_array_equal(d1.X, d2.X)

    def test_missing_reference_level_errors(self, panel):
        spec = ModelSpec(name="bad", sensitive_block="race",
                         reference_levels=(("lookahead", 35), ("phase", 0),
                                           ("model_type", "Compartmental"),
                                           ("mobility", "No"), ("urbanicity", "LM")))
        with pytest.raises(InputDataError, match="reference level"):
            build_design(spec, panel)

    def test_single_level_factor_contributes_no_columns(self):
        panel = make_panel(mobilities=("No",))
        design = build_design(MODEL_CATALOG["GLM-1"], panel)
        assert not any(lab.startswith("mobility") for lab in design.column_labels)

    def test_empty_panel_rejected(self, panel):
        import dataclasses
        empty = dataclasses.replace(panel, **{
            f.name: getattr(panel, f.name)[:0] for f in dataclasses.fields(panel)})
        with pytest.raises(InputDataError):
            build_design(MODEL_CATALOG["GLM-1"], empty)

    def test_drop_terms_reindexes(self, panel):
        design = build_design(MODEL_CATALOG["GLM-1"], panel)
        reduced = design.drop_terms(["CANCER"])
        assert "CANCER" not in reduced.column_labels
        assert reduced.p == design.p - 1
        for term, cols in reduced.term_groups.items():
            for c in cols:
                orig = design.column_labels.index(reduced.column_labels[c])
                np.testing.assert_array_equal(reduced.X[:, c], design.X[:, orig])

    def test_export_round_trip_labels(self, panel, tmp_path):
        design = build_design(MODEL_CATALOG["GLM-2"], panel)
        path = tmp_path / "design.csv"
        design.write_csv(path)
        import pandas as pd
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["sqrt_pbl", *design.column_labels]


class TestHypothesisVector:
    def test_interaction_level(self, panel):
        design = build_design(MODEL_CATALOG["GLM-1a"], panel)
        c = hypothesis_vector(design, "pct_hispanic", "lookahead", 14)
        hits = {design.column_labels[i] for i in np.flatnonzero(c)}
        assert hits == {"pct_hispanic", "pct_hispanic:lookahead14"}
        np.testing.assert_array_equal(np.sort(c[np.flatnonzero(c)]), [1.0, 1.0])

    def test_reference_level_selects_main_effect_only(self, panel):
        design = build_design(MODEL_CATALOG["GLM-1a"], panel)
        c = hypothesis_vector(design, "pct_hispanic", "lookahead", 7)
        assert np.flatnonzero(c).tolist() == [design.column_labels.index("pct_hispanic")]

    def test_phase_interaction(self, panel):
        design = build_design(MODEL_CATALOG["GLM-1b"], panel)
        c = hypothesis_vector(design, "pct_asian", "phase", 2)
        hits = {design.column_labels[i] for i in np.flatnonzero(c)}
        assert hits == {"pct_asian", "pct_asian:phase2"}

    def test_unknown_names_error(self, panel):
        design = build_design(MODEL_CATALOG["GLM-1a"], panel)
        with pytest.raises(InputDataError):
            hypothesis_vector(design, "pct_martian", "lookahead", 14)
        with pytest.raises(InputDataError):
            hypothesis_vector(design, "pct_hispanic", "lookahead", 35)
        with pytest.raises(InputDataError, match="interaction"):
            hypothesis_vector(design, "pct_hispanic", "phase", 1)


class TestReparameterization:
    def test_reference_swap_leaves_fitted_values_unchanged(self):
        panel = make_panel(n=300, seed=4)
        spec_a = MODEL_CATALOG["GLM-1"]
        refs = dict(spec_a.references)
        refs["lookahead"] = 21
        spec_b = ModelSpec(name="GLM-1-alt", sensitive_block="race",
                           reference_levels=tuple(sorted(refs.items())))
        fit_a = fit_glm(build_design(spec_a, panel), link="log")
        fit_b = fit_glm(build_design(spec_b, panel), link="log")
        np.testing.assert_allclose(fit_a.mu, fit_b.mu, atol=1e-8)

    def test_permuting_columns_permutes_beta(self, panel):
        import dataclasses
        design = build_design(MODEL_CATALOG["GLM-1"], panel)
        perm = np.arange(design.p)
        perm[1], perm[2] = perm[2], perm[1]
        permuted = dataclasses.replace(
            design, X=design.X[:, perm],
            column_labels=tuple(design.column_labels[i] for i in perm),
            term_groups={})
        fit = fit_glm(design, link="identity")
        fit_p = fit_glm(permuted, link="identity")
        np.testing.assert_allclose(fit.beta[perm], fit_p.beta, atol=1e-9)
        np.testing.assert_allclose(predict(fit, design.X),
                                   predict(fit_p, permuted.X), atol=1e-9)
