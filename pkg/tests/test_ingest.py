from datetime import date, timedelta

import numpy as np
import pandas as pd
import pytest

from hubfair.errors import InputDataError
from hubfair.ingest import (HEALTH_OUTCOMES, QuantileForecast, TeamMetadata,
                            UrbanicityGroup, epi_week_end, join_panel,
                            parse_covariates, parse_forecasts, parse_metadata,
                            parse_truth, write_forecasts)
from hubfair.metrics import QUANTILE_LEVELS
from hubfair.phases import DEFAULT_PHASES


def forecast_frame(rows):
    return pd.DataFrame(rows, columns=["forecast_date", "target", "target_end_date",
                                       "location", "type", "quantile", "value"])


def group_rows(team="teamA", fips="24031", week="2020-07-11", n_wk=1, base=100.0,
               levels=QUANTILE_LEVELS):
    fdate = (date.fromisoformat(week) - timedelta(days=7 * n_wk - 2)).isoformat()
    return [{
        "forecast_date": fdate, "target": f"{n_wk} wk ahead inc case",
        "target_end_date": week, "location": fips, "type": "quantile",
        "quantile": q, "value": base + 10 * i,
    } for i, q in enumerate(levels)]


class TestParseForecasts:
    def test_single_group(self, tmp_path):
        path = tmp_path / "teamA.csv"
        forecast_frame(group_rows()).to_csv(path, index=False)
        res = parse_forecasts(path)
        assert len(res.records) == 7
        rec = res.records[3]
        assert rec == QuantileForecast(team_id="teamA",
                                       forecast_date=date(2020, 7, 6),
                                       lookahead_days=7,
                                       target_end_date=date(2020, 7, 11),
                                       fips="24031", quantile=0.5, value=130.0)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "teamA.csv"
        path.write_text("")
        res = parse_forecasts(path)
        assert res.records == [] and not res.row_errors

    def test_header_only_file(self, tmp_path):
        path = tmp_path / "teamA.csv"
        forecast_frame([]).to_csv(path, index=False)
        res = parse_forecasts(path)
        assert res.records == []

    def test_incomplete_group_excluded(self, tmp_path):
        rows = group_rows()[:-1]  # six of the seven levels
        path = tmp_path / "teamA.csv"
        forecast_frame(rows).to_csv(path, index=False)
        res = parse_forecasts(path)
        assert res.records == []
        assert res.excluded_incomplete_groups == 1

    def test_non_county_locations_dropped(self, tmp_path):
        rows = group_rows()
        rows.append({**rows[0], "location": "24"})     # state code
        rows.append({**rows[0], "location": "US"})
        path = tmp_path / "teamA.csv"
        forecast_frame(rows).to_csv(path, index=False)
        res = parse_forecasts(path)
        assert res.dropped_non_county == 2
        assert len(res.records) == 7

    def test_point_rows_dropped(self, tmp_path):
        rows = group_rows()
        rows.append({**rows[0], "type": "point", "quantile": ""})
        path = tmp_path / "t.csv"
        forecast_frame(rows).to_csv(path, index=False)
        res = parse_forecasts(path, team_id="t")
        assert res.dropped_non_quantile == 1

    def test_malformed_row_reports_line_number(self, tmp_path):
        rows = group_rows()
        rows[2] = {**rows[2], "value": "not-a-number"}
        path = tmp_path / "teamA.csv"
        forecast_frame(rows).to_csv(path, index=False)
        res = parse_forecasts(path)
        assert res.row_errors and res.row_errors[0][0] == 4  # 1 header + 2 rows before
        assert res.excluded_incomplete_groups == 1

    def test_crossing_repaired_by_sorting(self, tmp_path):
        rows = group_rows()
        rows[0]["value"], rows[6]["value"] = rows[6]["value"], rows[0]["value"]
        path = tmp_path / "teamA.csv"
        forecast_frame(rows).to_csv(path, index=False)
        res = parse_forecasts(path)
        assert res.repaired_crossings == 1
        values = [r.value for r in res.records]
        assert values == sorted(values)

    def test_crossing_dropped_in_strict_mode(self, tmp_path):
        rows = group_rows()
        rows[0]["value"], rows[6]["value"] = rows[6]["value"], rows[0]["value"]
        path = tmp_path / "teamA.csv"
        forecast_frame(rows).to_csv(path, index=False)
        res = parse_forecasts(path, repair_crossing=False)
        assert res.records == [] and res.dropped_crossing_groups == 1

    def test_team_inferred_from_hub_filename(self, tmp_path):
        path = tmp_path / "2020-07-06-UMD-Flux.csv"
        forecast_frame(group_rows()).to_csv(path, index=False)
        res = parse_forecasts(path)
        assert res.records[0].team_id == "UMD-Flux"

    def test_round_trip(self, tmp_path):
        path = tmp_path / "teamA.csv"
        rows = group_rows() + group_rows(week="2020-07-18", n_wk=2, base=50.0)
        forecast_frame(rows).to_csv(path, index=False)
        first = parse_forecasts(path).records
        back = tmp_path / "again.csv"
        write_forecasts(first, back)
        second = parse_forecasts(back, team_id="teamA").records
        assert first == second

    def test_record_conservation(self, tmp_path):
        rows = (group_rows() + group_rows(week="2020-07-18")[:-1]
                + group_rows(fips="01001"))
        path = tmp_path / "teamA.csv"
        forecast_frame(rows).to_csv(path, index=False)
        res = parse_forecasts(path)
        groups = len(res.records) // 7
        assert groups + res.excluded_incomplete_groups == 3


class TestParseTruth:
    def test_cumulative_weekly_differencing(self, tmp_path):
        path = tmp_path / "truth.csv"
        pd.DataFrame({
            "date": ["2020-07-11", "2020-07-18", "2020-07-25"],
            "location": ["24031"] * 3,
            "value": [10, 15, 15],
        }).to_csv(path, index=False)
        res = parse_truth(path)
        incidents = [(r.week_end.isoformat(), r.incident_cases) for r in res.records]
        assert incidents == [("2020-07-18", 5.0), ("2020-07-25", 0.0)]

    def test_cumulative_decrease_clamped(self, tmp_path):
        path = tmp_path / "truth.csv"
        pd.DataFrame({
            "date": ["2020-07-11", "2020-07-18"],
            "location": ["24031"] * 2,
            "value": [10, 8],
        }).to_csv(path, index=False)
        res = parse_truth(path)
        assert res.records[0].incident_cases == 0.0
        assert res.clamped_negative == 1

    def test_daily_values_sum_within_epi_week(self, tmp_path):
        # brute-force oracle: weekly incident equals the sum of the 7 daily
        # increments inside the Sunday..Saturday window
        rng = np.random.default_rng(2)
        daily_inc = rng.integers(0, 50, size=21)
        days = [date(2020, 7, 5) + timedelta(days=i) for i in range(21)]  # Sun start
        cum = np.concatenate([[100], 100 + np.cumsum(daily_inc)])[1:]
        path = tmp_path / "truth.csv"
        pd.DataFrame({"date": [d.isoformat() for d in days],
                      "location": ["24031"] * 21,
                      "value": cum}).to_csv(path, index=False)
        res = parse_truth(path)
        by_week = {r.week_end: r.incident_cases for r in res.records}
        # weeks 2 and 3 are fully observed with a known baseline
        week2 = sum(daily_inc[7:14])
        week3 = sum(daily_inc[14:21])
        assert by_week[date(2020, 7, 18)] == week2
        assert by_week[date(2020, 7, 25)] == week3

    def test_incident_layout(self, tmp_path):
        path = tmp_path / "truth.csv"
        pd.DataFrame({"week_end": ["2020-07-11"], "location": ["24031"],
                      "incident": [42]}).to_csv(path, index=False)
        res = parse_truth(path)
        assert res.records[0].incident_cases == 42.0

    def test_unknown_fips_skipped(self, tmp_path):
        path = tmp_path / "truth.csv"
        pd.DataFrame({"week_end": ["2020-07-11"] * 2,
                      "location": ["24031", "99999"],
                      "incident": [1, 2]}).to_csv(path, index=False)
        res = parse_truth(path, known_fips={"24031"})
        assert res.skipped_unknown_fips == 1
        assert len(res.records) == 1


def covariate_files(tmp_path, fips=("24031", "01001"), drop_from_health=()):
    demo = pd.DataFrame({
        "fips": fips, "population": [1_000_000, 50_000],
        "pct_white": [60.0, 80.0], "pct_black": [20.0, 10.0],
        "pct_hispanic": [12.0, 6.0], "pct_asian": [8.0, 1.0],
        "pct_age65": [15.0, 20.0], "state": ["MD", "AL"],
    })
    urban = pd.DataFrame({"fips": fips, "code": [2, 5]})
    keep = [f for f in fips if f not in drop_from_health]
    health = pd.DataFrame({"fips": keep})
    for name in HEALTH_OUTCOMES:
        health[name] = 20.0
    paths = (tmp_path / "demo.csv", tmp_path / "urban.csv", tmp_path / "health.csv")
    demo.to_csv(paths[0], index=False)
    urban.to_csv(paths[1], index=False)
    health.to_csv(paths[2], index=False)
    return paths


class TestParseCovariates:
    def test_urbanicity_mapping(self, tmp_path):
        res = parse_covariates(*covariate_files(tmp_path))
        assert res.covariates["24031"].urbanicity is UrbanicityGroup.LM
        assert res.covariates["01001"].urbanicity is UrbanicityGroup.MC
        assert UrbanicityGroup.from_code(3) is UrbanicityGroup.SMM

    def test_intersection_rule(self, tmp_path):
        res = parse_covariates(*covariate_files(tmp_path, drop_from_health=("01001",)))
        assert res.retained == 1
        assert res.excluded_missing_source == 1
        assert "01001" not in res.covariates

    def test_percent_out_of_range_is_hard_error(self, tmp_path):
        paths = covariate_files(tmp_path)
        demo = pd.read_csv(paths[0])
        demo.loc[0, "pct_black"] = 104.0
        demo.to_csv(paths[0], index=False)
        with pytest.raises(InputDataError, match="pct_black.*24031"):
            parse_covariates(*paths)


class TestJoinPanel:
    def make_inputs(self, tmp_path, teams=("teamA", "teamB"), weeks=("2020-07-11",
                    "2020-07-18"), fips=("24031", "01001"), cov_fips=None):
        rows = []
        for f in fips:
            for w in weeks:
                rows += group_rows(fips=f, week=w)
        # one forecast file per team; the schema carries no team column
        all_records = []
        for team in teams:
            path = tmp_path / f"{team}.csv"
            forecast_frame(rows).to_csv(path, index=False)
            all_records.extend(parse_forecasts(path, team_id=team).records)
        truth = []
        for f in fips:
            for w in weeks:
                truth.append({"week_end": w, "location": f, "incident": 30})
        tpath = tmp_path / "truth.csv"
        pd.DataFrame(truth).to_csv(tpath, index=False)
        truth_records = parse_truth(tpath).records
        cov_fips = fips[:2] if cov_fips is None else cov_fips
        cov = parse_covariates(*covariate_files(tmp_path, fips=cov_fips)).covariates
        meta = {t: TeamMetadata(team_id=t, model_type="Compartmental", mobility="No")
                for t in teams}
        return all_records, truth_records, cov, meta

    def test_full_join_cardinality(self, tmp_path):
        forecasts, truth, cov, meta = self.make_inputs(
            tmp_path, fips=("24031", "01001", "13121"))
        # third county lacks covariates
        joined = join_panel(forecasts, truth, cov, meta, DEFAULT_PHASES)
        # 2 teams x 2 covariate counties x 2 weeks x 1 lookahead
        assert len(joined.rows) == 8
        assert joined.drop_counts["missing_covariates"] == 4

    def test_missing_truth_dropped_with_cause(self, tmp_path):
        forecasts, truth, cov, meta = self.make_inputs(tmp_path)
        truth = [t for t in truth if t.week_end != date(2020, 7, 18)]
        joined = join_panel(forecasts, truth, cov, meta, DEFAULT_PHASES)
        assert joined.drop_counts["missing_truth"] == 4
        assert len(joined.rows) == 4

    def test_phase_attached(self, tmp_path):
        forecasts, truth, cov, meta = self.make_inputs(tmp_path)
        joined = join_panel(forecasts, truth, cov, meta, DEFAULT_PHASES)
        assert {r.phase for r in joined.rows} == {0}

    def test_conservation_of_groups(self, tmp_path):
        forecasts, truth, cov, meta = self.make_inputs(tmp_path)
        truth = truth[:2]
        joined = join_panel(forecasts, truth, cov, meta, DEFAULT_PHASES)
        assert joined.n_input_groups == 8

    def test_joined_rows_have_seven_increasing_quantiles(self, tmp_path):
        forecasts, truth, cov, meta = self.make_inputs(tmp_path)
        joined = join_panel(forecasts, truth, cov, meta, DEFAULT_PHASES)
        for row in joined.rows:
            assert len(row.quantiles) == 7
            assert list(row.quantiles) == sorted(row.quantiles)
            assert list(row.values) == sorted(row.values)


class TestMetadata:
    def test_parse_and_validate(self, tmp_path):
        path = tmp_path / "meta.csv"
        pd.DataFrame({"team_id": ["a"], "model_type": ["Ensemble"],
                      "mobility": ["Mixed"]}).to_csv(path, index=False)
        meta = parse_metadata(path)
        assert meta["a"].model_type == "Ensemble"

    def test_unknown_model_type_rejected(self, tmp_path):
        path = tmp_path / "meta.csv"
        pd.DataFrame({"team_id": ["a"], "model_type": ["Quantum"],
                      "mobility": ["No"]}).to_csv(path, index=False)
        with pytest.raises(InputDataError):
            parse_metadata(path)


def test_epi_week_end_is_saturday():
    for offset in range(14):
        d = date(2020, 7, 5) + timedelta(days=offset)
        we = epi_week_end(d)
        assert we.weekday() == 5
        assert 0 <= (we - d).days <= 6
