import json

import numpy as np
import pytest

from natbeta.panel_io import parse_panel
from natbeta.pipeline import StageError, render_report, run_estimate
from natbeta.simulator import synthesize_panel

from conftest import make_config


def paper_stub_report(paper, **overrides):
    kwargs = dict(
        beta_qm=paper["beta_qm"],
        r_m=paper["r_m"],
        slope=paper["slope"],
        slope_se=paper["slope_se"],
        mean_ln_flow=paper["mean_ln_flow"],
        mean_ln_price=paper["mean_ln_price"],
        draws=20_000,
        seed=99,
    )
    kwargs.update(overrides)
    return run_estimate(None, **kwargs)


def test_stub_chains_published_values(paper):
    report = paper_stub_report(paper)
    assert report.betas["beta_xm"] == pytest.approx(4.93, abs=0.01)
    assert report.returns["r_x"] == pytest.approx(0.143, abs=0.001)
    assert report.equilibrium["ln_price"] == pytest.approx(2.782, abs=0.002)
    assert report.equilibrium["ln_quantity"] == pytest.approx(2.155, abs=0.002)
    assert report.equilibrium["ln_user_cost"] == pytest.approx(4.937, abs=0.003)
    assert report.provenance["regression_stub"] is True
    assert report.regression is None


def test_simulated_panel_self_consistency():
    panel = synthesize_panel(make_config(beta=0.919, n=19, seed=21))
    report = run_estimate(panel, beta_qm=5.36, r_m=0.029, draws=10_000, seed=5)
    slope = report.slope
    second = report.regression["second_stage"]["coefficients"]["price_dev"]
    assert second["ci_low"] <= slope <= second["ci_high"]
    lo, hi = report.intervals["bounds"]["beta_xm"]
    assert lo <= report.betas["beta_xm"] <= hi
    assert report.betas["beta_xq"] == pytest.approx(0.919, abs=1e-6)


def test_all_stub_and_panel_paths_share_field_names(paper):
    report = paper_stub_report(paper)
    data = report.to_jsonable()
    assert data["schema_version"] == 1
    assert set(data["betas"]) == {"beta_xq", "beta_qx", "beta_qm", "beta_xm"}
    assert set(data["returns"]) == {"r_m", "r_q", "r_x"}
    assert set(data["equilibrium"]) == {
        "x_e", "y_e", "ln_quantity", "ln_price", "quantity", "price", "ln_user_cost"
    }
    assert set(data["intervals"]["bounds"]) == {
        "ln_price", "ln_quantity", "ln_user_cost", "beta_xm", "r_x"
    }


def test_zero_flow_panel_reports_preprocess_stage():
    panel = parse_panel(
        "year,value,flow\n2001,2,1\n2002,8,0\n2003,9,2\n2004,12,3\n2005,20,4\n"
    )
    with pytest.raises(StageError) as err:
        run_estimate(panel, beta_qm=5.36, r_m=0.029, draws=0)
    assert err.value.stage == "preprocess"
    assert "non-positive value at row 2" in str(err.value)


def test_small_panel_reports_panel_stage():
    panel = parse_panel("year,value,flow\n2001,2,1\n2002,8,2\n")
    with pytest.raises(StageError) as err:
        run_estimate(panel, beta_qm=5.36, r_m=0.029, draws=0)
    assert err.value.stage == "panel_io"


def test_missing_means_with_stub_reports_preprocess(paper):
    with pytest.raises(StageError) as err:
        run_estimate(None, beta_qm=5.36, r_m=0.029, slope=-0.9, draws=0)
    assert err.value.stage == "preprocess"


def test_missing_seed_reports_uncertainty_stage(paper):
    with pytest.raises(StageError) as err:
        paper_stub_report(paper, seed=None)
    assert err.value.stage == "uncertainty"


def test_bad_beta_qm_reports_beta_algebra():
    with pytest.raises(StageError) as err:
        run_estimate(None, beta_qm=-2.0, r_m=0.029, slope=-0.9, draws=0,
                     mean_ln_flow=0.0, mean_ln_price=0.0)
    assert err.value.stage == "beta_algebra"


def test_zero_slope_reports_beta_algebra(paper):
    with pytest.raises(StageError) as err:
        paper_stub_report(paper, slope=0.0, draws=0, seed=None)
    assert err.value.stage == "beta_algebra"


def test_instrument_selection_named_and_missing():
    panel = synthesize_panel(make_config(n=30, seed=2))
    report = run_estimate(panel, beta_qm=2.0, r_m=0.03, draws=0,
                          instruments="iv_lag1,iv_sup1")
    assert report.regression["instruments"] == "panel columns iv_lag1,iv_sup1"
    with pytest.raises(StageError) as err:
        run_estimate(panel, beta_qm=2.0, r_m=0.03, draws=0, instruments="iv_nope")
    assert err.value.stage == "econometrics"


def test_instrument_selection_lags():
    panel = synthesize_panel(make_config(n=40, seed=3))
    report = run_estimate(panel, beta_qm=2.0, r_m=0.03, draws=0, instruments="lags:4")
    assert report.regression["instruments"] == "lags:4"
    assert report.regression["second_stage"]["n_obs"] == 36


def test_positive_slope_branch_rescales_se(paper):
    # reciprocal rule: beta = 1/slope, se scaled by the delta method
    report = paper_stub_report(paper, slope=2.0, slope_se=0.1, draws=0, seed=None)
    assert report.betas["beta_xq"] == pytest.approx(0.5)
    report2 = paper_stub_report(paper, slope=2.0, slope_se=0.1, draws=5_000, seed=3)
    lo, hi = report2.intervals["bounds"]["beta_xm"]
    half_width = (hi - lo) / 2
    assert half_width == pytest.approx(1.645 * (0.1 / 4.0) * paper["beta_qm"], rel=0.05)


def test_json_round_trip(paper):
    report = paper_stub_report(paper)
    text = render_report(report, "json")
    assert json.loads(text) == report.to_jsonable()


def test_json_byte_determinism(paper):
    a = render_report(paper_stub_report(paper), "json")
    b = render_report(paper_stub_report(paper), "json")
    assert a == b
    c = render_report(paper_stub_report(paper, seed=100), "json")
    assert a != c


def test_text_contains_interval_table_when_present(paper):
    text = render_report(paper_stub_report(paper), "text")
    assert "90% confidence interval" in text
    for name in ("ln_price", "ln_quantity", "ln_user_cost", "beta_xm", "r_x"):
        assert name in text
    assert "14.3%" in text  # rates rendered as percent


def test_text_omits_interval_table_without_draws(paper):
    text = render_report(paper_stub_report(paper, draws=0, seed=None), "text")
    assert "confidence interval of estimates" not in text


def test_csv_render(paper):
    text = render_report(paper_stub_report(paper), "csv")
    lines = text.splitlines()
    assert lines[0] == "key,value"
    keys = {line.split(",", 1)[0] for line in lines[1:]}
    assert "betas.beta_xm" in keys
    assert "equilibrium.ln_price" in keys


def test_unknown_format_rejected(paper):
    with pytest.raises(ValueError, match="format"):
        render_report(paper_stub_report(paper), "yaml")


def test_out_of_range_equilibrium_warns():
    panel = synthesize_panel(make_config(beta=3.0, sigma_d=0.01, n=50, seed=4))
    report = run_estimate(panel, beta_qm=2.0, r_m=0.03, draws=0)
    assert any("outside observed range" in w for w in report.warnings)
    text = render_report(report, "text")
    assert "warning:" in text


def test_report_numeric_fields_finite(paper):
    data = paper_stub_report(paper).to_jsonable()

    def walk(obj):
        if isinstance(obj, dict):
            for v in obj.values():
                walk(v)
        elif isinstance(obj, list):
            for v in obj:
                walk(v)
        elif isinstance(obj, float):
            assert np.isfinite(obj)

    walk(data)
