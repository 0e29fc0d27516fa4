import pytest

from adaptlin_figures.schema import (
    SchemaError,
    load_rows,
    methods_in,
    pivots_by_method,
    series_by_k,
    series_by_nominal,
)

SUMMARY_HEADER = (
    "experiment,name,k,method,coord,alpha,nominal,coverage,coverage_se,"
    "mean_width,sd_width,mean_scaled_mse,sd_scaled_mse,mean_block_scaled_mse,"
    "ks_distance,n_reps"
)


def write_summary(path, rows):
    path.write_text(SUMMARY_HEADER + "\n" + "\n".join(rows) + ("\n" if rows else ""))
    return path


def test_missing_file(tmp_path):
    with pytest.raises(SchemaError):
        load_rows(tmp_path / "nope.csv", ("method",))


def test_missing_columns(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(SchemaError) as err:
        load_rows(p, ("method", "alpha"))
    assert "method" in str(err.value)


def test_empty_rows(tmp_path):
    p = write_summary(tmp_path / "empty.csv", [])
    with pytest.raises(SchemaError):
        load_rows(p, ("method",))


def test_series_by_k_dedupes_alpha_repeats(tmp_path):
    rows = [
        "e,g,2,OLS,1,0.1,0.9,0.9,0.01,1,0.1,5.0,1.0,10.0,0.1,20",
        "e,g,2,OLS,1,0.2,0.8,0.8,0.01,1,0.1,5.0,1.0,10.0,0.1,20",
        "e,g,4,OLS,1,0.1,0.9,0.9,0.01,1,0.1,9.0,2.0,20.0,0.1,20",
    ]
    p = write_summary(tmp_path / "s.csv", rows)
    data = load_rows(p, ("k", "method", "mean_scaled_mse", "sd_scaled_mse"))
    ks, means, sds = series_by_k(data, "OLS", "mean_scaled_mse", "sd_scaled_mse")
    assert ks == [2, 4]
    assert means == [5.0, 9.0]
    assert sds == [1.0, 2.0]


def test_series_by_nominal_sorted(tmp_path):
    rows = [
        "e,g,1,TALE,1,0.2,0.8,0.81,0.01,0.5,0.05,,,,0.02,100",
        "e,g,1,TALE,1,0.05,0.95,0.94,0.01,0.7,0.05,,,,0.02,100",
    ]
    p = write_summary(tmp_path / "s.csv", rows)
    data = load_rows(p, ("method", "alpha", "nominal", "coverage", "coverage_se"))
    levels, cov, _ = series_by_nominal(data, "TALE", "coverage", "coverage_se")
    assert levels == [0.8, 0.95]
    assert cov == [0.81, 0.94]
    assert methods_in(data) == ["TALE"]


def test_pivots_dedupe_and_skip_blanks(tmp_path):
    header = "method,k,rep,std_err_pivot"
    p = tmp_path / "r.csv"
    p.write_text(
        header + "\nOLS,1,0,1.5\nOLS,1,0,1.5\nOLS,1,1,-0.5\nConcentrationCI,1,0,\n"
    )
    rows = load_rows(p, ("method", "k", "rep", "std_err_pivot"))
    piv = pivots_by_method(rows)
    assert piv == {"OLS": [1.5, -0.5]}
