import pandas as pd
import pytest

from priorlab.errors import MetricError
from priorlab.metrics import (
    METRIC_FILE,
    REPORT_COLUMNS,
    MetricReport,
    aggregate_reports,
    collect_reports,
    read_reports,
    write_aggregate,
    write_reports,
)


def _report(run_id, beta=0.0, seed=1, frechet=1.0, **extra):
    return MetricReport(
        run_id=run_id,
        beta=beta,
        latent_dim=2,
        prior="flow",
        seed=seed,
        frechet=frechet,
        recon_mse=0.01,
        extra=extra,
    )


def test_non_finite_metrics_become_empty():
    """NaN and inf are recorded as failed metrics."""
    report = _report("a", frechet=float("nan"))
    assert report.frechet is None
    assert "frechet" in report.failed()
    assert "recon_mse" not in report.failed()


def test_unknown_fields_rejected():
    """Reports do not accept stray fields."""
    with pytest.raises(ValueError):
        MetricReport(
            run_id="a",
            beta=0,
            latent_dim=2,
            prior="flow",
            seed=1,
            bogus=3,
        )


def test_csv_columns_and_empty_cells(tmp_path):
    """The header is fixed and failed metrics are empty cells."""
    path = write_reports([_report("a", frechet=None)], tmp_path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(REPORT_COLUMNS)
    assert lines[1].startswith("a,0,2,flow,1,,")
    frame = read_reports(path)
    assert pd.isna(frame.loc[0, "frechet"])


def test_extras_go_to_long_file(tmp_path):
    """Extra values are written one per row."""
    write_reports([_report("a", disc_accuracy=0.5)], tmp_path)
    extra = pd.read_csv(tmp_path / "metrics_extra.csv")
    assert list(extra.columns) == ["run_id", "name", "value"]
    assert extra.loc[0, "name"] == "disc_accuracy"


def test_collect_prefers_own_file(tmp_path):
    """A sweep directory's merged table is not counted twice."""
    write_reports([_report("a"), _report("b", seed=2)], tmp_path)
    write_reports([_report("a")], tmp_path / "a")
    write_reports([_report("b", seed=2)], tmp_path / "b")
    frame = collect_reports([tmp_path])
    assert len(frame) == 2


def test_collect_recurses(tmp_path):
    """Run directories below a parent are found."""
    write_reports([_report("a")], tmp_path / "x" / "a")
    write_reports([_report("b", seed=2)], tmp_path / "x" / "b")
    assert len(collect_reports([tmp_path])) == 2


def test_collect_errors(tmp_path):
    """Missing files, empty tables and bad headers are errors."""
    with pytest.raises(MetricError):
        collect_reports([tmp_path])
    with pytest.raises(MetricError):
        collect_reports([tmp_path / "nope"])
    (tmp_path / METRIC_FILE).write_text(",".join(REPORT_COLUMNS) + "\n")
    with pytest.raises(MetricError):
        collect_reports([tmp_path])
    (tmp_path / METRIC_FILE).write_text("a,b\n1,2\n")
    with pytest.raises(MetricError):
        collect_reports([tmp_path])


def test_aggregate_identical_seeds_have_zero_std(tmp_path):
    """Equal values across seeds give std 0 and the shared mean."""
    frame = pd.DataFrame(
        [_report(f"s{s}", seed=s, frechet=3.0).row() for s in range(3)]
    )
    out = aggregate_reports(frame)
    assert len(out) == 1
    assert out.loc[0, "runs"] == 3
    assert out.loc[0, "frechet_mean"] == pytest.approx(3.0)
    assert out.loc[0, "frechet_std"] == pytest.approx(0.0)
    path = write_aggregate(out, tmp_path / "agg" / "summary.csv")
    assert path.exists()


def test_aggregate_groups_by_beta():
    """One row per beta, population std across seeds."""
    rows = [
        _report("a", beta=0.0, seed=1, frechet=1.0).row(),
        _report("b", beta=0.0, seed=2, frechet=3.0).row(),
        _report("c", beta=1.0, seed=1, frechet=5.0).row(),
    ]
    out = aggregate_reports(pd.DataFrame(rows))
    assert list(out["beta"]) == [0.0, 1.0]
    assert out.loc[0, "frechet_mean"] == pytest.approx(2.0)
    assert out.loc[0, "frechet_std"] == pytest.approx(1.0)
