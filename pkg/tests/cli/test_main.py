import pandas as pd
import pytest

from priorlab.cli.main import dispatch, split_sweep_overrides
from priorlab.errors import ConfigError


@pytest.fixture(autouse=True)
def _in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def trained_run(tiny_config_file, tmp_path):
    out = tmp_path / "run"
    code = dispatch(
        [
            "train",
            "--config",
            str(tiny_config_file),
            "--set",
            "epochs=1",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    return out


def test_unknown_verb_is_usage_error(capsys):
    assert dispatch(["fly"]) == 1
    assert "usage" in capsys.readouterr().err


def test_missing_required_flag(capsys):
    assert dispatch(["sample"]) == 1
    assert "--checkpoint" in capsys.readouterr().err


def test_unknown_override_key(tiny_config_file, tmp_path):
    """A bad --set key is a configuration error."""
    code = dispatch(
        [
            "train",
            "--config",
            str(tiny_config_file),
            "--set",
            "no_such_key=1",
            "--out",
            str(tmp_path / "bad"),
        ]
    )
    assert code == 1


def test_invalid_override_value(tiny_config_file, tmp_path):
    code = dispatch(
        [
            "train",
            "--config",
            str(tiny_config_file),
            "--set",
            "beta=-1",
            "--out",
            str(tmp_path / "bad"),
        ]
    )
    assert code == 1


def test_train_writes_run_directory(trained_run):
    """Checkpoint, epoch log and manifest land in the run directory."""
    assert (trained_run / "model.lfck").is_file()
    assert (trained_run / "epochs.csv").is_file()
    manifest = (trained_run / "manifest.txt").read_text()
    assert "epochs = 1" in manifest
    assert "# verb = train" in manifest


def test_train_is_reproducible(tiny_config_file, tmp_path):
    """Identical argv gives an identical checkpoint."""
    paths = []
    for name in ("a", "b"):
        out = tmp_path / name
        argv = ["train", "--config", str(tiny_config_file)]
        assert dispatch(argv + ["--out", str(out)]) == 0
        paths.append(out / "model.lfck")
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_metrics_and_report(trained_run, tmp_path):
    """A checkpoint evaluates into a row that report aggregates."""
    out = tmp_path / "metrics"
    code = dispatch(
        [
            "metrics",
            "--checkpoint",
            str(trained_run / "model.lfck"),
            "--out",
            str(out),
        ]
    )
    assert code == 0
    frame = pd.read_csv(out / "metrics.csv")
    assert frame["run_id"].tolist() == ["run"]

    assert dispatch(["report", str(out), "--out", str(out)]) == 0
    aggregate = pd.read_csv(out / "aggregate.csv")
    assert aggregate["runs"].tolist() == [1]
    assert aggregate["frechet_std"].tolist() == [0.0]


def test_report_on_empty_directory(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert dispatch(["report", str(empty)]) == 2


def test_sample_and_interpolate(trained_run, tmp_path):
    ckpt = str(trained_run / "model.lfck")
    out = tmp_path / "sample"
    assert dispatch(
        ["sample", "--checkpoint", ckpt, "--n", "8", "--out", str(out)]
    ) == 0
    assert (out / "samples.pgm").read_bytes().startswith(b"P5")
    out = tmp_path / "interp"
    assert dispatch(
        [
            "interpolate",
            "--checkpoint",
            ckpt,
            "--space",
            "Z0",
            "--steps",
            "4",
            "--pairs",
            "2",
            "--out",
            str(out),
        ]
    ) == 0
    assert (out / "interpolate_Z0.pgm").is_file()


def test_direction_and_pca(trained_run, tmp_path):
    ckpt = str(trained_run / "model.lfck")
    out = tmp_path / "direction"
    assert dispatch(
        [
            "direction",
            "--checkpoint",
            ckpt,
            "--attribute",
            "1",
            "--steps",
            "4",
            "--bases",
            "5",
            "--out",
            str(out),
        ]
    ) == 0
    assert (out / "profile_ZT.csv").is_file()
    out = tmp_path / "pca"
    assert dispatch(
        [
            "pca-traverse",
            "--checkpoint",
            ckpt,
            "--range",
            "-1,1",
            "--steps",
            "3",
            "--images",
            "2",
            "--out",
            str(out),
        ]
    ) == 0
    assert (out / "pca_0.pgm").is_file()


def test_bad_range_is_usage_error(trained_run, tmp_path):
    code = dispatch(
        [
            "pca-traverse",
            "--checkpoint",
            str(trained_run / "model.lfck"),
            "--range",
            "wide",
            "--out",
            str(tmp_path / "pca"),
        ]
    )
    assert code == 1


def test_prior_post_on_standard_normal_fails(tiny_config_file, tmp_path):
    """Post-training a fixed prior is a runtime failure."""
    out = tmp_path / "std"
    assert dispatch(
        [
            "train",
            "--config",
            str(tiny_config_file),
            "--set",
            "prior=standard_normal",
            "--set",
            "epochs=1",
            "--out",
            str(out),
        ]
    ) == 0
    code = dispatch(
        [
            "prior-post",
            "--checkpoint",
            str(out / "model.lfck"),
            "--out",
            str(tmp_path / "post"),
        ]
    )
    assert code == 2


def test_prior_post_writes_log(trained_run, tmp_path):
    out = tmp_path / "post"
    code = dispatch(
        [
            "prior-post",
            "--checkpoint",
            str(trained_run / "model.lfck"),
            "--epochs",
            "1",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    assert (out / "prior_epochs.csv").is_file()
    assert (out / "model.lfck").is_file()


def test_sweep_overrides_split():
    plain, lists = split_sweep_overrides(
        ["beta=0", "sweep.beta=0,0.5", "sweep.latent_dim=2"]
    )
    assert plain == ["beta=0"]
    assert lists == {"sweep.beta": ["0", "0.5"], "sweep.latent_dim": ["2"]}


def test_unknown_sweep_key():
    with pytest.raises(ConfigError):
        split_sweep_overrides(["sweep.lr=0.1,0.2"])


def test_sweep_verb(tiny_config_file, tmp_path):
    """Two betas and two seeds give four rows."""
    out = tmp_path / "sweep"
    code = dispatch(
        [
            "sweep",
            "--config",
            str(tiny_config_file),
            "--set",
            "epochs=1",
            "--set",
            "sweep.beta=0,1",
            "--seeds",
            "2",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    frame = pd.read_csv(out / "metrics.csv")
    assert frame["run_id"].tolist() == [
        "beta0_d2_seed1",
        "beta0_d2_seed2",
        "beta1_d2_seed1",
        "beta1_d2_seed2",
    ]
    assert dispatch(["report", str(out), "--out", str(out)]) == 0
    assert len(pd.read_csv(out / "aggregate.csv")) == 2


def test_sweep_bad_seed_count(tiny_config_file, tmp_path):
    code = dispatch(
        [
            "sweep",
            "--config",
            str(tiny_config_file),
            "--seeds",
            "0",
            "--out",
            str(tmp_path / "s"),
        ]
    )
    assert code == 1


@pytest.mark.slow
def test_grad_check_verb():
    assert dispatch(["grad-check"]) == 0
