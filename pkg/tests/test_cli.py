import io
import json

import pytest

import srw.cli as cli
from srw.cli import main, run_experiment
from srw.config import parse_config
from srw.traces import import_trace

DETECT_CFG = """\
variant = srw_carryover
domain.a_x = 8
domain.a_y = 8
lambda = 0.25
r = 1
rho_detect = 1
eps = 0.2
velocity.v_min = 1
velocity.v_max = 2
alarm.kind = exponential
alarm.rate = 0.5
t_max = 20
t_grid.points = 6
reps = 3
seed = 11
out.prefix = tiny
"""

PERC_CFG = """\
variant = interpolation
R = 1
p = 0.5
r = 1
lambda = 0.6
domain.a_x = 6
domain.a_y = 6
velocity.v_min = 1
velocity.v_max = 2
reps = 2
seed = 7
out.prefix = tiny
"""

STATIONARY_CFG = """\
variant = classical_rwp
domain.a_x = 8
domain.a_y = 8
velocity.v_min = 1
velocity.v_max = 2
t_grid.points = 4
reps = 2
seed = 5
out.prefix = tiny
"""

TRACE_CFG = """\
variant = srw_carryover
domain.a_x = 6
domain.a_y = 6
lambda = 0.3
velocity.v_min = 1
velocity.v_max = 2
alarm.kind = exponential
alarm.rate = 0.5
t_max = 10
seed = 3
out.prefix = tiny
"""


def write_cfg(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_meta(out_dir, stem):
    return json.loads((out_dir / f"tiny_{stem}_meta.json").read_text())


def test_detect_outputs(tmp_path, capsys):
    cfg = write_cfg(tmp_path, DETECT_CFG)
    out = tmp_path / "out"
    assert main(["detect", "--config", cfg, "--out", str(out)]) == 0

    listed = capsys.readouterr().out.splitlines()
    assert len(listed) == 3

    surv = (out / "tiny_detect_survival.csv").read_text().splitlines()
    assert surv[0].startswith("# srw config_hash=")
    assert surv[1] == "t,survival,ci_lo,ci_hi,bound"
    assert len(surv) == 2 + 6

    samples = (out / "tiny_detect_samples.csv").read_text().splitlines()
    assert samples[1] == "replication,time"
    assert len(samples) == 2 + 3

    meta = read_meta(out, "detect")
    assert meta["subcommand"] == "detect"
    assert meta["seed"] == 11
    assert meta["reps"] == 3
    assert meta["rho"] == 1.0
    assert len(meta["config_hash"]) == 12
    assert surv[0].endswith(meta["config_hash"])
    assert "numpy" in meta["versions"]
    # carryover on a bounded box admits the tail bound
    assert meta["bound_constants"] is not None
    assert meta["bound_constants"]["c2"] > 0


@pytest.mark.parametrize("sub,stem", [("mobile-detect", "mobile_detect"),
                                      ("cover", "cover")])
def test_other_survival_subcommands(tmp_path, sub, stem):
    cfg = write_cfg(tmp_path, DETECT_CFG)
    out = tmp_path / "out"
    assert main([sub, "--config", cfg, "--out", str(out)]) == 0
    assert (out / f"tiny_{stem}_survival.csv").exists()
    assert (out / f"tiny_{stem}_samples.csv").exists()
    meta = read_meta(out, stem)
    assert meta["subcommand"] == sub
    if sub == "cover":
        assert meta["eps"] == 0.2
        assert meta["r"] == 1.0
    else:
        assert meta["rho"] == 1.0


def test_stationary_outputs(tmp_path):
    cfg = write_cfg(tmp_path, STATIONARY_CFG)
    out = tmp_path / "out"
    assert main(["stationary", "--config", cfg, "--out", str(out)]) == 0
    hist = (out / "tiny_stationary_hist.csv").read_text().splitlines()
    assert hist[0].startswith("# srw config_hash=")
    assert hist[1] == "bin_x,bin_y,count,expected"
    assert len(hist) == 2 + 20 * 20
    # square bounded classical run gets the closed-form reference column
    assert not hist[2].endswith(",")
    meta = read_meta(out, "stationary")
    assert meta["bins"] == 20
    assert meta["n_walkers"] == 2
    assert meta["n_sample_times"] == 4


def test_percolate_outputs(tmp_path):
    cfg = write_cfg(tmp_path, PERC_CFG)
    out = tmp_path / "out"
    assert main(["percolate", "--config", cfg, "--out", str(out),
                 "--p-grid", "0,1"]) == 0
    rows = (out / "tiny_percolate_clusters.csv").read_text().splitlines()
    assert rows[1] == ("replication,lambda,p,points,largest,"
                       "crossing_lr,crossing_tb")
    assert len(rows) == 2 + 2 * 2
    meta = read_meta(out, "percolate")
    assert meta["p_grid"] == [0.0, 1.0]
    assert meta["thinned_radius"] == 1.0
    assert len(meta["crossing_thinned"]) == 2


def test_trace_outputs(tmp_path):
    cfg = write_cfg(tmp_path, TRACE_CFG)
    out = tmp_path / "out"
    assert main(["trace", "--config", cfg, "--out", str(out)]) == 0
    text = (out / "tiny_trace.txt").read_text()
    lines = text.splitlines()
    assert lines[0].startswith("# srw config_hash=")
    assert lines[1].startswith("#srw-trace v1 ")
    trajs = import_trace(io.StringIO(text))
    meta = read_meta(out, "trace")
    assert meta["n_nodes"] == len(trajs)
    assert meta["format"] == "native"


def test_missing_config_file_exits_2(tmp_path, capsys):
    rc = main(["detect", "--config", str(tmp_path / "nope.cfg"),
               "--out", str(tmp_path)])
    assert rc == 2
    assert "srw: config error:" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_bad_config_exits_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "a_x = 8\n")
    assert main(["detect", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "srw: config error:" in capsys.readouterr().err


def test_bad_p_grid_exits_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, PERC_CFG)
    rc = main(["percolate", "--config", cfg, "--out", str(tmp_path),
               "--p-grid", "0,half"])
    assert rc == 2
    assert "srw: config error:" in capsys.readouterr().err


def test_wrong_variant_for_percolate_exits_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, STATIONARY_CFG)
    out = tmp_path / "out"
    rc = main(["percolate", "--config", cfg, "--out", str(out)])
    assert rc == 2
    assert "srw: config error:" in capsys.readouterr().err
    assert list(out.iterdir()) == []


def test_runtime_failure_exits_3_and_cleans_up(tmp_path, capsys, monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("boom")

    # metadata is staged last, so earlier CSVs are on disk when this fires
    monkeypatch.setattr(cli, "_metadata", boom)
    cfg = write_cfg(tmp_path, DETECT_CFG)
    out = tmp_path / "out"
    rc = main(["detect", "--config", cfg, "--out", str(out)])
    assert rc == 3
    assert "srw: error: boom" in capsys.readouterr().err
    assert list(out.iterdir()) == []


def test_seed_and_reps_overrides(tmp_path):
    cfg = write_cfg(tmp_path, PERC_CFG)
    out = tmp_path / "out"
    rc = main(["percolate", "--config", cfg, "--out", str(out),
               "--seed", "123", "--reps", "1", "--p-grid", "0"])
    assert rc == 0
    meta = read_meta(out, "percolate")
    assert meta["seed"] == 123
    assert meta["reps"] == 1
    assert "seed = 123" in meta["config"]
    rows = (out / "tiny_percolate_clusters.csv").read_text().splitlines()
    assert len(rows) == 2 + 1


def test_worker_count_does_not_change_outputs(tmp_path, monkeypatch):
    cfg = write_cfg(tmp_path, PERC_CFG)
    outs = {}
    for w in ("1", "3"):
        monkeypatch.setenv("SRW_WORKERS", w)
        out = tmp_path / f"w{w}"
        assert main(["percolate", "--config", cfg, "--out", str(out),
                     "--p-grid", "0,1"]) == 0
        outs[w] = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
    assert outs["1"] == outs["3"]


def test_run_experiment_rejects_unknown_subcommand(tmp_path):
    with pytest.raises(ValueError, match="unknown subcommand"):
        run_experiment(parse_config(""), "warp", tmp_path)
