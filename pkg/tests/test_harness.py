import json

import pytest

from isingnet import config as C
from isingnet import plotdata
from isingnet.advisor import AdvisorInput, advise
from isingnet.errors import ConfigError, UsageError
from isingnet.runner import run_coupled_experiment, run_experiment

RC = 15.5e-9


def base(**over):
    raw = {
        "instance": {"generator": "sk", "params": {"n": 12}, "seed": 1},
        "partition": {"blocks": 3},
        "mode": {"tag": "concurrent", "frequency": 1e9},
        "schedule": {"kind": "geometric", "beta_start": 3e-9, "beta_end": 3e-7},
        "t_total": 1e-8, "dt": 1e-11, "trials": 4, "seed": 2,
    }
    raw.update(over)
    return raw


# --- config -------------------------------------------------------------------

def test_frequency_normalizes_to_tau():
    cfg = C.from_dict(base())
    assert cfg.mode.frequency is None
    assert cfg.mode.tau == pytest.approx(1e-9)
    assert cfg.schedule.beta_end == 3e-7


def test_yaml_round_trip(tmp_path):
    cfg = C.from_dict(base())
    path = tmp_path / "run.yaml"
    C.save(cfg, str(path))
    back = C.load(str(path))
    assert back.to_dict() == cfg.to_dict()
    assert back.content_hash() == cfg.content_hash()


@pytest.mark.parametrize("over,path", [
    ({"trials": 0}, "trials"),
    ({"dt": "fast"}, "dt"),
    ({"mode": {"tag": "concurrent"}}, "mode.tau"),
    ({"mode": {"tag": "serial", "tau": 1e-9, "frequency": 1e9}}, "mode.frequency"),
    ({"mode": {"tag": "diagonal", "tau": 1e-9}}, "mode.tag"),
    ({"schedule": {"kind": "linear"}}, "schedule.beta_end"),
    ({"partition": {"blockz": 2}}, "partition.blockz"),
    ({"colour": 1}, "colour"),
    ({"instance": {"path": "missing.txt"}}, "instance.path"),
    ({"metrics": {"ttt_target_ratio": 1.5}}, "metrics.ttt_target_ratio"),
])
def test_validation_names_the_field(over, path, tmp_path):
    with pytest.raises(ConfigError) as e:
        C.from_dict(base(**over), str(tmp_path))
    assert e.value.path == path
    assert str(e.value).startswith(path + ":")
    assert e.value.exit_code == 2


def test_invalid_yaml():
    with pytest.raises(ConfigError):
        C.loads("mode: [unclosed")


# --- runner -------------------------------------------------------------------

def test_run_is_byte_identical_across_workers(tmp_path):
    texts = []
    for workers, batch in ((1, None), (2, 1), (3, 3)):
        cfg = C.from_dict(base(workers=workers, batch_size=batch,
                               outputs={"csv": str(tmp_path / f"w{workers}.csv"),
                                        "manifest": str(tmp_path / f"w{workers}.json")}))
        _, text = run_experiment(cfg)
        texts.append((tmp_path / f"w{workers}.csv").read_bytes())
        assert texts[-1].decode() == text
    assert texts[0] == texts[1] == texts[2]
    m = json.loads((tmp_path / "w1.json").read_text())
    assert m["config"]["trials"] == 4 and len(m["config_hash"]) == 64
    assert m["instance"]["kind"] == "sk"


def test_serial_and_monolithic_runs(tmp_path):
    _, text = run_experiment(C.from_dict(base(mode={"tag": "serial", "tau": 2e-9})))
    assert text.splitlines()[0].startswith("trial,t,epoch,energy")
    _, text = run_experiment(C.from_dict(base(mode={"tag": "monolithic"})))
    assert len(text.splitlines()) == 1 + 4


def test_coupled_experiment_columns():
    log, text = run_coupled_experiment(C.from_dict(base(
        instance={"generator": "lattice", "params": {"rows": 4, "cols": 3}},
        schedule={"kind": "constant", "beta_start": 10.0}, dt=1e-12, t_total=1e-9, checkpoints=4)))
    header = text.splitlines()[0].split(",")
    assert header[:3] == ["trial", "t", "ideal_energy"]
    assert len(text.splitlines()) == 1 + 4 * len(log.times)


# --- advisor ------------------------------------------------------------------

def test_energy_priority_is_serial():
    adv = advise(AdvisorInput("energy", 1e12, 4.0, RC))
    assert adv.mode == "serial" and "priority = energy" in adv.text()


def test_fast_interconnect_is_concurrent():
    assert advise(AdvisorInput("latency", 1e9, 4.0, RC)).mode == "concurrent"


def test_slow_interconnect_fixed_rc_is_serial():
    assert advise(AdvisorInput("latency", 1e8, 4.0, RC)).mode == "serial"


def test_large_slowdown_is_serial():
    adv = advise(AdvisorInput("latency", 1e8, 4.0, RC, rc_adjustable=True, rc_max=10 * RC, b=4))
    assert adv.mode == "serial"
    assert "slowdown is at least B" in adv.text()


def test_modest_slowdown_can_stay_concurrent():
    adv = advise(AdvisorInput("latency", 1e8, 4.0, RC, rc_adjustable=True, rc_max=3 * RC, b=4))
    assert adv.mode == "concurrent"
    adv = advise(AdvisorInput("latency", 1e7, 4.0, RC, rc_adjustable=True, rc_max=3 * RC, b=4))
    assert adv.mode == "serial"


def test_advisor_validation():
    with pytest.raises(UsageError):
        AdvisorInput("speed", 1e9, 4.0, RC)
    with pytest.raises(UsageError):
        AdvisorInput("latency", 1e9, 4.0, RC, rc_adjustable=True)


# --- plot data ----------------------------------------------------------------

def test_plotdata_schemas():
    assert plotdata.schema("fig5") == ("tau", "B", "w1_mean", "w1_boot_lo", "w1_boot_hi", "process")
    assert plotdata.schema("fig8") == ("frequency_hz", "mode", "B", "graph", "ttt_seconds_or_unreachable")
    assert plotdata.schema("fig9") == ("frequency_hz", "e_bit", "mode", "B", "ett_joules_or_unreachable")
    with pytest.raises(UsageError):
        plotdata.schema("fig42")


def test_plotdata_rows_are_sorted_and_extra_keys_ignored():
    recs = [
        {"frequency_hz": 1e9, "mode": "serial", "B": 4, "graph": "g", "ttt_seconds_or_unreachable": 1e-6, "x": 1},
        {"frequency_hz": 1e8, "mode": "serial", "B": 4, "graph": "g", "ttt_seconds_or_unreachable": "unreachable"},
    ]
    text = plotdata.emit_plotdata(recs, "fig8")
    lines = text.splitlines()
    assert lines[0] == "frequency_hz,mode,B,graph,ttt_seconds_or_unreachable"
    assert lines[1].startswith("100000000.0,") and lines[1].endswith("unreachable")
    assert text == plotdata.emit_plotdata(recs[::-1], "ttt")


def test_plotdata_missing_columns_are_listed():
    with pytest.raises(UsageError) as e:
        plotdata.emit_plotdata([{"tau": 1e-9, "B": 2}], "fig5")
    msg = str(e.value)
    for col in ("w1_mean", "w1_boot_lo", "w1_boot_hi", "process"):
        assert col in msg
