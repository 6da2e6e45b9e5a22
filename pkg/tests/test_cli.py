import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dpsep.cli import cmd_audit, main
from dpsep.config import ConfigError, ExperimentConfig, parse, serialize
from dpsep.perception import PerceptionFamily
from dpsep.probcore import tv


def run(tmp_path, name, cmd, text="", *extra):
    cfg = tmp_path / f"{name}.cfg"
    cfg.write_text(text)
    out = tmp_path / f"{name}.out"
    code = main([cmd, "--config", str(cfg), "--out", str(out), *extra])
    return code, out


# -- config ----------------------------------------------------------------

def test_config_round_trip_default():
    text = serialize(ExperimentConfig())
    assert serialize(parse(text)) == text
    assert parse(text) == ExperimentConfig()


@given(
    st.floats(0.01, 0.99),
    st.sampled_from(["bsc", "bec"]),
    st.floats(0, 1),
    st.floats(0, 4),
    st.integers(1, 12),
    st.integers(0, 2**64 - 1),
)
def test_config_round_trip_random(p, channel, cp, kappa, n, seed):
    cfg = ExperimentConfig(source=(1 - p, p), channel=channel, channel_p=cp, kappa=kappa, n=n, seed=seed)
    text = serialize(cfg)
    assert parse(text) == cfg
    assert serialize(parse(text)) == text


def test_config_matrix_fields():
    cfg = parse("channel = matrix\nchannel_matrix = 0.9,0.1;0.2,0.8\ndistortion = matrix\ndistortion_matrix = 0,1;2,0\n")
    assert cfg.channel_obj().matrix[1, 0] == 0.2
    assert cfg.distortion_obj().d_max == 2.0
    assert parse(serialize(cfg)) == cfg


@pytest.mark.parametrize(
    "bad",
    ["kappa = -1", "bogus = 3", "channel_p = 1.5", "n = two", "n = 0", "source = 0.2,0.2", "scheme = magic", "kappa"],
)
def test_config_rejects(bad):
    with pytest.raises(ConfigError):
        parse(bad)


# -- capacity --------------------------------------------------------------

@pytest.mark.parametrize("text,C", [("channel_p = 0.2", 0.27807), ("channel_p = 0.0", 1.0), ("channel = bec\nchannel_p = 0.3", 0.7)])
def test_cmd_capacity(tmp_path, text, C):
    code, out = run(tmp_path, "cap", "capacity", text)
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["C"] == pytest.approx(C, abs=1e-5)
    assert list(doc) == ["C", "input_dist"]


def test_parse_error_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, "bad", "capacity", "channel_p = 7")
    assert code == 2
    assert "error" in capsys.readouterr().err
    assert main(["capacity", "--config", str(tmp_path / "missing.cfg")]) == 2


# -- region ----------------------------------------------------------------

def _csv_rows(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "R,D,P"
    return [tuple(map(float, ln.split(","))) for ln in lines[1:]]


def test_cmd_region(tmp_path):
    code, out = run(tmp_path, "reg", "region", "region_points = 3")
    assert code == 0
    rows = _csv_rows(out)
    assert len(rows) == 3 and [r[2] for r in rows] == sorted(r[2] for r in rows)
    assert all(abs(r[1] - 0.1) <= 1e-3 for r in rows)
    assert json.loads((tmp_path / "reg.out.witness.json").read_text())[0]["witness"]


def test_cmd_region_extremes(tmp_path):
    _, out = run(tmp_path, "k0", "region", "kappa = 0\nregion_points = 2")
    rows = _csv_rows(out)
    assert rows[0][2] == 0.0 and rows[0][1] == pytest.approx(0.5, abs=1e-9)
    _, out = run(tmp_path, "k2", "region", "kappa = 2\nregion_points = 2")
    assert all(r[1] == pytest.approx(0.0, abs=1e-9) for r in _csv_rows(out))


# -- counterexample --------------------------------------------------------

@pytest.mark.parametrize("p,sep", [(0.1, 0.18), (0.25, 0.375), (0.49, 2 * 0.49 * 0.51)])
def test_cmd_counterexample(tmp_path, p, sep):
    code, out = run(tmp_path, "cx", "counterexample", f"channel_p = {p}")
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["uncoded"]["D"] == pytest.approx(p, abs=1e-9)
    assert doc["separate_nocr"]["D"] == pytest.approx(sep, abs=0.005)
    assert doc["gap"] == pytest.approx(sep - p, abs=0.005)
    assert doc["gap"] > 0


def test_cmd_counterexample_range(tmp_path):
    code, _ = run(tmp_path, "cx", "counterexample", "channel_p = 0.5")
    assert code == 2


# -- simulate --------------------------------------------------------------

def test_cmd_simulate_uncoded_exact(tmp_path):
    code, out = run(tmp_path, "sim", "simulate", "n = 8")
    doc = json.loads(out.read_text())
    assert code == 0 and doc["mode"] == "exact"
    assert doc["D_hat"] == pytest.approx(0.1, abs=1e-12)
    assert doc["P_strong"] <= 1e-12


def test_cmd_simulate_cr_synthesis(tmp_path):
    code, out = run(tmp_path, "cr", "simulate", "scheme = cr_synthesis\nn = 1", "--trials", "100000")
    doc = json.loads(out.read_text())
    assert code == 0 and doc["mode"] == "exact"
    code, out = run(tmp_path, "cr", "simulate", "scheme = cr_synthesis\nscheme_mode = monte_carlo\nn = 4", "--trials", "100000")
    doc = json.loads(out.read_text())
    assert doc["mode"] == "monte_carlo"
    assert doc["D_hat"] == pytest.approx(0.1, abs=0.01)


def test_cmd_simulate_concat(tmp_path):
    code, out = run(tmp_path, "cc", "simulate", "scheme = concat\nn = 2\nkappa = 1")
    doc = json.loads(out.read_text())
    assert doc["D_hat"] == pytest.approx(0.3, abs=1e-9)


def test_cmd_simulate_separated_and_trace(tmp_path):
    text = "source = 0.8,0.2\nchannel_p = 0.05\nscheme = separated\nscheme_R = 0.75\nscheme_delta_R = 0.05\nscheme_err_inject = 0.01\nk = 2"
    code, out = run(tmp_path, "sep", "simulate", text)
    doc = json.loads(out.read_text())
    assert code == 0 and doc["details"]["coupling_tv"] <= doc["err_prob"] + 1e-12
    trace = tmp_path / "trace.csv"
    code, out = run(tmp_path, "sep2", "simulate", text, "--trials", "50", "--trace", str(trace))
    assert json.loads(out.read_text())["mode"] == "monte_carlo"
    assert trace.read_text().splitlines()[0] == "trial,s,s_hat,distortion"
    assert len(trace.read_text().splitlines()) == 51


def test_outputs_are_byte_identical(tmp_path):
    text = "scheme = quantize_restore\nscheme_mode = monte_carlo\nscheme_R = 0.5\ntrials = 3000"
    _, a = run(tmp_path, "a", "simulate", text, "--seed", "5")
    _, b = run(tmp_path, "b", "simulate", text, "--seed", "5")
    _, c = run(tmp_path, "c", "simulate", text, "--seed", "6")
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


# -- audit -----------------------------------------------------------------

def test_cmd_audit_passes(tmp_path):
    code, out = run(tmp_path, "aud", "audit", "n = 4")
    doc = json.loads(out.read_text())
    assert code == 0 and doc["pass"]
    assert len(doc["checks"]) == 3 and doc["converse"]["pass"]


def test_cmd_audit_kappa_rejection(tmp_path):
    code, out = run(tmp_path, "kap", "audit", "kappa = 0.5\ncheck_trials = 20")
    doc = json.loads(out.read_text())
    assert code == 4
    assert doc["converse"]["build"] == "rejected"


def test_cmd_audit_broken_family():
    neg = PerceptionFamily("neg_tv", lambda n, p, q: -tv(p, q), 1.0, True)
    _, _, code = cmd_audit(ExperimentConfig(check_trials=30), family=neg)
    assert code == 4
