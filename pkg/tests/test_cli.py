import json
import os

import numpy as np
import pytest

from ultrajet import cli, serial
from ultrajet.jets import CompactSet1D, sample_jet


def write(tmp_path, name, payload):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


@pytest.fixture
def gev2_spec(tmp_path):
    return write(tmp_path, "gev2.json",
                 {"family": "gevrey", "params": {"s": 2}, "K": 128})


@pytest.fixture
def om2_spec(tmp_path):
    return write(tmp_path, "om2.json", {"kind": "omega_s", "s": 2, "K": 128})


class TestAnalyze:
    def test_gevrey2_holds(self, tmp_path, gev2_spec):
        out = str(tmp_path / "o")
        assert cli.main(["--out", out, "analyze", gev2_spec]) == 0
        rep = json.load(open(os.path.join(out, "analyze.json")))
        assert all(v["verdict"] == "HOLDS_UP_TO_K"
                   for v in rep["moderate_growth"].values())
        assert os.path.exists(os.path.join(out, "sequence.csv"))
        assert os.path.exists(os.path.join(out, "associated.csv"))

    def test_qgevrey_fails_exit_1(self, tmp_path):
        spec = write(tmp_path, "q.json",
                     {"family": "qgevrey", "params": {"q": 2}, "K": 128})
        assert cli.main(["--out", str(tmp_path / "o"), "analyze", spec]) == 1

    def test_malformed_spec_exit_2(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{nope")
        assert cli.main(["--out", str(tmp_path / "o"), "analyze", str(p)]) == 2

    def test_env_K_override(self, tmp_path, gev2_spec, monkeypatch):
        spec = write(tmp_path, "noK.json", {"family": "gevrey", "params": {"s": 2}})
        monkeypatch.setenv("ULTRAJET_K", "64")
        out = str(tmp_path / "o")
        assert cli.main(["--out", out, "analyze", spec]) == 0
        rep = json.load(open(os.path.join(out, "analyze.json")))
        assert rep["prefix_K"] == 64


class TestDescendDecide:
    def test_descend_outputs(self, tmp_path, gev2_spec):
        out = str(tmp_path / "o")
        assert cli.main(["--out", out, "descend", gev2_spec]) == 0
        header = open(os.path.join(out, "descendant.csv")).readline().strip()
        assert header == "k,nu,tau,sigma,sigma_star,s"

    def test_decide_yes(self, tmp_path, om2_spec):
        out = str(tmp_path / "o")
        assert cli.main(["--out", out, "decide", om2_spec]) == 0
        rep = json.load(open(os.path.join(out, "decide.json")))
        assert rep["extension_property"] == "YES"
        assert rep["5.19"]["condition_id"] == "5.19"

    def test_decide_deterministic(self, tmp_path, om2_spec):
        o1, o2 = str(tmp_path / "r1"), str(tmp_path / "r2")
        cli.main(["--out", o1, "decide", om2_spec])
        cli.main(["--out", o2, "decide", om2_spec])
        assert (open(os.path.join(o1, "decide.json")).read()
                == open(os.path.join(o2, "decide.json")).read())

    def test_matrix_outputs(self, tmp_path, om2_spec):
        out = str(tmp_path / "o")
        assert cli.main(["--out", out, "matrix", om2_spec]) == 0
        assert os.path.exists(os.path.join(out, "matrix.csv"))
        assert os.path.exists(os.path.join(out, "admissibility.json"))


class TestExtendCmd:
    def test_extend_exp(self, tmp_path, om2_spec):
        jet = write(tmp_path, "jet.json",
                    {"kind": "exp", "points": [0.0], "order_cap": 16})
        out = str(tmp_path / "o")
        code = cli.main(["--out", out, "extend", jet, om2_spec,
                         "--d-min", "1e-4", "--p-max-eval", "4"])
        assert code == 0
        man = json.load(open(os.path.join(out, "extension.json")))
        assert man["verification"]["boundary"]["monotone_ok"]
        assert os.path.exists(os.path.join(out, "extension_spline.csv"))
        assert os.path.exists(os.path.join(out, "probes.csv"))
        assert os.path.exists(os.path.join(out, "plot_extension.gp"))

    def test_selftest(self):
        assert cli.main(["selftest"]) == 0


class TestSerial:
    def test_jet_roundtrip(self, tmp_path):
        E = CompactSet1D(points=(0.0, 1.0))
        F = sample_jet({"kind": "exp"}, E, p_max=8)
        d = serial.jet_to_dict(F)
        F2 = serial.jet_from_file(d)
        assert F2.order_cap == 8
        assert np.allclose(F2.values[1.0], F.values[1.0])

    def test_jet_value_row_mismatch(self):
        with pytest.raises(Exception):
            serial.jet_from_file({"points": [0.0, 1.0], "order_cap": 2,
                                  "values": [[1, 1, 1]]})

    def test_csv_format(self, tmp_path):
        path = str(tmp_path / "t.csv")
        serial.write_csv(path, {"a": np.array([1.0, 2.0]),
                                "b": np.array([3, 4])})
        lines = open(path).read().strip().split("\n")
        assert lines[0] == "a,b"
        assert len(lines) == 3
