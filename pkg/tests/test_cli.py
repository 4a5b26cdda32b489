import csv
import io
import json
import subprocess
import sys

import pytest

from sbstein import BirthDeath, ConfigError, ExplicitChain, InvalidParameter, MM1Embedded, ReflectedSRW
from sbstein.cli import main
from sbstein.config import chain_from_dict, load_chain, load_test_function


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc, indent=1))
    return str(path)


@pytest.fixture
def srw_cfg(tmp_path):
    return write(tmp_path, "srw.json", {"family": "reflected_srw", "params": {"p": 0.75}})


@pytest.fixture
def mm1_cfg(tmp_path):
    return write(tmp_path, "mm1.json", {"family": "mm1_embedded", "params": {"rho": 0.5}})


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestConfig:
    def test_families(self):
        assert isinstance(chain_from_dict({"family": "reflected_srw", "params": {"p": 0.8}}), ReflectedSRW)
        assert isinstance(chain_from_dict({"family": "mm1_embedded", "params": {"rho": 0.2}}), MM1Embedded)
        bd = chain_from_dict({"family": "birth_death", "params": {"b": [0.3], "d": [0.4]}, "description": "x"})
        assert isinstance(bd, BirthDeath) and bd.description == "x"
        ex = chain_from_dict({"family": "explicit", "params": {"rows": [[0.5, 0.5], [1, 0]]}})
        assert isinstance(ex, ExplicitChain) and ex.n_states == 2

    def test_line_anchored(self, tmp_path):
        path = write(tmp_path, "c.json", '{\n  "family": "reflected_srw",\n  "params": {"p": 0.3}\n}\n')
        with pytest.raises(ConfigError, match=r"c\.json:3:"):
            load_chain(path)

    def test_syntax_error_line(self, tmp_path):
        path = write(tmp_path, "c.json", '{\n  "family": "reflected_srw",\n  "params": {"p": }\n}\n')
        with pytest.raises(ConfigError, match=r"c\.json:3:"):
            load_chain(path)

    @pytest.mark.parametrize("doc", [
        {"family": "nope", "params": {}},
        {"family": "reflected_srw"},
        {"family": "reflected_srw", "params": {}},
        {"family": "reflected_srw", "params": {"p": "0.7"}},
        {"family": "reflected_srw", "params": {"p": 0.7, "q": 1}},
        {"family": "reflected_srw", "params": {"p": True}},
        [1, 2],
    ])
    def test_rejects(self, doc):
        with pytest.raises(ConfigError):
            chain_from_dict(doc)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_chain(tmp_path / "absent.json")

    def test_test_function(self, tmp_path):
        path = write(tmp_path, "h.json", {"values": {"0": 1.0, "3": -0.5}, "default": 0.25})
        h = load_test_function(path)
        assert h(0) == 1.0 and h(3) == -0.5 and h(7) == 0.25
        bad = write(tmp_path, "bad.json", {"values": {"0": 2.0}, "bound": 1.0})
        with pytest.raises(ConfigError):
            load_test_function(bad)


class TestConvergence:
    def test_srw_fixed_r(self, srw_cfg, capsys):
        code, out, _ = run(["convergence", "--chain", srw_cfg, "--t0", "0", "--t1", "30", "--r", "1.1"], capsys)
        assert code == 0
        data = rows(out)
        assert len(data) == 31
        assert list(data[0]) == ["t", "r", "bound", "exact_tv", "holds"]
        assert all(r["holds"] == "true" for r in data)

    def test_mm1_endpoint(self, mm1_cfg, capsys):
        code, out, _ = run(["convergence", "--chain", mm1_cfg, "--t1", "30", "--r", "1.125"], capsys)
        assert code == 0
        assert all(r["holds"] == "true" for r in rows(out))

    def test_grid_and_opt(self, srw_cfg, capsys):
        code, out, _ = run(["convergence", "--chain", srw_cfg, "--t1", "4", "--r", "grid:3"], capsys)
        assert code == 0 and len(rows(out)) == 15
        code, out, _ = run(["convergence", "--chain", srw_cfg, "--t1", "4", "--r", "opt"], capsys)
        assert code == 0 and len(rows(out)) == 5

    def test_oracle_mode(self, tmp_path, capsys):
        cfg = write(tmp_path, "bd.json", {"family": "birth_death", "params": {"b": [0.3], "d": [0.5]}})
        code, out, _ = run(["convergence", "--chain", cfg, "--t1", "10", "--delta-mean", "oracle"], capsys)
        assert code == 0
        assert all(r["r"] == "" for r in rows(out))

    def test_no_coupling(self, tmp_path, capsys):
        cfg = write(tmp_path, "bd.json", {"family": "birth_death", "params": {"b": [0.3], "d": [0.5]}})
        code, _, err = run(["convergence", "--chain", cfg], capsys)
        assert code == 2 and "oracle" in err

    def test_empty_grid(self, srw_cfg, capsys):
        assert run(["convergence", "--chain", srw_cfg, "--t0", "5", "--t1", "2"], capsys)[0] == 2

    def test_r_outside(self, srw_cfg, capsys):
        assert run(["convergence", "--chain", srw_cfg, "--r", "3.0"], capsys)[0] == 2

    def test_deterministic_file(self, srw_cfg, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            assert main(["convergence", "--chain", srw_cfg, "--t1", "8", "--out", str(path)]) == 0
        assert a.read_bytes() == b.read_bytes()
        first = rows(a.read_text())[0]
        assert len(first["exact_tv"].replace("0.", "")) == 17
        assert float(first["exact_tv"]) == pytest.approx(2 / 3, abs=1e-15)


class TestCompare:
    def test_self(self, srw_cfg, capsys):
        code, out, _ = run(["compare", "--chain", srw_cfg, "--chain2", srw_cfg], capsys)
        assert code == 0
        for r in rows(out):
            assert float(r["exact_tv"]) == 0.0
            assert float(r["bound_general"]) < 1e-12
            assert r["domination"] == "Both"

    def test_srw_pair(self, srw_cfg, tmp_path, capsys):
        q = write(tmp_path, "q.json", {"family": "reflected_srw", "params": {"p": 0.8}})
        code, out, _ = run(["compare", "--chain", srw_cfg, "--chain2", q], capsys)
        assert code == 0
        r = rows(out)[0]
        assert r["domination"] == "PDominatesQ"
        assert float(r["bound_general"]) == pytest.approx(float(r["bound_dominated"]), abs=1e-10)
        assert r["bound_bd"] != ""

    def test_mm1_pair(self, mm1_cfg, tmp_path, capsys):
        q = write(tmp_path, "q.json", {"family": "mm1_embedded", "params": {"rho": 0.6}})
        code, out, _ = run(["compare", "--chain", mm1_cfg, "--chain2", q], capsys)
        assert code == 0
        assert all(r["bound_bd"] == "" for r in rows(out))


class TestTruncation:
    def test_srw(self, srw_cfg, capsys):
        code, out, _ = run(["truncation", "--chain", srw_cfg, "--n0", "3", "--n1", "10"], capsys)
        assert code == 0
        data = rows(out)
        exact = [float(r["exact_tv"]) for r in data]
        for a, b in zip(exact, exact[1:]):
            assert 0.2 <= b / a <= 0.5

    def test_nu_choices(self, srw_cfg, capsys):
        code, first, _ = run(["truncation", "--chain", srw_cfg, "--n0", "6", "--n1", "6", "--nu", "point:0"], capsys)
        code2, last, _ = run(["truncation", "--chain", srw_cfg, "--n0", "6", "--n1", "6", "--nu", "point:n"], capsys)
        assert code == code2 == 0
        assert float(rows(last)[0]["bound_truncation"]) < float(rows(first)[0]["bound_truncation"])
        assert run(["truncation", "--chain", srw_cfg, "--nu", "uniform"], capsys)[0] == 0

    def test_degenerate(self, srw_cfg, capsys):
        code, out, _ = run(["truncation", "--chain", srw_cfg, "--n0", "0", "--n1", "0"], capsys)
        assert code == 0
        assert float(rows(out)[0]["exact_tv"]) == pytest.approx(2 * (1 - 2 / 3))

    def test_bad_nu(self, srw_cfg, capsys):
        assert run(["truncation", "--chain", srw_cfg, "--nu", "point:99", "--n1", "4"], capsys)[0] == 2
        assert run(["truncation", "--chain", srw_cfg, "--nu", "gauss"], capsys)[0] == 2


class TestVerify:
    def test_default_suite(self, capsys):
        code, out, _ = run(["verify"], capsys)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines and all(l.startswith("PASS") for l in lines)

    def test_bad_parameter(self, tmp_path, capsys):
        cfg = write(tmp_path, "c.json", {"family": "reflected_srw", "params": {"p": 0.4}})
        assert run(["verify", "--chain", cfg], capsys)[0] == 2

    def test_not_single_birth(self, tmp_path, capsys):
        cfg = write(tmp_path, "c.json", {"family": "explicit", "params": {"rows": [[0.5, 0, 0.5], [0.5, 0.5, 0], [0, 0.5, 0.5]]}})
        assert run(["verify", "--chain", cfg], capsys)[0] == 2

    def test_explicit_chain_with_h(self, tmp_path, capsys):
        cfg = write(tmp_path, "c.json", {"family": "explicit", "params": {"rows": [[0.5, 0.5, 0], [0.2, 0.3, 0.5], [0, 0.6, 0.4]]}})
        h = write(tmp_path, "h.json", {"values": {"1": 1.0}, "default": 0.0})
        code, out, _ = run(["verify", "--chain", cfg, "--test-function", h], capsys)
        assert code == 0
        assert "INFO" in out


def test_usage_errors(capsys):
    assert main([]) == 2
    assert main(["convergence"]) == 2


def test_module_entry_point(srw_cfg):
    out = subprocess.run([sys.executable, "-m", "sbstein", "truncation", "--chain", srw_cfg, "--n1", "4"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout.startswith("n,bound_truncation,exact_tv,ratio,holds")
