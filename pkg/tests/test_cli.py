import json
import subprocess
import sys

import numpy as np
import pytest

from medquant.binom import z_half
from medquant.cli import InputError, main, parse_grid, read_table
from medquant.errors import PreconditionError
from medquant.sim import sample_qr_data


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def six(tmp_path):
    p = tmp_path / "six.csv"
    p.write_text("value\n3\n1\n4\n1.5\n5\n9\n")
    return p


@pytest.fixture
def qr_file(tmp_path):
    p = tmp_path / "qr.csv"
    np.savetxt(p, sample_qr_data(600, 1.0, 4), delimiter=",", header="x,y", comments="")
    return p


class TestReadTable:
    def test_header_detection(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("1,2\n3,4\n")
        assert read_table(p).shape == (2, 2)
        p.write_text("a,b\n1,2\n\n3,4\n")
        assert read_table(p).tolist() == [[1, 2], [3, 4]]

    def test_errors_name_the_line(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("1,2\n3\n")
        with pytest.raises(InputError, match="line 2"):
            read_table(p)
        p.write_text("h\n1\nnan\n")
        with pytest.raises(InputError, match="line 3"):
            read_table(p)
        p.write_text("h\n")
        with pytest.raises(InputError):
            read_table(p)


class TestCi:
    def test_exact_six(self, six, capsys):
        code, out, _ = run(["ci", six, "--method", "exact"], capsys)
        doc = json.loads(out)
        assert code == 0
        assert doc == {
            "method": "ExactOrderStat", "alpha": 0.05, "lower": 1.0, "upper": 9.0,
            "width": 8.0, "order_indices": [1, 6], "n": 6,
        }

    def test_five_values_infinite(self, tmp_path, capsys):
        p = tmp_path / "five.csv"
        p.write_text("1\n2\n3\n4\n5\n")
        code, out, _ = run(["ci", p], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["lower"] == "-inf" and doc["upper"] == "+inf"

    def test_malformed_row(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("1\n2\noops\n")
        code, _, err = run(["ci", p], capsys)
        assert code == 2 and "line 3" in err

    def test_missing_file(self, tmp_path, capsys):
        assert run(["ci", tmp_path / "none.csv"], capsys)[0] == 2

    def test_precondition(self, tmp_path, capsys):
        p = tmp_path / "one.csv"
        p.write_text("1\n")
        assert run(["ci", p, "--method", "wald"], capsys)[0] == 3

    def test_bad_alpha(self, six, capsys):
        assert run(["ci", six, "--alpha", "1.5"], capsys)[0] == 2

    @pytest.mark.parametrize("method", ["exact", "hoeffding", "wald", "bootstrap", "subsample"])
    def test_methods_to_file(self, tmp_path, method, capsys):
        p = tmp_path / "x.csv"
        np.savetxt(p, np.random.default_rng(0).normal(size=100))
        out = tmp_path / "o.json"
        assert run(["ci", p, "--method", method, "--out", out], capsys)[0] == 0
        doc = json.loads(out.read_text())
        assert set(doc) >= {"method", "n", "alpha", "lower", "upper", "width"}
        assert doc["n"] == 100


class TestGhulc:
    def test_six_blocks_tau(self, qr_file, capsys):
        code, out, _ = run(["ghulc", qr_file, "--B", 6, "--estimator", "qr-slope"], capsys)
        doc = json.loads(out)
        assert code == 0
        assert doc["tau"] == pytest.approx(0.1, abs=1e-14)
        assert (doc["B"], doc["c"]) == (6, 2) and doc["c_star"] in (1, 2)
        assert doc["lower"] <= doc["upper"]

    def test_reproducible(self, qr_file, capsys):
        a = run(["ghulc", qr_file, "--B", 24, "--estimator", "qr-slope", "--seed", 5], capsys)[1]
        b = run(["ghulc", qr_file, "--B", 24, "--estimator", "qr-slope", "--seed", 5], capsys)[1]
        assert a == b

    def test_errors(self, qr_file, six, capsys):
        code, _, err = run(["ghulc", qr_file, "--B", 4], capsys)
        assert code == 3 and "6" in err
        assert run(["ghulc", six, "--B", 7], capsys)[0] == 3
        assert run(["ghulc", six, "--B", 6, "--estimator", "qr-slope"], capsys)[0] == 2


class TestLimitDensity:
    def test_grid_parsing(self):
        np.testing.assert_allclose(parse_grid("0:1:3"), [0, 0.5, 1])
        np.testing.assert_allclose(parse_grid("1,2.5"), [1, 2.5])
        for bad in ("1:0:3", "0:1", "a,b", "0:1:0", "1,1"):
            with pytest.raises(PreconditionError):
                parse_grid(bad)

    def test_invalid_grid_exit(self, capsys):
        assert run(["limit-density", "--rho", 2, "--grid", "2:1:5"], capsys)[0] == 3

    def test_point_mass_at_z(self, capsys):
        z = z_half(0.05)
        code, out, _ = run(["limit-density", "--rho", 1, "--grid", f"{z - 0.5},{z},{z + 0.5}", "--draws", 500], capsys)
        lines = out.splitlines()
        assert code == 0 and lines[0] == "x,density"
        dens = [float(line.split(",")[1]) for line in lines[1:]]
        assert dens[1] > 100 and dens[0] == dens[2] == 0.0

    @pytest.mark.parametrize("alpha", [0.01, 0.05, 0.1])
    def test_repeat_bitwise(self, tmp_path, alpha, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            assert run(["limit-density", "--rho", 2, "--alpha", alpha, "--draws", 3000, "--out", p], capsys)[0] == 0
        assert a.read_bytes() == b.read_bytes()
        assert len(a.read_text().splitlines()) == 402

    def test_asymmetric(self, capsys):
        code, out, _ = run(["limit-density", "--rho", 2, "--m-minus", 0.3, "--m-plus", 0.7, "--draws", 1000], capsys)
        assert code == 0 and len(out.splitlines()) == 402
        assert run(["limit-density", "--rho", 2, "--m-minus", -1], capsys)[0] == 2


class TestSimulate:
    def write(self, tmp_path, **cfg):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps(cfg))
        return p

    def test_coverage_config(self, tmp_path, capsys):
        cfg = self.write(
            tmp_path, experiment="coverage", methods=["exact", "bootstrap"], n_list=[50, 100], rho_list=[1, 5],
            alpha=0.05, replications=100, seed=3, output_dir="out", n_boot=100,
        )
        assert run(["simulate", "--config", cfg], capsys)[0] == 0
        rows = (tmp_path / "out" / "summary.csv").read_text().splitlines()
        assert len(rows) == 1 + 2 * 2 * 2
        widths = (tmp_path / "out" / "widths.csv").read_text().splitlines()
        assert len(widths) == 1 + 8 * 100
        first = (tmp_path / "out" / "summary.csv").read_bytes()
        assert run(["simulate", "--config", cfg], capsys)[0] == 0
        assert (tmp_path / "out" / "summary.csv").read_bytes() == first

    def test_seed_changes_widths(self, tmp_path, capsys):
        base = dict(experiment="coverage", methods=["exact"], n_list=[50], rho_list=[2], alpha=0.05, replications=100)
        a = self.write(tmp_path, **base, seed=1, output_dir="a")
        assert run(["simulate", "--config", a], capsys)[0] == 0
        b = self.write(tmp_path, **base, seed=2, output_dir="b")
        assert run(["simulate", "--config", b], capsys)[0] == 0
        wa, wb = (tmp_path / d / "widths.csv" for d in "ab")
        assert wa.read_text().splitlines()[0] == wb.read_text().splitlines()[0]
        assert wa.read_bytes() != wb.read_bytes()

    def test_ghulc_config(self, tmp_path, capsys):
        cfg = self.write(
            tmp_path, experiment="ghulc", n_list=[240], beta_list=[1.0], B_list=[6, 24],
            alpha=0.05, replications=20, seed=0, output_dir="g",
        )
        assert run(["simulate", "--config", cfg], capsys)[0] == 0
        rows = (tmp_path / "g" / "summary.csv").read_text().splitlines()
        assert [r.split(",")[0] for r in rows[1:]] == ["HulC", "GHulC", "GHulC"]

    def test_width_limit_config(self, tmp_path, capsys):
        cfg = self.write(tmp_path, experiment="width-limit", rho=2.0, n=200, alpha=0.05, replications=50, seed=0, output_dir="w")
        assert run(["simulate", "--config", cfg], capsys)[0] == 0
        doc = json.loads((tmp_path / "w" / "report.json").read_text())
        assert 0 <= doc["meta"]["ks_distance"] <= 1

    @pytest.mark.parametrize(
        "patch,key",
        [
            ({"experiment": "nope"}, "experiment"),
            ({"alpha": 2}, "alpha"),
            ({"n_list": []}, "n_list"),
            ({"replications": 10}, "replications"),
            ({"colour": 1}, "colour"),
        ],
    )
    def test_config_errors_name_key(self, tmp_path, capsys, patch, key):
        cfg = dict(experiment="coverage", methods=["exact"], n_list=[50], rho_list=[1], alpha=0.05,
                   replications=100, seed=0, output_dir="o")
        cfg.update(patch)
        code, _, err = run(["simulate", "--config", self.write(tmp_path, **cfg)], capsys)
        assert code == 2 and key in err

    def test_missing_key(self, tmp_path, capsys):
        p = self.write(tmp_path, experiment="coverage")
        code, _, err = run(["simulate", "--config", p], capsys)
        assert code == 2 and "missing" in err

    def test_invalid_json(self, tmp_path, capsys):
        p = tmp_path / "c.json"
        p.write_text("{\n oops")
        code, _, err = run(["simulate", "--config", p], capsys)
        assert code == 2 and "line 2" in err


def test_module_entry_point(six):
    res = subprocess.run([sys.executable, "-m", "medquant", "ci", str(six)], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["order_indices"] == [1, 6]
    res = subprocess.run([sys.executable, "-m", "medquant", "ci"], capture_output=True, text=True)
    assert res.returncode == 2
