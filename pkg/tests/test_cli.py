import json
import math
import shutil

import numpy as np
import pytest

from coulomb_rings import io
from coulomb_rings.cli import main
from coulomb_rings.core_model import Configuration, ring_configuration
from coulomb_rings.errors import BadInputFile
from coulomb_rings.render import render_svg
from coulomb_rings.report import as_csv, compare, ring_deltas, rows_as_records


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestConfigJson:
    def test_roundtrip_bit_identical(self, tmp_path, rng):
        c = Configuration(rng.standard_normal((17, 2)) * 1e3 + 1 / 3)
        path = tmp_path / "c.json"
        io.write_config(path, c, q=0.1 + 0.2)
        back, q = io.read_config(path)
        np.testing.assert_array_equal(back.positions, c.positions)
        assert q == 0.1 + 0.2
        d = json.loads(path.read_text())
        assert set(d) == {"n", "q", "positions"} and d["n"] == 17

    def test_bad_files(self, tmp_path):
        with pytest.raises(BadInputFile):
            io.read_config(tmp_path / "missing.json")
        (tmp_path / "bad.json").write_text("{not json")
        with pytest.raises(BadInputFile):
            io.read_config(tmp_path / "bad.json")
        (tmp_path / "empty.json").write_text('{"n": 0, "q": 0, "positions": []}')
        with pytest.raises(BadInputFile):
            io.read_config(tmp_path / "empty.json")
        (tmp_path / "count.json").write_text('{"n": 3, "q": 0, "positions": [[0, 1]]}')
        with pytest.raises(BadInputFile):
            io.read_config(tmp_path / "count.json")


class TestGolden:
    def test_hashes_pinned(self):
        for name in io.TABLE_FILES:
            assert io.table_hash(io.data_dir() / name) == io.TABLE_SHA256[name]

    @pytest.mark.parametrize("m,nth,nexp", [
        (44, (22, 14, 7, 1), (21, 15, 7, 1)),
        (50, (24, 16, 8, 2), (22, 15, 9, 4)),
        (100, (36, 28, 20, 12, 4), (31, 25, 19, 14, 8, 3)),
    ])
    def test_rows(self, m, nth, nexp):
        row = compare([m])[0]
        assert row.published_nth == nth and row.published_nexp == nexp
        assert row.nth_matches

    def test_unknown_m_still_predicts(self, caplog):
        row = compare([77])[0]
        assert row.published_nth is None and row.predicted.m == 77
        assert "M=77" in caplog.text

    def test_deltas(self):
        assert ring_deltas((20, 14, 8), (21, 15, 7, 1)) == (-1, -1, 1, -1)


class TestRender:
    def test_hexagon_svg(self):
        svg = render_svg(ring_configuration(6, math.sqrt(2.5)))
        assert svg.count('class="particle"') == 6
        assert svg.count('class="ring"') == 1
        assert svg.count('class="disc"') == 1
        assert svg == render_svg(ring_configuration(6, math.sqrt(2.5)))

    def test_center_particle_gets_no_ring(self):
        svg = render_svg(ring_configuration(5, math.sqrt(3), center=True))
        assert svg.count('class="ring"') == 1
        assert svg.count('class="particle"') == 6

    def test_render_command(self, tmp_path, capsys):
        cfg = tmp_path / "hex.json"
        io.write_config(cfg, ring_configuration(6, math.sqrt(2.5)))
        code, _, _ = run(capsys, "render", str(cfg), "--svg", str(tmp_path / "hex.svg"))
        assert code == 0
        assert (tmp_path / "hex.svg").read_text().startswith("<svg")

    def test_render_empty_is_io_error(self, tmp_path, capsys):
        cfg = tmp_path / "empty.json"
        cfg.write_text('{"n": 0, "q": 0.0, "positions": []}')
        code, _, err = run(capsys, "render", str(cfg), "--svg", str(tmp_path / "x.svg"))
        assert code == 2 and "no positions" in err


class TestCommands:
    def test_energy_ring(self, capsys):
        code, out, _ = run(capsys, "energy", "--ring", "6", "--json")
        d = json.loads(out)
        assert code == 0
        assert d["total"] == pytest.approx(15 - 15 * math.log(2.5) - 6 * math.log(6), abs=1e-12)
        assert d["grad_norm"] < 1e-12

    def test_energy_file(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        io.write_config(cfg, ring_configuration(5, math.sqrt(3.0)), q=1.0)
        code, out, _ = run(capsys, "energy", str(cfg), "--json")
        d = json.loads(out)
        assert d["q"] == 1.0 and d["grad_norm"] < 1e-10

    def test_spectrum(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--n", "6", "--json")
        d = json.loads(out)
        assert d["radial"] == [10, 5, 2, 1, 2, 5] and d["stable"] and d["nmax"] == 6 and d["r2"] == 2.5

    def test_nmax(self, capsys):
        assert run(capsys, "nmax", "--m", "100")[1].strip() == "36"
        assert run(capsys, "nmax", "--q", "0.5")[1].strip() == "7"
        assert run(capsys, "nmax")[0] == 2

    def test_shells(self, capsys):
        code, out, _ = run(capsys, "shells", "100", "25")
        assert "36/28/20/12/4" in out and "16/8/1" in out
        code, out, _ = run(capsys, "shells", "--range", "40", "42", "--json")
        rows = json.loads(out)["rows"]
        assert [r["shells"] for r in rows] == ["21/13/6", "21/14/6", "22/14/6"]

    def test_compare_outputs_agree(self, tmp_path, capsys):
        code, out, _ = run(capsys, "compare", "--range", "40", "60", "--csv", str(tmp_path / "t.csv"),
                           "--out", str(tmp_path / "t.json"))
        assert code == 0
        recs = json.loads((tmp_path / "t.json").read_text())["rows"]
        csv_lines = (tmp_path / "t.csv").read_text().splitlines()[1:]
        assert len(recs) == len(csv_lines) == 21
        for rec, line in zip(recs, csv_lines):
            cells = line.split(",")
            assert cells[0] == str(rec["M"]) and cells[1] == rec["predicted"] and cells[5] == rec["published_nexp"]
            assert rec["predicted"] in out

    def test_compare_with_anneal(self, capsys):
        rows = compare([10], run_anneal=True, anneal_kwargs={"seed": 42})
        assert rows[0].observed.occupations == (8, 2)
        assert rows[0].max_abs_delta == 0
        assert rows_as_records(rows)[0]["deltas"] == [0, 0]
        assert "8/2" in as_csv(rows)

    def test_anneal_outputs(self, tmp_path, capsys):
        out = tmp_path / "a.json"
        svg = tmp_path / "a.svg"
        code, _, _ = run(capsys, "anneal", "--m", "6", "--seed", "3", "--restarts", "4",
                         "--out", str(out), "--svg", str(svg), "--quiet")
        assert code == 0
        d = json.loads(out.read_text())
        assert d["params"]["m"] == 6 and d["params"]["seed"] == 3 and d["params"]["restarts"] == 4
        assert d["result"]["signature"] == "5/1"
        c, _ = io.read_config(out)
        assert c.n == 6
        assert svg.read_text().count('class="particle"') == 6

    def test_config_file_overrides_schedule(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"sweeps": 100, "restarts": 2}))
        code, out, _ = run(capsys, "anneal", "--m", "4", "--config", str(cfg), "--json")
        d = json.loads(out)
        assert d["params"]["sweeps"] == 100 and d["params"]["restarts"] == 2

    def test_bad_config_is_io_error(self, tmp_path, capsys):
        assert run(capsys, "shells", "5", "--config", str(tmp_path / "nope.json"))[0] == 2


class TestVerify:
    def test_fresh_checkout_passes(self, capsys):
        code, out, _ = run(capsys, "verify", "--skip-anneal", "--json")
        rep = json.loads(out)
        assert code == 0 and rep["passed"]
        assert {c["name"] for c in rep["checks"]} >= {"shell_tables", "sum_rules", "calogero_spectra"}

    def test_mutated_table_fails_naming_m(self, tmp_path, capsys):
        for name in io.TABLE_FILES:
            shutil.copy(io.data_dir() / name, tmp_path / name)
        path = tmp_path / "table_40_60.csv"
        path.write_text(path.read_text().replace("47,23/15/8/1", "47,23/15/7/2"))
        code, out, _ = run(capsys, "verify", "--skip-anneal", "--data-dir", str(tmp_path))
        assert code == 1
        assert "M=47" in out
        assert "FAIL  golden_table_hashes" in out

    def test_env_override_in_header(self, monkeypatch, capsys):
        monkeypatch.setenv("COULOMB_RINGS_TOL_SUM_RULE_TOL", "1e-7")
        code, out, _ = run(capsys, "verify", "--skip-anneal", "--json")
        rep = json.loads(out)
        assert rep["header"]["tolerances"]["SUM_RULE_TOL"] == 1e-7
        assert "SUM_RULE_TOL (env)" in rep["header"]["overridden"]
