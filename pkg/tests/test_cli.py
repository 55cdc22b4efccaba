"""Command-line interface: subcommands, exit codes, config handling, outputs."""

import json
import math

import numpy as np
import pytest

from loopcensus import __version__
from loopcensus.census import equivalent_census, load_census
from loopcensus.cli import main
from loopcensus.statistics import count_arcs


def run(tmp_path, *argv):
    return main([argv[0], "--output-dir", str(tmp_path), *argv[1:]])


@pytest.fixture(scope="module")
def census6_file(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli_census")
    assert main(["census", "--t", "6", "--output-dir", str(d), "--out", "c6.bin"]) == 0
    return str(d / "c6.bin")


def test_census_writes_file_and_summary(census6_file):
    census = load_census(census6_file)
    assert census.n_records == 96
    assert census.complete
    summary_path = census6_file[:-4] + ".summary.json"
    summary = json.loads(open(summary_path).read())
    assert summary["records"] == 96
    assert summary["complete"] is True
    assert summary["artifact_version"] == __version__
    assert len(summary["config_fingerprint"]) == 64
    assert census.counters["config_fingerprint"] == summary["config_fingerprint"]
    assert census.counters["artifact_version"] == __version__


def test_census_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    assert main(["census", "--t", "5", "--output-dir", str(a)]) == 0
    assert main(["census", "--t", "5", "--output-dir", str(b)]) == 0
    assert (a / "census.bin").read_bytes() == (b / "census.bin").read_bytes()


def test_census_empty_is_fine(tmp_path):
    assert run(tmp_path, "census", "--t", "2") == 0
    census = load_census(str(tmp_path / "census.bin"))
    assert census.n_records == 0 and census.complete


def test_census_budget_exit(tmp_path):
    code = run(tmp_path, "census", "--t", "10", "--budget", "200")
    assert code == 3
    partial = load_census(str(tmp_path / "census.bin"))
    assert not partial.complete
    assert partial.n_records > 0


def test_census_extend(census6_file, tmp_path):
    assert run(tmp_path, "census", "--t", "8", "--extend", census6_file,
               "--out", "c8ext.bin") == 0
    assert run(tmp_path, "census", "--t", "8", "--out", "c8.bin") == 0
    ext = load_census(str(tmp_path / "c8ext.bin"))
    fresh = load_census(str(tmp_path / "c8.bin"))
    assert ext.n_records == fresh.n_records == 792
    assert equivalent_census(ext, fresh)


def test_count_matches_library(census6_file, tmp_path):
    assert run(tmp_path, "count", "--census", census6_file,
               "--grid-start", "2", "--grid-step", "0.5") == 0
    lines = (tmp_path / "counts.csv").read_text().splitlines()
    assert lines[0].startswith("# fingerprint=") and f"version={__version__}" in lines[0]
    assert lines[1] == "t,count,filter"
    census = load_census(census6_file)
    grid = np.round(2.0 + 0.5 * np.arange(9), 12)
    series = count_arcs(census, grid)
    data = [row.split(",") for row in lines[2:]]
    assert [float(r[0]) for r in data] == list(grid)
    assert [int(r[1]) for r in data] == list(series.counts)


def test_full_sector_equals_count(census6_file, tmp_path):
    pi = str(math.pi)
    assert run(tmp_path, "sector", "--census", census6_file,
               "--outgoing-half", pi, "--incoming-half", pi) == 0
    assert run(tmp_path, "count", "--census", census6_file) == 0
    sector = (tmp_path / "sector_counts.csv").read_text().splitlines()
    plain = (tmp_path / "counts.csv").read_text().splitlines()
    get = lambda rows: [r.split(",")[:2] for r in rows[2:]]
    assert get(sector) == get(plain)


def test_homology_shares(census6_file, tmp_path):
    assert run(tmp_path, "homology", "--census", census6_file) == 0
    lines = (tmp_path / "homology_counts.csv").read_text().splitlines()
    shares = json.loads((tmp_path / "homology_counts_shares.json").read_text())
    assert shares["index"] == 16
    assert len(shares["cosets"]) == 16
    assert shares["share_sum_exact"] == "1"
    census = load_census(census6_file)
    assert sum(row["count"] for row in shares["cosets"]) == census.n_records
    # one series per coset in the CSV (labels themselves contain commas)
    labels = {row.split(",", 2)[2] for row in lines[2:]}
    assert len(labels) == 16


def test_cover_output(census6_file, tmp_path):
    assert run(tmp_path, "cover", "--census", census6_file, "--kind", "rows",
               "--rows", "1 0 0 0", "--moduli", "2") == 0
    payload = json.loads((tmp_path / "cover_proportion.json").read_text())
    assert payload["index"] == 2
    assert payload["final_t"] == payload["grid"][-1] == 6.0
    assert 0.0 <= payload["final_proportion"] <= 1.0
    assert payload["proportions"][0] is None  # below the shortest loop
    dat = (tmp_path / "cover_proportion.dat").read_text().splitlines()
    assert dat[1] == "# t closing_proportion"
    assert len(dat) == 2 + len(payload["grid"])


def test_fit_output(census13_file, tmp_path):
    assert run(tmp_path, "fit", "--census", census13_file,
               "--window-start", "9", "--window-stop", "13",
               "--bootstrap", "50") == 0
    payload = json.loads((tmp_path / "fit.json").read_text())
    fit = payload["fit"]
    assert set(fit) == {"h_estimate", "a_estimate", "window", "residual",
                        "a_band", "bootstrap"}
    assert fit["window"] == [9.0, 13.0]
    assert 0.9 < fit["h_estimate"] < 1.1
    assert payload["config_fingerprint"]


def test_verify_lemmas_defaults_inconclusive(census13_file, tmp_path):
    assert run(tmp_path, "verify-lemmas", "--census", census13_file) == 0
    payload = json.loads((tmp_path / "verify_lemmas.json").read_text())
    assert payload["passed"] is True
    assert payload["violations"] == 0
    assert payload["inconclusive"] is True  # default boxes catch nothing here
    assert payload["inclusion"]["all_empty"] is True


def test_verify_lemmas_eps05_passes(census13_file, tmp_path):
    assert run(tmp_path, "verify-lemmas", "--census", census13_file,
               "--epsilon", "0.5", "--out", "v.json") == 0
    payload = json.loads((tmp_path / "v.json").read_text())
    assert payload["passed"] is True and payload["inconclusive"] is False
    star = [row["star_count"] for row in payload["scaling"]["rows"]]
    assert star == [3, 10, 38]
    assert payload["inclusion"]["empirical_t0"]["vis1"] == 10.0


def test_verify_lemmas_detects_violations(census13_file, tmp_path):
    code = run(tmp_path, "verify-lemmas", "--census", census13_file,
               "--epsilon", "0.5", "--theta", "0.1", "--theta-prime", "0.05",
               "--rho-fraction", "0.9", "--rho-prime-fraction", "0.9")
    assert code == 1
    payload = json.loads((tmp_path / "verify_lemmas.json").read_text())
    assert payload["passed"] is False
    assert payload["violations"] >= 1


def test_verify_lemmas_deterministic(census13_file, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    args = ["verify-lemmas", "--census", census13_file, "--epsilon", "0.5",
            "--seed", "3"]
    assert main([*args, "--output-dir", str(a)]) == 0
    assert main([*args, "--output-dir", str(b)]) == 0
    assert (a / "verify_lemmas.json").read_bytes() == \
        (b / "verify_lemmas.json").read_bytes()


def test_export_csv(census6_file, tmp_path):
    assert run(tmp_path, "export", "--census", census6_file) == 0
    lines = (tmp_path / "census_export.csv").read_text().splitlines()
    assert lines[0].startswith("# fingerprint=")
    assert lines[1].startswith("word,displacement,")
    assert len(lines) == 2 + 96


def test_plot_emission(census6_file, tmp_path):
    assert run(tmp_path, "count", "--census", census6_file,
               "--plot", "--plot-script") == 0
    dat = (tmp_path / "counts.dat").read_text().splitlines()
    assert dat[1] == "# t count"
    script = (tmp_path / "counts.gp").read_text()
    assert "counts.dat" in script and "plot" in script


def test_exit_codes_for_bad_usage(census6_file, tmp_path):
    # a grid reaching beyond the census radius names the deficit
    assert run(tmp_path, "count", "--census", census6_file,
               "--grid-stop", "9") == 2
    # unknown config keys are rejected
    bad = tmp_path / "bad.ini"
    bad.write_text("[census]\nt = 6\nwarp = 9\n")
    assert run(tmp_path, "census", "--config", str(bad)) == 2
    bad.write_text("[warpdrive]\nt = 6\n")
    assert run(tmp_path, "census", "--config", str(bad)) == 2
    # missing required --census is an argparse usage error
    with pytest.raises(SystemExit) as info:
        main(["count"])
    assert info.value.code == 2
    # missing census file
    assert run(tmp_path, "count", "--census", str(tmp_path / "nope.bin")) == 2


def test_invalid_parameter_values(census13_file, tmp_path):
    assert run(tmp_path, "verify-lemmas", "--census", census13_file,
               "--epsilon", "-1") == 2
    assert run(tmp_path, "census", "--t", "-3") == 2
    assert run(tmp_path, "fit", "--census", census13_file,
               "--window-start", "12.9", "--window-stop", "13") == 2


def test_output_dir_environment(census6_file, tmp_path, monkeypatch, capsys):
    env_dir = tmp_path / "from_env"
    env_dir.mkdir()
    monkeypatch.setenv("LOOPCENSUS_OUTPUT_DIR", str(env_dir))
    assert main(["count", "--census", census6_file]) == 0
    assert (env_dir / "counts.csv").exists()
    # an explicit flag wins over the environment
    flag_dir = tmp_path / "from_flag"
    flag_dir.mkdir()
    assert main(["count", "--census", census6_file,
                 "--output-dir", str(flag_dir)]) == 0
    assert (flag_dir / "counts.csv").exists()


def test_config_file_applies_and_flags_override(census6_file, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[grid]\nstart = 3.0\nstep = 1.0\n")
    assert run(tmp_path, "count", "--census", census6_file,
               "--config", str(cfg)) == 0
    rows = (tmp_path / "counts.csv").read_text().splitlines()[2:]
    assert [float(r.split(",")[0]) for r in rows] == [3.0, 4.0, 5.0, 6.0]
    assert run(tmp_path, "count", "--census", census6_file,
               "--config", str(cfg), "--grid-start", "5") == 0
    rows = (tmp_path / "counts.csv").read_text().splitlines()[2:]
    assert [float(r.split(",")[0]) for r in rows] == [5.0, 6.0]
