import math

import numpy as np
import pytest

from mixpredict.classfiles import (
    format_measure,
    parse_measure,
    read_class_file,
    write_class_file,
)
from mixpredict.cli import main
from mixpredict.divergence import dn_block
from mixpredict.measures import (
    Bernoulli,
    Deterministic,
    LaplaceMeasure,
    Markov,
    Mixture,
    QUADRATIC,
    UniformIID,
)
from mixpredict.scenarios import (
    SCENARIOS,
    _sparse_zero_positions,
    run_bernoulli_mixture,
    run_laplace,
    run_stationary_mixture,
    run_weights_matter,
    write_csv,
)


def test_classfile_roundtrip(tmp_path):
    measures = [
        Bernoulli(1.0 / 3.0),
        UniformIID(3),
        LaplaceMeasure(2),
        Deterministic.constant(1),
        Deterministic.zero_run(4),
        Markov.stationary(1, [[0.6, 0.4], [0.3, 0.7]]),
    ]
    path = tmp_path / "class.txt"
    write_class_file(path, measures)
    loaded = read_class_file(path)
    assert len(loaded) == len(measures)
    for orig, back in zip(measures, loaded):
        assert type(back) is type(orig)
        for n in (1, 3):
            assert back.prob_table(n) == pytest.approx(orig.prob_table(n),
                                                       abs=1e-15)


def test_classfile_rejects_garbage(tmp_path):
    with pytest.raises(ValueError):
        parse_measure("frobnicate 0.5")
    with pytest.raises(ValueError):
        parse_measure("markov 2 1 0.5")
    bad = tmp_path / "bad.txt"
    bad.write_text("bernoulli not-a-number\n")
    with pytest.raises(ValueError):
        read_class_file(bad)
    empty = tmp_path / "empty.txt"
    empty.write_text("# comment only\n")
    with pytest.raises(ValueError):
        read_class_file(empty)


def test_classfile_17_digit_roundtrip():
    m = Bernoulli(1.0 / 7.0)
    assert parse_measure(format_measure(m)).p == m.p


def test_laplace_scenario_vs_measure_oracle():
    result = run_laplace(grid=5, max_n=6)
    assert result.ok
    lap = LaplaceMeasure(2)
    by_key = {(row[0], row[1]): row[2] for row in result.rows}
    for p in np.linspace(0, 1, 5):
        for n in (1, 4, 6):
            oracle = dn_block(Bernoulli(p), lap, n).bits
            assert by_key[(p, n)] == pytest.approx(oracle, abs=1e-10)


def test_bernoulli_mixture_scenario_vs_measure_oracle():
    result = run_bernoulli_mixture(grid=4, max_n=6, p_list=(0.3,))
    assert result.ok
    comps = [Bernoulli(j / 4) for j in range(5)]
    rho = Mixture(comps, QUADRATIC.weights_upto(5))
    by_n = {row[1]: row[2] for row in result.rows}
    for n in (1, 3, 6):
        oracle = dn_block(Bernoulli(0.3), rho, n).average
        assert by_n[n] == pytest.approx(oracle, abs=1e-10)


def test_weights_matter_small():
    result = run_weights_matter(max_n=64)
    assert result.ok
    d = {row[0]: row for row in result.rows}
    assert d[5][2] == pytest.approx(4.0, abs=1e-12)   # geometric, n=5
    assert d[1][2] == pytest.approx(0.0, abs=1e-12)   # geometric, n=1


def test_stationary_mixture_off_grid_target_has_no_bound():
    target = Markov.stationary(1, [[0.6, 0.4], [0.35, 0.65]])
    result = run_stationary_mixture(grid=4, max_n=4, max_order=1, target=target)
    assert result.ok
    div_rows = [r for r in result.rows if r[0] == "divergence"]
    assert all(r[3] == "" for r in div_rows)
    assert all(np.isfinite(r[2]) for r in div_rows)


def test_sparse_generator_respects_constraint():
    rng = np.random.default_rng(99)
    zp = _sparse_zero_positions(4096, rng)
    zeros = 0
    positions = set(int(t) for t in zp)
    for t in range(1, 4097):
        if t in positions:
            zeros += 1
        assert zeros < math.sqrt(t)


def test_write_csv_format(tmp_path):
    result = run_weights_matter(max_n=3)
    out = tmp_path / "wm.csv"
    write_csv(result, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "scenario,n,dn_quadratic,dn_geometric,quadratic_bound"
    assert lines[1].startswith("weights-matter,1,")
    # 17 significant digits survive a float round-trip
    val = float(lines[2].split(",")[2])
    assert val == -QUADRATIC.log2_tail_mass(2)


def test_cli_list(capsys):
    assert main(["--list"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert set(out) == set(SCENARIOS)


def test_cli_unknown_scenario():
    assert main(["--scenario", "no-such-thing"]) == 2


def test_cli_single_scenario(tmp_path):
    code = main(["--scenario", "nml-negative-demo", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "nml-negative-demo.csv").exists()
    manifest = (tmp_path / "manifest.txt").read_text()
    assert "nml-negative-demo" in manifest and "ok" in manifest


def test_cli_corrupt_class_file(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("bogus line\n")
    code = main(["--scenario", "capacity-growth", "--out", str(tmp_path),
                 "--class-file", str(bad)])
    assert code == 1
    manifest = (tmp_path / "manifest.txt").read_text()
    assert "ERROR" in manifest


def test_cli_overrides_reach_scenarios(tmp_path):
    code = main(["--scenario", "weights-matter", "--out", str(tmp_path),
                 "--max-n", "8"])
    assert code == 0
    lines = (tmp_path / "weights-matter.csv").read_text().splitlines()
    assert len(lines) == 9  # header + 8 horizons
