import numpy as np
import pytest

from aqcsim import __version__
from aqcsim.bench import read_csv
from aqcsim.cli import main
from aqcsim.cnf import generate_instance, paper_instance, read_dimacs, save_dimacs
from aqcsim.energy import EnergyTable, energy_table_serial


@pytest.fixture
def paper_cnf(tmp_path):
    path = tmp_path / "paper.cnf"
    assert main(["paper-instance", "-o", str(path)]) == 0
    return path


def test_paper_instance_export(paper_cnf, capsys):
    assert read_dimacs(paper_cnf) == paper_instance()
    assert main(["paper-instance"]) == 0
    assert "p cnf 6 27" in capsys.readouterr().out


def test_solve_paper(paper_cnf, capsys):
    assert main(["solve", str(paper_cnf)]) == 0
    # x1 first; the transcribed listing's unique solution
    assert capsys.readouterr().out.strip() == "1 solution: 010100"


def test_solve_unsat(tmp_path, capsys, unsat3):
    path = tmp_path / "u.cnf"
    save_dimacs(unsat3, path)
    assert main(["solve", str(path)]) == 0
    assert "0 solutions" in capsys.readouterr().out


def test_generate(tmp_path):
    out = tmp_path / "g.cnf"
    assert main(["generate", "--vars", "10", "--ratio", "4.2", "--seed", "3", "-o", str(out)]) == 0
    assert read_dimacs(out) == generate_instance(10, 4.2, 3)


def test_generate_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a.cnf", tmp_path / "b.cnf"
    main(["generate", "--vars", "9", "--seed", "4", "-o", str(a)])
    main(["generate", "--vars", "9", "--seed", "4", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_generate_unique(tmp_path, capsys):
    out = tmp_path / "u.cnf"
    assert main(["generate", "--vars", "8", "--unique-solution", "-o", str(out)]) == 0
    capsys.readouterr()
    main(["solve", str(out)])
    assert capsys.readouterr().out.startswith("1 solution:")


def test_generate_too_small():
    assert main(["generate", "--vars", "2"]) == 3


def test_evolve_missing_file():
    assert main(["evolve", "missing.cnf"]) == 2


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cnf"
    bad.write_text("p cnf 3 1\n1 2 0\n")
    assert main(["solve", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "bad.cnf" in err and "line 2" in err


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["solve"], ["generate", "--vars", "5", "--bogus"],
                                  ["bench", "--vars", "8:x"], ["energy", "f.cnf", "--workers", "0"]])
def test_usage_errors(argv):
    assert main(argv) == 1


def test_cap_violation_exit(tmp_path):
    path = tmp_path / "big.cnf"
    save_dimacs(generate_instance(13, 4.2, 0), path)
    assert main(["spectrum", str(path), "--points", "3"]) == 3


def test_energy_dump(paper_cnf, tmp_path, capsys):
    dump = tmp_path / "t.bin"
    assert main(["energy", str(paper_cnf), "--workers", "3", "--dump", str(dump)]) == 0
    assert "zero-energy assignments=1" in capsys.readouterr().out
    assert EnergyTable.load(dump) == energy_table_serial(paper_instance())


def test_workers_env(paper_cnf, monkeypatch, capsys):
    monkeypatch.setenv("AQC_SIM_WORKERS", "5")
    assert main(["energy", str(paper_cnf)]) == 0
    assert "workers=5" in capsys.readouterr().out
    assert main(["energy", str(paper_cnf), "--workers", "2"]) == 0
    assert "workers=2" in capsys.readouterr().out
    monkeypatch.setenv("AQC_SIM_WORKERS", "many")
    assert main(["energy", str(paper_cnf)]) == 1


def test_spectrum_csv(paper_cnf, tmp_path, capsys):
    out = tmp_path / "spec.csv"
    assert main(["spectrum", str(paper_cnf), "--points", "11", "--levels", "3", "-o", str(out)]) == 0
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert data.shape == (11, 4)
    assert out.read_text().splitlines()[0] == "s,E0,E1,E2"


def test_evolve_csv(paper_cnf, tmp_path, capsys):
    out = tmp_path / "evo.csv"
    argv = ["evolve", str(paper_cnf), "--tau", "2", "--steps", "1000", "--track-gap", "--track-overlap",
            "--stride", "100", "-o", str(out)]
    assert main(argv) == 0
    assert "success probability" in capsys.readouterr().out
    assert out.read_text().splitlines()[0] == "t,s,norm,success_probability,gap,overlap"
    first = out.read_bytes()
    assert main(argv) == 0
    assert out.read_bytes() == first


def test_bench_csv(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    argv = ["bench", "--vars", "6:2:10", "--workers", "1,2", "--reps", "1", "-o", str(out)]
    assert main(argv) == 0
    records = read_csv(out)
    assert sorted({r.num_variables for r in records}) == [6, 8, 10]
    assert len(records) == 3 * 3


def test_bench_backend_flag(tmp_path):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--vars", "8", "--workers", "2", "--reps", "1", "--backend", "numpy",
                 "-o", str(out)]) == 0
    assert {r.backend for r in read_csv(out)} == {"numpy"}
    assert main(["bench", "--vars", "8", "--backend", "opencl"]) == 1


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert capsys.readouterr().out.strip() == f"aqc-sim {__version__}"


@pytest.mark.parametrize("cmd", ["generate", "solve", "energy", "spectrum", "evolve", "bench", "paper-instance"])
def test_help(cmd, capsys):
    with pytest.raises(SystemExit) as info:
        main([cmd, "--help"])
    assert info.value.code == 0
    assert "usage: aqc-sim " + cmd in capsys.readouterr().out
