import numpy as np
import pytest

from nrap import read_instance, read_solution
from nrap.cli import main


def run(*args):
    return main([str(a) for a in args])


def test_gen_solve_verify_roundtrip(tmp_path, capsys):
    inst_path = tmp_path / "inst.nrap"
    sol_path = tmp_path / "sol.csv"
    assert run("gen", "--family", "quadratic", "--n", 30, "--h-frac", 0.5,
               "--seed", 7, "--out", inst_path) == 0
    assert run("solve", "--alg", "dbr5", "--in", inst_path, "--out", sol_path) == 0
    assert run("verify", "--in", inst_path, "--sol", sol_path) == 0
    out = capsys.readouterr().out
    assert "PASS" in out
    alg, sol = read_solution(sol_path)
    assert alg == "dbr5"
    inst = read_instance(inst_path)
    assert sol.x.shape == (inst.n,)


def test_verify_fails_on_corrupted_solution(tmp_path, capsys):
    inst_path = tmp_path / "inst.nrap"
    sol_path = tmp_path / "sol.csv"
    run("gen", "--family", "search", "--n", 12, "--h-frac", 0.5, "--seed", 3,
        "--out", inst_path)
    run("solve", "--alg", "mb5", "--in", inst_path, "--out", sol_path)
    text = sol_path.read_text().splitlines()
    text[4] = "0,%r" % (read_instance(inst_path).u[0] * 0.99)
    sol_path.write_text("\n".join(text) + "\n")
    assert run("verify", "--in", inst_path, "--sol", sol_path) == 1
    assert "FAIL" in capsys.readouterr().out


def test_every_alg_through_cli(tmp_path):
    inst_path = tmp_path / "inst.nrap"
    run("gen", "--family", "negentropy", "--n", 25, "--h-frac", 0.4, "--seed", 5,
        "--out", inst_path)
    for alg in ("mb2", "mb3", "mb5", "pir2", "dir2", "dir5", "der2", "dbr5", "nz", "oracle"):
        sol_path = tmp_path / f"{alg}.csv"
        assert run("solve", "--alg", alg, "--in", inst_path, "--out", sol_path) == 0
        tol = "0.05" if alg == "nz" else "1e-7"
        code = run("verify", "--in", inst_path, "--sol", sol_path, "--tol", tol)
        if alg != "nz":
            assert code == 0


def test_bench_profile_scaling_pipeline(tmp_path, capsys):
    results = tmp_path / "results.csv"
    profile = tmp_path / "profile.csv"
    assert run("bench", "--algs", "mb5,dbr5", "--families", "quadratic,sampling",
               "--sizes", "200,400", "--h-fracs", "0.5", "--seeds", "1,2",
               "--reps", 1, "--out", results) == 0
    assert run("profile", "--in", results, "--out", profile) == 0
    assert profile.read_text().startswith("alg,tau,rho")
    capsys.readouterr()
    # scaling needs >= 3 sizes
    results3 = tmp_path / "results3.csv"
    assert run("bench", "--algs", "dbr5", "--families", "quadratic",
               "--sizes", "200,400,800", "--h-fracs", "0.5", "--seeds", "1",
               "--reps", 1, "--out", results3) == 0
    assert run("scaling", "--in", results3, "--alg", "dbr5") == 0
    slope = float(capsys.readouterr().out.strip().splitlines()[-1])
    assert -1.0 < slope < 3.0


def test_results_csv_columns(tmp_path):
    results = tmp_path / "results.csv"
    run("bench", "--algs", "mb2", "--families", "quadratic", "--sizes", "50",
        "--h-fracs", "0", "--seeds", "1", "--reps", 1, "--out", results)
    header = results.read_text().splitlines()[0]
    assert header == "family,n,h_frac,seed,alg,rep,time_ns,iters,status,mu,feas_resid,kkt_resid"
