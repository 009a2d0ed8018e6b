import math

import numpy as np
import pytest

from bosonsamp import bosonic
from bosonsamp.cli import main
from bosonsamp.permanent import permanent_glynn
from bosonsamp.samplers import load_samples


def run_cli(*args):
    return main([str(a) for a in args])


def test_gen_unitary_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert run_cli("gen-unitary", "-m", 4, "--seed", 7, "--out", a) == 0
    assert run_cli("gen-unitary", "-m", 4, "--seed", 7, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    out = capsys.readouterr().out
    assert "unitarity_residual=" in out
    u = bosonic.read_unitary(a)
    assert bosonic.unitarity_residual(u) <= 1e-10


def test_gen_unitary_rejects_zero_modes(tmp_path, capsys):
    code = run_cli("gen-unitary", "-m", 0, "--seed", 1, "--out", tmp_path / "u")
    assert code == 2
    assert capsys.readouterr().err.startswith("error:usage:")


def test_sample_byte_identical_and_thread_flag(tmp_path):
    common = ["sample", "--sampler", "scmcmc", "-n", 2, "-m", 4, "-L", 20,
              "-N", 300, "--seed", 5]
    p1, p2, p3 = (tmp_path / f"s{i}.txt" for i in range(3))
    assert run_cli(*common, "--out", p1) == 0
    assert run_cli(*common, "--out", p2) == 0
    assert run_cli(*common, "--out", p3, "--threads", 2) == 0
    assert p1.read_bytes() == p2.read_bytes() == p3.read_bytes()


def test_sample_every_sampler(tmp_path):
    base = ["-n", 2, "-m", 4, "-N", 200, "--seed", 3]
    for extra in (
        ["--sampler", "brute"],
        ["--sampler", "rejection"],
        ["--sampler", "mcmc"],
        ["--sampler", "mis", "-K", 5],
        ["--sampler", "scmcmc", "-L", 10],
        ["--sampler", "scmcmc-improved", "-L", 10, "-K", 5],
    ):
        out = tmp_path / (extra[1] + ".txt")
        assert run_cli("sample", *base, *extra, "--out", out) == 0
        header, pats = load_samples(out)
        assert len(pats) == 200
        assert header["sampler"] == extra[1]


def test_sample_missing_param_errors(tmp_path, capsys):
    code = run_cli("sample", "--sampler", "scmcmc", "-n", 2, "-m", 4,
                   "-N", 10, "--seed", 1, "--out", tmp_path / "x")
    assert code == 2
    assert "error:usage:" in capsys.readouterr().err
    code = run_cli("sample", "--sampler", "mis", "-n", 2, "-m", 4,
                   "-N", 10, "--seed", 1, "--out", tmp_path / "x")
    assert code == 2


def test_sample_with_unitary_file(tmp_path):
    upath = tmp_path / "u.txt"
    run_cli("gen-unitary", "-m", 4, "--seed", 11, "--out", upath)
    out = tmp_path / "s.txt"
    assert run_cli("sample", "--sampler", "mcmc", "-n", 2, "--unitary", upath,
                   "-N", 500, "--seed", 4, "--out", out) == 0
    header, pats = load_samples(out)
    assert int(header["m"]) == 4
    assert all(sum(p) == 2 for p in pats)


def test_sample_retain_candidates_sidecars(tmp_path):
    out = tmp_path / "s.txt"
    assert run_cli("sample", "--sampler", "scmcmc-improved", "-n", 2, "-m", 4,
                   "-L", 30, "-K", 5, "-N", 400, "--seed", 6,
                   "--retain-candidates", "--out", out) == 0
    header, pats = load_samples(out)
    _, cands = load_samples(header["candidates_file"])
    assert sorted(pats) == sorted(cands)
    assert int(header["cfp_end"]) == -(-30 // 4) + 30


def test_sample_discard_cache(tmp_path):
    out = tmp_path / "s.txt"
    assert run_cli("sample", "--sampler", "scmcmc", "-n", 2, "-m", 4, "-L", 50,
                   "-N", 300, "--seed", 6, "--discard-cache", "--out", out) == 0
    _, pats = load_samples(out)
    assert len(pats) == 250


def test_config_file_merge_and_roundtrip(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "sampler=scmcmc\nphotons=2\nmodes=4\ncache_size=10\ncount=100\nseed=9\n")
    out1 = tmp_path / "c1.txt"
    saved = tmp_path / "eff.cfg"
    assert run_cli("sample", "--config", cfg, "--out", out1,
                   "--save-config", saved) == 0
    # flags override file values; the saved config replays identically
    out2 = tmp_path / "c2.txt"
    assert run_cli("sample", "--config", saved, "--out", out2) == 0
    assert out1.read_bytes() == out2.read_bytes()
    out3 = tmp_path / "c3.txt"
    assert run_cli("sample", "--config", cfg, "--seed", 10, "--out", out3) == 0
    assert out3.read_bytes() != out1.read_bytes()
    header, _ = load_samples(out3)
    assert header["seed"] == "10"


def test_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("sampler=brute\nwidgets=3\n")
    assert run_cli("sample", "--config", cfg, "--out", tmp_path / "x") == 2
    assert "unknown config key" in capsys.readouterr().err


def test_diagnose_iid_samples(tmp_path, capsys):
    spath = tmp_path / "s.txt"
    run_cli("sample", "--sampler", "brute", "-n", 3, "-m", 6, "-N", 100_000,
            "--seed", 2, "--out", spath)
    report = tmp_path / "report.csv"
    assert run_cli("diagnose", "--samples", spath, "--lags", 50,
                   "--out", report) == 0
    rows = [line.split(",") for line in report.read_text().splitlines()[1:]]
    rks = [float(v) for metric, k, v in rows if metric == "r_k"]
    assert len(rks) == 50
    assert max(abs(r) for r in rks) <= 0.02


def test_diagnose_similarity_and_markov(tmp_path):
    upath = tmp_path / "u.txt"
    run_cli("gen-unitary", "-m", 4, "--seed", 11, "--out", upath)
    spath = tmp_path / "s.txt"
    run_cli("sample", "--sampler", "mcmc", "-n", 2, "--unitary", upath,
            "-N", 50_000, "--seed", 4, "--out", spath)
    report = tmp_path / "report.csv"
    assert run_cli("diagnose", "--samples", spath, "--unitary", upath,
                   "--lags", 10, "--markov", "--markov-steps", 20,
                   "--out", report) == 0
    text = report.read_text()
    rows = {(f[0], f[1]): f[2] for f in
            (line.split(",") for line in text.splitlines()[1:])}
    assert float(rows[("similarity", "")]) >= 0.999
    assert float(rows[("row_sum_error", "")]) <= 1e-12
    assert float(rows[("stationary_error", "")]) <= 1e-10
    assert ("d_A", "20") in rows


def test_diagnose_cache_distances(tmp_path):
    spath = tmp_path / "s.txt"
    run_cli("sample", "--sampler", "scmcmc", "-n", 2, "-m", 4, "-L", 10,
            "-N", 50_000, "--seed", 13, "--retain-candidates", "--out", spath)
    report = tmp_path / "report.csv"
    assert run_cli("diagnose", "--samples", spath, "-K", 29,
                   "--out", report) == 0
    rows = {(f[0], f[1]): f[2] for f in
            (line.split(",") for line in report.read_text().splitlines()[1:])}
    assert abs(float(rows[("mean_distance", "")]) - 10) <= 1.0
    assert abs(float(rows[("adjacent_ratio", "")]) - 0.1) <= 0.02


def test_qa_curve_threshold_rows(tmp_path, capsys):
    assert run_cli("qa-curve", "--eta", "1.0,0.4", "--network", "square",
                   "--classical-preset", "scmcmc", "--max-n", 12) == 0
    out = capsys.readouterr().out
    assert "# threshold eta=1 n=11" in out
    assert "# threshold eta=0.4 n=unreachable" in out
    header_idx = out.splitlines().index("n,eta,t_c,t_q,qa")
    rows = out.splitlines()[header_idx + 1:]
    assert len(rows) == 24


def test_qa_curve_min_eta(tmp_path, capsys):
    assert run_cli("qa-curve", "--eta", "1.0", "--network", "linear",
                   "--classical-preset", "mis", "--max-n", 5,
                   "--min-eta-cap", 100) == 0
    out = capsys.readouterr().out
    line = next(l for l in out.splitlines() if l.startswith("# min_eta"))
    assert abs(float(line.split("eta=")[1]) - 0.6041) <= 0.0005


def test_qa_curve_eta_bounds(capsys):
    assert run_cli("qa-curve", "--eta", "1.5") == 1
    assert "error:domain:" in capsys.readouterr().err


def test_qa_curve_mis_thresholds_smaller(capsys):
    assert run_cli("qa-curve", "--eta", "0.8", "--classical-preset", "mis",
                   "--max-n", 1) == 0
    mis_line = capsys.readouterr().out.splitlines()[0]
    assert run_cli("qa-curve", "--eta", "0.8", "--classical-preset", "scmcmc",
                   "--max-n", 1) == 0
    sc_line = capsys.readouterr().out.splitlines()[0]
    n_mis = int(mis_line.rsplit("=", 1)[1])
    n_sc = int(sc_line.rsplit("=", 1)[1])
    assert n_mis < n_sc


def test_permanent_subcommand(tmp_path, capsys):
    upath = tmp_path / "u.txt"
    run_cli("gen-unitary", "-m", 3, "--seed", 21, "--out", upath)
    capsys.readouterr()
    for algo in ("glynn", "ryser", "naive"):
        assert run_cli("permanent", "--matrix", upath, "--algorithm", algo) == 0
    outs = capsys.readouterr().out.splitlines()
    expected = permanent_glynn(bosonic.read_unitary(upath))
    for line in outs:
        re_part, im_part = map(float, line.split())
        assert math.isclose(re_part, expected.real, rel_tol=1e-9, abs_tol=1e-12)
        assert math.isclose(im_part, expected.imag, rel_tol=1e-9, abs_tol=1e-12)


def test_distribution_subcommand(tmp_path):
    out = tmp_path / "dist.csv"
    assert run_cli("distribution", "-n", 2, "-m", 4, "--seed", 12,
                   "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# p_cf=")
    assert lines[1] == "pattern,raw,normalized"
    body = [line.split(",") for line in lines[2:]]
    assert len(body) == 6


def test_missing_file_is_io_error(tmp_path, capsys):
    assert run_cli("diagnose", "--samples", tmp_path / "nope.txt") == 1
    assert capsys.readouterr().err.startswith("error:io:")
