import os

import numpy as np
import pytest

from fourthmoment import cache, cli

from conftest import weighted


def test_round_trip_is_byte_exact():
    es = weighted(37)
    text = cache.serialize(es)
    back = cache.parse(text)
    assert cache.serialize(back) == text
    np.testing.assert_array_equal(back.lam[:, 1:], cache.quantize(es.lam[:, 1:]))
    np.testing.assert_array_equal(back.weights, cache.quantize(es.weights))
    np.testing.assert_array_equal(back.eps, es.eps)
    assert back.level == 37 and back.n_max == es.n_max


def test_quantized_values_are_close():
    es = weighted(11)
    back = cache.parse(cache.serialize(es))
    np.testing.assert_allclose(back.lam, es.lam, rtol=1e-14, atol=1e-300)


def test_version_mismatch_rejected():
    text = cache.serialize(weighted(11)).replace("EIGSYS 1", "EIGSYS 2", 1)
    with pytest.raises(cache.CacheFormatError, match="version"):
        cache.parse(text)


@pytest.mark.parametrize("mangle", [
    lambda t: "NOPE 1\n" + t.split("\n", 1)[1],
    lambda t: t.replace("end\n", ""),
    lambda t: t.replace("lam ", "lam 1.0 ", 1),
    lambda t: t.replace("form 0 1", "form 0 3", 1),
])
def test_malformed_files_rejected(mangle):
    text = cache.serialize(weighted(11))
    with pytest.raises(cache.CacheFormatError):
        cache.parse(mangle(text))


def test_load_truncates_and_rejects_short(tmp_path):
    es = weighted(11)
    cache.save(es, tmp_path)
    small = cache.load(tmp_path, 11, n_max=50)
    assert small.n_max == 50 and small.lam.shape == (es.num_forms, 51)
    assert cache.load(tmp_path, 11, n_max=es.n_max + 1) is None
    assert cache.load(tmp_path, 37) is None


def _interrupt(monkeypatch, target):
    def boom(*args, **kwargs):
        raise KeyboardInterrupt("simulated interruption")
    monkeypatch.setattr(target[0], target[1], boom)


@pytest.mark.parametrize("target", [(os, "replace"), (os, "fsync")])
def test_interrupted_write_keeps_old_file(tmp_path, monkeypatch, target):
    path = cache.save(weighted(11), tmp_path)
    before = path.read_bytes()
    _interrupt(monkeypatch, target)
    with pytest.raises(KeyboardInterrupt):
        cache.atomic_write_text(path, "garbage")
    monkeypatch.undo()
    assert path.read_bytes() == before
    assert sorted(p.name for p in tmp_path.iterdir()) == [path.name]


def test_interrupted_first_write_leaves_nothing(tmp_path, monkeypatch):
    _interrupt(monkeypatch, (os, "replace"))
    with pytest.raises(KeyboardInterrupt):
        cache.save(weighted(11), tmp_path)
    monkeypatch.undo()
    assert list(tmp_path.iterdir()) == []


def test_default_cache_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv(cache.ENV_CACHE_DIR, str(tmp_path))
    assert cache.default_cache_dir() == tmp_path


# ------------------------------------------------------------------ CLI


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(out):
    return [ln for ln in out.splitlines() if ln and not ln.startswith("#")]


def test_eigen_then_cache_hit_is_identical(tmp_path, capsys):
    code, first, _ = run(capsys, "eigen", "-q", "37", "--cache-dir", str(tmp_path))
    assert code == 0
    assert (tmp_path / "eigsys_q37.txt").exists()
    mtime = os.stat(tmp_path / "eigsys_q37.txt").st_mtime_ns
    code, second, _ = run(capsys, "eigen", "-q", "37", "--cache-dir", str(tmp_path))
    assert code == 0 and first == second
    assert os.stat(tmp_path / "eigsys_q37.txt").st_mtime_ns == mtime
    assert csv_rows(first)[0] == "q,g,n_max,form,eps,weight,lambda_2"
    assert len(csv_rows(first)) == 3


def test_header_records_version_invocation_theta(tmp_path, capsys):
    _, out, _ = run(capsys, "lvalue", "-q", "11", "--cache-dir", str(tmp_path))
    head = [ln for ln in out.splitlines() if ln.startswith("#")]
    assert head[0].startswith("# fourthmoment ")
    assert head[1] == f"# invocation: fourthmoment lvalue -q 11 --cache-dir {tmp_path}"
    assert head[2] == "# theta: 7/64"
    value = float(csv_rows(out)[1].split(",")[3])
    assert value == pytest.approx(0.2538418609, abs=1e-6)


@pytest.mark.parametrize("argv", [
    ["eigen", "-q", "12"],
    ["eigen"],
    ["amplify", "-q", "11", "-L", "2"],
    ["lemma1", "-q", "11", "-M", "8", "-N", "8", "-C", "8"],
    ["exponents", "--theta", "1/5"],
    ["frobnicate"],
])
def test_usage_errors_exit_1(tmp_path, capsys, argv):
    code, out, err = run(capsys, *argv, "--cache-dir", str(tmp_path))
    assert code == 1
    assert out == ""
    assert err


def test_exponents_command(capsys):
    code, out, _ = run(capsys, "exponents")
    assert code == 0
    rows = dict(r.split(",")[:2] for r in csv_rows(out)[1:])
    assert rows["delta"] == "25/3136"
    assert rows["delta1_formula"] == "25/506"
    assert "# delta1, 25/566, 25/506, NO [closed form evaluated exactly]" in out
    code, out, _ = run(capsys, "exponents", "--theta", "3/16")
    assert code == 0 and "theta,1/4," in out


def test_moment_list_with_partial_failure(tmp_path, capsys):
    code, out, _ = run(capsys, "moment", "-q", "11,13,37", "--main-term", "leading",
                       "--cache-dir", str(tmp_path))
    assert code == 0
    rows = csv_rows(out)
    assert rows[0] == "q,g,M_harmonic,M_natural,residual"
    assert [r.split(",")[0] for r in rows[1:]] == ["11", "13", "37"]


def test_moment_all_levels_failing_exit_2(tmp_path, capsys):
    code, out, _ = run(capsys, "moment", "-q", "11", "--twist", "11", "--cache-dir", str(tmp_path))
    assert code == 2
    assert "# q=11 error: ValueError" in out


def test_amplify_and_determinism(tmp_path, capsys):
    args = ["amplify", "-q", "11", "-L", "25", "--cache-dir", str(tmp_path)]
    code, a, _ = run(capsys, *args)
    assert code == 0
    assert csv_rows(a)[1].split(",")[3] == "3.0"
    _, b, _ = run(capsys, *args)
    assert a == b


def test_sieve_bench_is_deterministic(capsys):
    args = ["sieve-bench", "--trials", "3", "--size", "16", "--seed", "5"]
    code, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert code == 0 and a == b
    assert len(csv_rows(a)) == 4


def test_out_file_written_atomically(tmp_path, capsys):
    target = tmp_path / "out.csv"
    code, out, _ = run(capsys, "exponents", "--out", str(target))
    assert code == 0 and out == ""
    assert target.read_text().startswith("# fourthmoment")


def test_corrupt_cache_is_a_computation_failure(tmp_path, capsys):
    (tmp_path / "eigsys_q11.txt").write_text("EIGSYS 9\n")
    code, _, err = run(capsys, "eigen", "-q", "11", "--cache-dir", str(tmp_path))
    assert code == 2
    assert "version" in err
