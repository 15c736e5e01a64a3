import io
import subprocess
import sys

import pytest

from sandlab.cli import main
from sandlab.checks import GOLDEN_DIR
from sandlab.formats import parse_bundle


@pytest.fixture
def run(monkeypatch, capsys):
    def _run(argv, stdin=""):
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
        code = main(argv)
        out = capsys.readouterr()
        return code, out.out, out.err

    return _run


def pipe(run, *stages):
    text = ""
    for argv in stages:
        code, text, err = run(argv, text)
        assert code == 0, err
    return text


def test_gen_identity_inverse(run):
    out = pipe(run, ["gen", "grid-wired", "3"], ["identity"], ["inverse"])
    assert parse_bundle(out).chips == (2, 1, 2, 1, 0, 1, 2, 1, 2, 0)


def test_stabilize_with_additions(run):
    code, out, err = run(["stabilize", "--add", "0:2", "--add", "1:2", "--odometer"],
                         pipe(run, ["gen", "path", "3"]))
    assert code == 0 and "firings" in err
    assert parse_bundle(out).chips is not None


def test_group(run):
    out = pipe(run, ["gen", "grid-wired", "3"], ["group"])
    assert out == "order 100352\nstructure Z/4 x Z/112 x Z/224\n"


def test_recurrent(run):
    g = pipe(run, ["gen", "grid-wired", "2", "--chips", "zero"])
    code, out, _ = run(["recurrent", "--method", "burning", "--check"], g)
    assert code == 3 and out == "not recurrent\n"
    unstable = pipe(run, ["gen", "grid-wired", "2", "--chips", "delta"])
    assert run(["recurrent"], unstable)[0] == 1
    ident = pipe(run, ["gen", "grid-wired", "2"], ["identity"])
    code, out, _ = run(["recurrent", "--method", "peeling"], ident)
    assert out == "recurrent\n"


def test_superstabilize(run):
    out = pipe(run, ["gen", "grid-wired", "3", "--chips", "delta"], ["superstabilize"])
    assert parse_bundle(out).chips == (2, 0, 2, 0, 0, 0, 2, 0, 2, 0)


def test_rotor_orbit(run):
    out = pipe(run, ["gen", "bidirected-grid", "3", "4", "--rotors", "tree", "--root", "0"],
               ["rotor-orbit", "--chip", "0"])
    assert out.startswith("length 34\n")


def test_tour(run):
    out = pipe(run, ["gen", "complete", "3"], ["tour", "0", "--count"])
    assert out == "tours 3\nformula 3\n"
    out = pipe(run, ["gen", "cycle", "4", "--rotors", "tree", "--root", "0"], ["tour", "0"])
    assert out == "0 1 2 3\n"


def test_bijection(run):
    g = pipe(run, ["gen", "complete-with-sink", "3", "--rotors", "tree"])
    out = run(["bijection", "--list"], g)[1]
    assert len(out.splitlines()) == 3


def test_hitting_bound(run):
    out = pipe(run, ["gen", "path", "4", "--chips", "ones", "--rotors", "tree"], ["hitting-bound", "--Y", "3", "--Z", "0,3"])
    assert out.endswith("holds yes\n")


def test_stacks_pipeline(run):
    g = pipe(run, ["gen", "grid-wired", "2", "--rotors", "tree"], ["stacks", "show"])
    added = run(["stacks", "add", "--vertex", "0"], g)[1]
    back = run(["stacks", "unadd", "--vertex", "0"], added)[1]
    assert parse_bundle(back).stacks == parse_bundle(g).stacks
    popped = pipe(run, ["gen", "grid-wired", "2", "--rotors", "initial"], ["stacks", "pop"])
    assert parse_bundle(popped).rotors is not None


def test_aggregate(run, tmp_path):
    img = tmp_path / "agg.ppm"
    code, out, _ = run(["aggregate", "10000", "--H", "-2", "--ppm", str(img)])
    assert code == 0
    assert "bounding_box -77 77 -77 77" in out and "square yes" in out
    assert img.read_bytes().startswith(b"P6\n")


def test_render_matches_golden(run, tmp_path):
    g = pipe(run, ["gen", "grid-wired", "128"], ["identity"])
    out = tmp_path / "id.ppm"
    code, _, _ = run(["render", "--palette", "grid4", "--out", str(out)], g)
    assert code == 0
    assert out.read_bytes() == (GOLDEN_DIR / "grid_wired_128_identity.ppm").read_bytes()


def test_in_out_flags(run, tmp_path):
    src = tmp_path / "g.txt"
    dst = tmp_path / "id.txt"
    assert run(["gen", "grid-wired", "3", "--out", str(src)])[0] == 0
    assert run(["identity", "--in", str(src), "--out", str(dst)])[0] == 0
    assert parse_bundle(dst.read_text()).chips[4] == 0


def test_usage_errors_exit_2(run):
    assert run(["frobnicate"])[0] == 2
    assert run(["gen", "grid-wired", "x"])[0] == 2
    assert run(["inverse"], pipe(run, ["gen", "grid-wired", "2"]))[0] == 2  # no chips block


def test_engine_errors_exit_1(run):
    code, _, err = run(["identity"], "not a bundle\n")
    assert code == 1 and "bad input" in err
    g = pipe(run, ["gen", "grid-wired", "2", "--chips", "zero"])
    code, _, err = run(["inverse"], g)
    assert code == 1 and "NotRecurrentError" in err


def test_sink_free_uses_env_cap(run, monkeypatch):
    g = pipe(run, ["gen", "complete", "3"])
    g += "chips v1\n4 0 0\n"
    assert run(["stabilize"], g)[0] == 1
    monkeypatch.setenv("SANDLAB_MAXSTEPS", "1000")
    code, _, err = run(["stabilize"], g)
    assert code == 1 and "Nonterminating" in err
    code, out, _ = run(["stabilize"], g.replace("4 0 0", "3 0 0"))
    assert code == 0 and parse_bundle(out).chips == (1, 1, 1)


def test_verify_subset(run):
    code, out, _ = run(["verify", "--only", "1", "3"])
    assert code == 0
    assert out.count("[PASS]") == 2


def test_bench_figures(run, tmp_path):
    code, out, _ = run(["bench", "--figures", str(tmp_path), "--only", "square-ident-128"])
    assert code == 0
    assert (tmp_path / "square-ident-128.ppm").read_bytes() == (GOLDEN_DIR / "grid_wired_128_identity.ppm").read_bytes()
    assert "square-ident-128" in (tmp_path / "bench.log").read_text()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sandlab", "gen", "complete", "3"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("sandgraph v1\n")
