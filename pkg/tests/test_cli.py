"""The command-line surface: every subcommand, exit codes, file round-trips."""
import pytest

from jemaim.cli import main

from corpus import COMPONENTS, INEQUIVALENT_PAIRS, WHOLE_PROGRAMS


@pytest.fixture
def ws(tmp_path):
    (tmp_path / "prog.jem").write_text(WHOLE_PROGRAMS["arith-add"])
    (tmp_path / "c1.jem").write_text(INEQUIVALENT_PAIRS["int-return"][0])
    (tmp_path / "c2.jem").write_text(INEQUIVALENT_PAIRS["int-return"][1])
    (tmp_path / "bad.jem").write_text("class c { c(){} public m() : c()->Bool { return 4; } };")
    (tmp_path / "broken.jem").write_text("class c { class c")
    return tmp_path


def run_cli(*args):
    return main([str(a) for a in args])


class TestCheck:
    def test_good_file_exit_zero(self, ws):
        assert run_cli("check", ws / "prog.jem") == 0

    def test_type_error_exit_one(self, ws, capsys):
        assert run_cli("check", ws / "bad.jem") == 1
        err = capsys.readouterr().err
        assert "bad.jem:" in err and ":" in err

    def test_syntax_error_reports_position(self, ws, capsys):
        assert run_cli("check", ws / "broken.jem") == 1
        assert "error:" in capsys.readouterr().err


class TestRunJem:
    def test_prints_terminated(self, ws, capsys):
        assert run_cli("run_jem", ws / "prog.jem") == 0
        assert "Terminated(42)" in capsys.readouterr().out

    def test_fuel_flag(self, ws, capsys):
        (ws / "spin.jem").write_text(WHOLE_PROGRAMS["diverge-spin"])
        assert run_cli("run_jem", ws / "spin.jem", "--fuel", "500") == 0
        assert "OutOfFuel" in capsys.readouterr().out


class TestCompileLinkRun:
    def test_full_pipeline(self, ws, capsys):
        assert run_cli("compile", ws / "prog.jem", "-o", ws / "mods") == 0
        files = sorted(p.name for p in (ws / "mods").glob("*.aimod"))
        assert files == ["main.aimod", "sys.aimod"]
        assert run_cli("link", *(ws / "mods").glob("*.aimod"), "-o", ws / "prog.aimod") == 0
        assert run_cli("run_aim", ws / "prog.aimod") == 0
        assert "r6=42" in capsys.readouterr().out

    def test_emitted_files_round_trip(self, ws):
        from jemaim.aim import aimod

        run_cli("compile", ws / "prog.jem", "-o", ws / "mods")
        for p in (ws / "mods").glob("*.aimod"):
            text = p.read_text()
            assert aimod.dump(aimod.load(text)) == text

    def test_link_clashing_ids_fails(self, ws, capsys):
        run_cli("compile", ws / "c1.jem", "-o", ws / "m1")
        run_cli("compile", ws / "c2.jem", "-o", ws / "m2")
        code = run_cli("link", ws / "m1" / "c.aimod", ws / "m2" / "c.aimod", "-o", ws / "x.aimod")
        assert code == 1
        assert "error: Incompatible" in capsys.readouterr().err

    def test_identical_invocations_identical_outputs(self, ws):
        run_cli("compile", ws / "prog.jem", "-o", ws / "a")
        run_cli("compile", ws / "prog.jem", "-o", ws / "b")
        # fresh masks differ between instances; module structure must not
        a = (ws / "a" / "sys.aimod").read_text()
        b = (ws / "b" / "sys.aimod").read_text()
        assert a == b


class TestTracePipeline:
    def test_trace_writes_canonical_files(self, ws, capsys):
        assert run_cli("trace", ws / "c1.jem", "-o", ws / "traces", "--depth", "2") == 0
        files = sorted((ws / "traces").glob("*.trace"))
        assert files
        joined = "".join(f.read_text() for f in files)
        assert "call? (2,16) [1,0,0,0,0,48,N0]" in joined

    def test_trace_diff_and_backtranslate_and_verify(self, ws, capsys):
        assert run_cli("trace_diff", ws / "c1.jem", ws / "c2.jem", "-o", ws / "div", "--depth", "2") == 0
        assert (ws / "div" / "t1.trace").exists()
        assert (
            run_cli(
                "backtranslate",
                ws / "c1.jem",
                ws / "c2.jem",
                ws / "div" / "t1.trace",
                ws / "div" / "t2.trace",
                "-o",
                ws / "witness.jem",
            )
            == 0
        )
        assert run_cli("check", ws / "witness.jem") == 0
        assert run_cli("verify_witness", ws / "witness.jem", ws / "c1.jem", ws / "c2.jem") == 0
        out = capsys.readouterr().out
        assert "Terminated" in out and "OutOfFuel" in out and "distinguishing: True" in out

    def test_trace_diff_equivalent_components(self, ws, capsys):
        assert run_cli("trace_diff", ws / "c1.jem", ws / "c1.jem", "--depth", "2", "-o", ws / "d2") == 0
        assert "equivalent at depth 2" in capsys.readouterr().out

    def test_trace_deterministic_across_seeds(self, ws):
        run_cli("trace", ws / "c1.jem", "-o", ws / "t0", "--seed", "0", "--depth", "2")
        run_cli("trace", ws / "c1.jem", "-o", ws / "t9", "--seed", "9", "--depth", "2")
        a = sorted(p.read_text() for p in (ws / "t0").glob("*.trace"))
        b = sorted(p.read_text() for p in (ws / "t9").glob("*.trace"))
        assert a == b


class TestProcessDeterminism:
    def test_fresh_processes_produce_identical_modules(self, ws):
        """Identical invocations (fresh interpreter each) emit identical files."""
        import subprocess
        import sys

        outs = []
        for d in ("pa", "pb"):
            subprocess.run(
                [sys.executable, "-m", "jemaim.cli", "compile", str(ws / "prog.jem"), "-o", str(ws / d)],
                check=True,
                capture_output=True,
            )
            outs.append(sorted(p.read_text() for p in (ws / d).glob("*.aimod")))
        assert outs[0] == outs[1]
