import io
from types import SimpleNamespace

from colp import cli
from colp.engine import BUDGET_EXHAUSTED, COMPLETE
from colp.equations import solve
from colp.terms import Compound

from conftest import PROGRAMS_DIR

OMEGA = str(PROGRAMS_DIR / "omega.colp")
OMEGA_U = str(PROGRAMS_DIR / "omega.univ")
LISTS = str(PROGRAMS_DIR / "lists.colp")
LISTS_U = str(PROGRAMS_DIR / "lists.univ")
LTL = str(PROGRAMS_DIR / "ltl.colp")


def run_cli(argv, stdin=""):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(argv, stdin=io.StringIO(stdin), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


# --- run -------------------------------------------------------------------

def test_run_prints_first_answer_without_status():
    code, out, err = run_cli(["run", LISTS, "member(X, [0,1])."])
    # the cap cut enumeration short, so no completion claim is made
    assert (code, out, err) == (0, "X = 0\n", "")


def test_run_enumerates_under_answer_cap():
    code, out, err = run_cli(
        ["run", LISTS, "member(X, [0,1]).", "--answers", "3"])
    assert (code, out) == (0, "X = 0\nX = 1\nno (more) answers\n")


def test_run_reports_finite_failure():
    code, out, err = run_cli(["run", LISTS, "member(3, [0,1])."])
    assert (code, out, err) == (1, "failed\n", "")


def test_run_reports_budget_exhaustion():
    code, out, err = run_cli(["run", OMEGA, "p(z).", "--budget", "50"])
    assert (code, out, err) == (2, "budget exhausted\n", "")


def test_run_dfs_strategy():
    code, out, err = run_cli(
        ["run", OMEGA, "p(X).", "--strategy", "dfs", "--budget", "32"])
    assert (code, out) == (0, "X = s(X)\n")


def test_run_type_errors_exit_3():
    code, out, err = run_cli(["run", LISTS, "X is 1 + a."])
    assert code == 3
    assert out == "failed\n"
    assert err == "type error: not arithmetic: a/0 in X is 1+a\n"


def test_run_missing_file_exits_3():
    code, out, err = run_cli(["run", "no/such/file.colp", "p."])
    assert code == 3 and out == ""
    assert err.startswith("cannot read no/such/file.colp")


def test_run_program_syntax_error_exits_3(tmp_path):
    bad = tmp_path / "bad.colp"
    bad.write_text("p(.\n")
    code, out, err = run_cli(["run", str(bad), "p."])
    assert code == 3 and out == ""
    assert err.startswith(f"{bad}:1:") and err.count("\n") == 1


def test_run_query_syntax_error_exits_3():
    code, out, err = run_cli(["run", LISTS, "member(X"])
    assert code == 3 and out == ""
    assert err.startswith("<query>:1:")


def test_run_trace_goes_to_stderr():
    code, out, err = run_cli(["run", LISTS, "member(1, [0,1]).", "--trace"])
    assert (code, out) == (0, "true\n")
    assert "STEP" in err and "EMPTY" in err


def test_flag_validation():
    code, _, err = run_cli(["run", LISTS, "p.", "--budget", "0"])
    assert code == 3 and err == "--budget must be at least 1\n"
    code, _, err = run_cli(["run", LISTS, "p.", "--answers", "0"])
    assert code == 3 and err == "--answers must be at least 1\n"


def test_unknown_subcommand_exits_3(capsys):
    assert run_cli(["frobnicate"])[0] == 3


def test_help_exits_0(capsys):
    assert run_cli(["--help"])[0] == 0


# --- semantics ----------------------------------------------------------------

def test_semantics_successor_loop_tables():
    code, out, err = run_cli(["semantics", OMEGA, OMEGA_U])
    assert code == 0
    assert out == "Ind: (empty)\nCoInd: p(omega)\nReg: p(omega)\n"
    assert err == "warning: instance escapes the universe: p on s(s(z))\n"


def test_semantics_inductive_mode_empties_reg():
    code, out, _ = run_cli(["semantics", OMEGA, OMEGA_U, "--mode", "inductive"])
    assert code == 0
    assert out == "Ind: (empty)\nCoInd: p(omega)\nReg: (empty)\n"


def test_semantics_without_coclauses_has_reg_equal_ind():
    code, out, _ = run_cli(["semantics", LISTS, LISTS_U])
    assert code == 0
    lines = dict(line.split(": ", 1) for line in out.splitlines())
    assert lines["Reg"] == lines["Ind"] != "(empty)"


# --- check ---------------------------------------------------------------------

def test_check_passes_on_successor_loop():
    code, out, _ = run_cli(
        ["check", OMEGA, OMEGA_U, "p(X).", "--budget", "32"])
    assert (code, out) == (0, "PASS\n")


def stub_outcome(answers, exhaustion):
    return SimpleNamespace(answers=iter(answers), diagnostics=[],
                           exhaustion=exhaustion)


def test_check_reports_missing_answers(monkeypatch):
    monkeypatch.setattr(
        cli, "run_query", lambda *a, **k: stub_outcome([], COMPLETE))
    code, out, _ = run_cli(["check", OMEGA, OMEGA_U, "p(X)."])
    assert code == 1
    assert out == "missing: X = omega\nFAIL\n"


def test_check_reports_unsound_answers(monkeypatch):
    def fake(prog, query, cfg, trace=None):
        x = query.variables[0]
        return stub_outcome([solve([(x, Compound("z", ()))])], COMPLETE)

    monkeypatch.setattr(cli, "run_query", fake)
    code, out, _ = run_cli(["check", OMEGA, OMEGA_U, "p(X)."])
    assert code == 1
    assert out == ("unsound: X = z instantiates to X = z outside Reg\n"
                   "missing: X = omega\nFAIL\n")


def test_check_notes_budget_exhaustion_on_fail(monkeypatch):
    monkeypatch.setattr(
        cli, "run_query", lambda *a, **k: stub_outcome([], BUDGET_EXHAUSTED))
    code, out, _ = run_cli(["check", OMEGA, OMEGA_U, "p(X)."])
    assert code == 1
    assert out == ("missing: X = omega\n"
                   "note: enumeration was budget exhausted\nFAIL\n")


# --- repl -----------------------------------------------------------------------

def test_repl_enumerates_with_semicolons():
    code, out, err = run_cli(["repl", LISTS],
                             stdin="member(X, [0,1]).\n;\n;\n")
    assert code == 0 and err == ""
    assert out == "?- X = 0\nX = 1\nno (more) answers\n?- \n"


def test_repl_stop_reply_ends_enumeration():
    code, out, _ = run_cli(["repl", LISTS],
                           stdin="member(X, [0,1]).\n.\n:quit\n")
    assert code == 0
    assert out == "?- X = 0\n?- "


def test_repl_empty_line_reprompts():
    code, out, _ = run_cli(["repl", LISTS], stdin="\n:quit\n")
    assert code == 0 and out == "?- ?- "


def test_repl_directives_and_error_recovery():
    session = ":mode inductive\np(X).\n:budget 5\n:wat\n)(\n:quit\n"
    code, out, err = run_cli(["repl", OMEGA], stdin=session)
    assert code == 0
    assert out == "?- ?- budget exhausted\n?- ?- ?- ?- "
    assert "unknown directive: :wat\n" in err
    assert "<query>:1:" in err


def test_repl_trace_toggle():
    code, out, err = run_cli(["repl", OMEGA],
                             stdin=":trace\n:budget 5\np(z).\n:quit\n")
    assert code == 0
    assert out == "?- ?- ?- budget exhausted\n?- "
    assert "STEP" in err


def test_repl_temporal_queries():
    session = ("W = [0|W], sat(W, always(zero)).\n.\n"
               "sat([1,1,0|W], until(one, zero)), W = [1|W].\n.\n"
               ":quit\n")
    code, out, _ = run_cli(["repl", LTL], stdin=session)
    assert code == 0
    assert out == "?- W = [0|W]\n?- W = [1|W]\n?- "


def test_repl_missing_program_exits_3():
    code, out, err = run_cli(["repl", "no/such/file.colp"])
    assert code == 3 and out == ""
