"""CLI contract tests: exit codes, report shapes, and determinism."""
from __future__ import annotations

import json
import subprocess
import sys

import pytest

from prepost.cli import main, parse_request, parse_state_literal, StateLiteralError
from prepost.network import PRESET_DOUBLE_MZ


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# literal grammar

def test_state_literal_grammar():
    entries = parse_state_literal("g:0.7071067811865476,0;h:0,-0.7071067811865476")
    assert entries["g"] == complex(0.7071067811865476, 0)
    assert entries["h"] == complex(0, -0.7071067811865476)


@pytest.mark.parametrize(
    "literal",
    ["", "g", "g:1", "g:1,2,3", "g:x,0", ":1,0", "g:1,0;g:0,1"],
)
def test_state_literal_rejects_malformed(literal):
    with pytest.raises(StateLiteralError):
        parse_state_literal(literal)


def test_parse_request_accepts_a_full_abl_invocation():
    args = parse_request(
        ["abl", "--preset", "--pre", "a:1,0", "--post", "g:1,0",
         "--cut", "1", "--basis", "path"]
    )
    assert args.command == "abl"
    assert args.preset is True
    assert args.cut == 1
    assert args.basis == "path"


# ---------------------------------------------------------------------------
# exit codes

def test_valid_abl_request(capsys):
    code, out, _ = run_cli(
        ["abl", "--preset", "--pre", "a:1,0", "--post", "g:1,0",
         "--cut", "1", "--basis", "path"],
        capsys,
    )
    assert code == 0
    assert "d: 1" in out


def test_unknown_flag_exits_2(capsys):
    code, _, _ = run_cli(["abl", "--nonsense"], capsys)
    assert code == 2


def test_malformed_literal_exits_5(capsys):
    code, _, err = run_cli(["abl", "--preset", "--pre", "a:oops", "--post", "g:1,0"], capsys)
    assert code == 5
    assert "error" in err


def test_out_of_range_quantile_exits_6(capsys):
    code, _, _ = run_cli(["bohm", "--preset", "--quantile", "1.5"], capsys)
    assert code == 6


def test_out_of_range_cut_exits_6(capsys):
    code, _, _ = run_cli(
        ["abl", "--preset", "--pre", "a:1,0", "--post", "g:1,0", "--cut", "9"], capsys
    )
    assert code == 6


def test_missing_network_file_exits_3(capsys):
    code, _, _ = run_cli(["evolve", "--network", "missing.json", "--pre", "a:1,0"], capsys)
    assert code == 3


def test_invalid_network_file_exits_3(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"modes": ["a"], "stages": [], "wat": 1}', encoding="utf-8")
    code, _, _ = run_cli(["evolve", "--network", str(bad), "--pre", "a:1,0"], capsys)
    assert code == 3


def test_state_on_non_live_mode_exits_4(capsys):
    code, _, err = run_cli(
        ["abl", "--preset", "--pre", "a:1,0", "--post", "a:1,0", "--cut", "1"], capsys
    )
    assert code == 4
    assert "not live" in err


def test_inconsistent_selection_exits_4(capsys):
    code, _, err = run_cli(
        ["abl", "--preset", "--pre", "a:1,0",
         "--post", "g:0.7071067811865476,0;h:0,-0.7071067811865476", "--cut", "1"],
        capsys,
    )
    assert code == 4
    assert "orthogonal" in err


# ---------------------------------------------------------------------------
# evolve output

def test_evolve_final_state_json(capsys):
    code, out, _ = run_cli(
        ["evolve", "--preset", "--pre", "a:1,0", "--format", "json"], capsys
    )
    assert code == 0
    payload = json.loads(out)
    final = payload["cuts"][-1]["state"]
    assert final == {"g": [-0.707106781187, 0], "h": [0, 0.707106781187]}


def test_evolve_backward_table(capsys):
    code, out, _ = run_cli(
        ["evolve", "--preset", "--post", "g:1,0", "--format", "json"], capsys
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["cuts"][2]["post"] == {"d": [0, 1]}


def test_evolve_pairing_when_both_given(capsys):
    code, out, _ = run_cli(
        ["evolve", "--preset", "--pre", "a:1,0", "--post", "g:1,0", "--format", "json"],
        capsys,
    )
    payload = json.loads(out)
    pairings = [tuple(rec["pairing"]) for rec in payload["cuts"]]
    assert len(set(pairings)) == 1
    assert abs(pairings[0][0] + 0.707106781187) < 1e-9


def test_evolve_requires_a_state(capsys):
    code, _, _ = run_cli(["evolve", "--preset"], capsys)
    assert code == 5


# ---------------------------------------------------------------------------
# abl output

def test_abl_json_probabilities(capsys):
    code, out, _ = run_cli(
        ["abl", "--preset", "--pre", "a:1,0", "--post", "g:1,0",
         "--cut", "1", "--format", "json"],
        capsys,
    )
    payload = json.loads(out)
    assert payload["probabilities"] == {"c": 0, "d": 1}
    assert payload["two_state"]["pre"]["d"] == [0, 0.707106781187]


def test_abl_certainty_report_and_diagram(capsys):
    code, out, _ = run_cli(
        ["abl", "--preset", "--pre", "a:1,0", "--post", "g:1,0",
         "--cut", "1", "--certainty"],
        capsys,
    )
    assert code == 0
    assert "cut 1: d" in out
    assert "d*" in out and "e*" in out  # diagram stars the certainty path


def test_abl_custom_projector_file(tmp_path, capsys):
    basis_file = {
        "outcomes": [
            {"label": "plus", "ket": {"c": [0.7071067811865476, 0], "d": [0.7071067811865476, 0]}},
            {"label": "minus", "ket": {"c": [0.7071067811865476, 0], "d": [-0.7071067811865476, 0]}},
        ]
    }
    path = tmp_path / "basis.json"
    path.write_text(json.dumps(basis_file), encoding="utf-8")
    code, out, _ = run_cli(
        ["abl", "--preset", "--pre", "a:1,0", "--post", "g:1,0",
         "--cut", "1", "--basis", str(path), "--format", "json"],
        capsys,
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["probabilities"] == {"minus": 0.5, "plus": 0.5}


# ---------------------------------------------------------------------------
# bohm output

def test_bohm_reversed_truncated_with_diagnostic(capsys):
    code, out, _ = run_cli(
        ["bohm", "--preset", "--direction", "reversed", "--post", "g:1,0",
         "--quantile", "0.25", "--format", "json"],
        capsys,
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["path"] == ["g", "f", "d"]
    assert any("empty-wave component absent" in d for d in payload["diagnostics"])


def test_bohm_reversed_ensemble_splits_between_source_and_vacuum(capsys):
    code, out, _ = run_cli(
        ["bohm", "--preset", "--direction", "reversed", "--post", "g:1,0",
         "--samples", "400", "--seed", "3", "--format", "json"],
        capsys,
    )
    assert code == 0
    payload = json.loads(out)
    assert set(payload["detector_counts"]) == {"a", "b"}
    assert payload["conditional_paths"]["a"] == {"g>f>d": payload["detector_counts"]["a"]}
    assert payload["conditional_paths"]["b"] == {"g>e>d": payload["detector_counts"]["b"]}
    assert any("empty-wave component absent" in d for d in payload["diagnostics"])


def test_bohm_forward_trajectory_text(capsys):
    code, out, _ = run_cli(
        ["bohm", "--preset", "--quantile", "0.25"], capsys
    )
    assert code == 0
    assert "a -> c -> e" in out
    assert "terminal: G" in out


def test_bohm_ensemble_json(capsys):
    code, out, _ = run_cli(
        ["bohm", "--preset", "--samples", "400", "--seed", "11", "--format", "json"],
        capsys,
    )
    payload = json.loads(out)
    assert payload["samples"] == 400
    assert payload["seed"] == 11
    assert set(payload["detector_counts"]) == {"G", "H"}
    assert payload["conditional_paths"]["G"] == {"a>c>e": payload["detector_counts"]["G"]}


# ---------------------------------------------------------------------------
# measure output

def test_measure_forward_json(capsys):
    code, out, _ = run_cli(
        ["measure", "--system", "s0:1,0", "--eigenbasis", "s0,s1",
         "--eigenvalues", "0.5,-0.5", "--pointer", "0.25", "--format", "json"],
        capsys,
    )
    payload = json.loads(out)
    rec = payload["records"][0]
    assert rec["q_initial"] == 0.25
    assert rec["q_final"] == 0.75
    assert rec["deduced"] == 0.5


def test_measure_backward_batch(capsys):
    code, out, _ = run_cli(
        ["measure", "--direction", "backward",
         "--system", "s0:0.7071067811865476,0;s1:0,0.7071067811865476",
         "--eigenbasis", "s0,s1", "--eigenvalues", "0.5,-0.5",
         "--samples", "50", "--seed", "2", "--format", "json"],
        capsys,
    )
    payload = json.loads(out)
    assert len(payload["records"]) == 50
    for rec in payload["records"]:
        assert rec["q_initial"] - rec["q_final"] == rec["deduced"]


# ---------------------------------------------------------------------------
# demo and determinism

def test_demo_all_pass(capsys):
    code, out, _ = run_cli(["demo", "--format", "json"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["failed"] == 0
    assert payload["passed"] == len(payload["items"]) == 12


def test_demo_text_has_pass_lines_and_diagram(capsys):
    code, out, _ = run_cli(["demo"], capsys)
    assert code == 0
    assert out.count("PASS") == 12
    assert "BS(a,b -> c,d)" in out


def test_repeated_runs_are_byte_identical(capsys):
    _, first, _ = run_cli(["demo", "--seed", "5", "--format", "json"], capsys)
    _, second, _ = run_cli(["demo", "--seed", "5", "--format", "json"], capsys)
    assert first == second
    _, third, _ = run_cli(
        ["bohm", "--preset", "--samples", "200", "--seed", "7", "--format", "json"], capsys
    )
    _, fourth, _ = run_cli(
        ["bohm", "--preset", "--samples", "200", "--seed", "7", "--format", "json"], capsys
    )
    assert third == fourth


def test_json_output_round_trips(capsys):
    _, out, _ = run_cli(["demo", "--format", "json"], capsys)
    assert json.loads(out)  # parses cleanly


def test_network_file_round_trip(tmp_path, capsys):
    path = tmp_path / "net.json"
    path.write_text(json.dumps(PRESET_DOUBLE_MZ), encoding="utf-8")
    code, out, _ = run_cli(
        ["evolve", "--network", str(path), "--pre", "a:1,0", "--format", "json"], capsys
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["cuts"][-1]["state"]["g"] == [-0.707106781187, 0]


def test_console_entry_point_subprocess_deterministic():
    def run_once():
        proc = subprocess.run(
            [sys.executable, "-m", "prepost", "demo", "--format", "json"],
            capture_output=True,
            timeout=120,
        )
        assert proc.returncode == 0
        return proc.stdout

    first = run_once()
    second = run_once()
    assert first == second  # byte-identical across processes
    payload = json.loads(first)
    assert payload["failed"] == 0
