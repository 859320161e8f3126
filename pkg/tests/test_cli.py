import json
import re
import textwrap

import pytest

from morreylab.cli import ConfigError, main, validate
from morreylab.cli.config import load_toml
from morreylab.cli.main import EXIT_CONFIG, list_presets, preset_dir

# anchors describe the statement they exercise; numbered references are not allowed
NUMBERED = re.compile(
    r"§|\b(eq|eqn|equation|lemma|theorem|thm|section|sec|definition|def|proposition|prop|corollary|cor)\b\.?\s*\(?\d",
    re.IGNORECASE,
)

MINIMAL = """
seed = 3

[grid]
lower = -4.0
upper = 4.0
h = 0.0625

[spaces.L2]
kind = "lebesgue"
p = 2.0

[spaces.L1]
kind = "lebesgue"
p = 1.0

[[experiments]]
id = "lebesgue-characteristic"
type = "characteristic"
paper_anchor = "ball characteristic condition for the Lebesgue triple"
spaces = ["L2", "L2", "L1"]
regions = { shape = "ball", centers = [0.0, 1.0], log2 = [-3, 1] }
"""

NEGATIVE = MINIMAL + """
[[experiments]]
id = "unbalanced"
type = "characteristic"
paper_anchor = "ball characteristic condition for an unbalanced triple"
negative_control = true
spaces = ["L2", "L2", "L2"]
regions = { shape = "ball", centers = [0.0], log2 = [-3, 1] }
"""


def write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return p


def run(tmp_path, cfg, *extra):
    out = tmp_path / "out"
    return main(["run", "--config", str(cfg), "--out", str(out), *extra]), out


def test_minimal_config_passes(tmp_path, capsys):
    code, out = run(tmp_path, write(tmp_path, MINIMAL))
    assert code == 0
    rep = json.loads((out / "lebesgue-characteristic.json").read_text())
    assert rep["verdict"] == "pass"
    assert rep["config"]["paper_anchor"].startswith("ball characteristic")
    assert rep["config"]["seed"] == 3
    assert "PASS" in capsys.readouterr().out


def test_negative_control_sets_exit_code(tmp_path):
    code, out = run(tmp_path, write(tmp_path, NEGATIVE))
    assert code == 1
    rep = json.loads((out / "unbalanced.json").read_text())
    assert rep["verdict"] == "fail"
    assert any("negative control" in n for n in rep["notes"])


def test_resolution_override(tmp_path):
    code, out = run(tmp_path, write(tmp_path, MINIMAL), "--resolution-override", "h/2")
    assert code == 0
    rep = json.loads((out / "lebesgue-characteristic.json").read_text())
    assert rep["config"]["grid"]["h"] == pytest.approx(0.03125)


def test_determinism_hash_stable(tmp_path):
    cfg = write(tmp_path, MINIMAL)
    run(tmp_path, cfg)
    first = json.loads((tmp_path / "out" / "summary.json").read_text())
    run(tmp_path, cfg, "--threads", "2", "--format", "both")
    second = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert first["determinism_hash"] == second["determinism_hash"]
    assert (tmp_path / "out" / "lebesgue-characteristic.csv").exists()


def test_seed_override_changes_hash(tmp_path):
    cfg = write(tmp_path, MINIMAL)
    run(tmp_path, cfg)
    a = json.loads((tmp_path / "out" / "summary.json").read_text())["determinism_hash"]
    run(tmp_path, cfg, "--seed", "4")
    b = json.loads((tmp_path / "out" / "summary.json").read_text())["determinism_hash"]
    assert a != b


@pytest.mark.parametrize(
    "text, message",
    [
        (MINIMAL.replace('"L2", "L2", "L1"', '"L2", "L3", "L1"'), "unresolved reference: space 'L3'"),
        (MINIMAL.replace("seed = 3", ""), "missing required key 'seed'"),
        (MINIMAL.replace('paper_anchor = "ball characteristic condition for the Lebesgue triple"', ""), "paper_anchor"),
        (MINIMAL.replace('type = "characteristic"', 'type = "nonsense"'), "unknown experiment type"),
        (MINIMAL.replace("h = 0.0625", "h = 0.3"), "integer multiple"),
        (MINIMAL + '\n[kernels.k]\nkind = "fractional"\nalpha = 2.5\n[[experiments]]\nid = "t"\ntype = "truncation_convergence"\n'
         'paper_anchor = "x"\nkernel = "k"\nfamily = "f"\nladder_log2_h = [0, 4]\n', "0 < alpha < 2n"),
        (MINIMAL.replace("p = 1.0", "p = 1.0\n[[oops"), "line"),
    ],
)
def test_config_errors(tmp_path, capsys, text, message):
    code, _ = run(tmp_path, write(tmp_path, text))
    assert code == EXIT_CONFIG
    assert message in capsys.readouterr().err


def test_budget_guard(tmp_path, capsys):
    big = """
    seed = 0
    [grid]
    lower = -1.0
    upper = 1.0
    h = 0.00048828125
    [kernels.k]
    kind = "cz"
    [families.f]
    kind = "gaussian_pairs"
    widths = [0.5, 0.25]
    [spaces.L2]
    kind = "lebesgue"
    p = 2.0
    [spaces.L1]
    kind = "lebesgue"
    p = 1.0
    [[experiments]]
    id = "huge"
    type = "operator_norm"
    paper_anchor = "operator norm on the full grid"
    spaces = ["L2", "L2"]
    out = "L1"
    family = "f"
    operator = { kind = "kernel", kernel = "k", eps = 0.00048828125 }
    """
    cfg = write(tmp_path, big)
    code, _ = run(tmp_path, cfg)
    assert code == EXIT_CONFIG
    assert "budget" in capsys.readouterr().err
    assert main(["describe", str(cfg)]) == 0
    assert "WARNING" in capsys.readouterr().out


def test_list_and_describe(capsys):
    assert main(["run", "--list"]) == 0
    out = capsys.readouterr().out
    names = [n for n, _ in list_presets()]
    assert len(names) >= 8
    assert all(n in out for n in names)
    assert main(["describe", "weighted-bilinear-singular-commutator"]) == 0
    out = capsys.readouterr().out
    assert "family bumps" in out and "anchor:" in out


def test_unknown_preset(capsys):
    assert main(["describe", "no-such-preset"]) == EXIT_CONFIG


def test_missing_config_flag(capsys):
    assert main(["run"]) == EXIT_CONFIG


@pytest.mark.parametrize("path", sorted(preset_dir().glob("*.toml")), ids=lambda p: p.stem)
def test_presets_validate_without_provenance(path):
    raw = load_toml(path)
    validate(raw)
    assert raw.get("title")
    for e in raw["experiments"]:
        assert not NUMBERED.search(e["paper_anchor"]), e["paper_anchor"]


@pytest.mark.parametrize(
    "name",
    [p.stem for p in sorted(preset_dir().glob("*.toml")) if p.stem != "negative-controls"],
)
def test_presets_pass(tmp_path, name):
    code = main(["run", "--config", name, "--out", str(tmp_path / name)])
    assert code == 0


def test_negative_control_preset_all_fail(tmp_path):
    out = tmp_path / "neg"
    code = main(["run", "--config", "negative-controls", "--out", str(out)])
    summary = json.loads((out / "summary.json").read_text())
    assert code == len(summary["experiments"]) == summary["failed"]


def test_validate_raises_config_error():
    with pytest.raises(ConfigError):
        validate({"seed": 0})
