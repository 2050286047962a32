import json

import pytest

from loopmodels.cli import ExperimentSpec, _expand, main, run, validate


def _write(tmp_path, spec):
    p = tmp_path / "spec.json"
    p.write_text(spec.to_json())
    return str(p)


def test_validation_examples():
    assert validate(ExperimentSpec("spectrum", {"p_list": [0.1, 0.7]})) == [
        "p_list: p = 0.7 outside [0, 1/2]"]
    d = validate(ExperimentSpec("kitaev-mc", {"sizes": [[5, 6]], "t_ext_grid": [0.8]}))
    assert any("multiple of 6" in x for x in d)
    ok = ExperimentSpec("mc-scan", {"lattice": "honeycomb", "N": 1, "t_grid": [0.5, 0.6],
                                    "sizes": [[4, 4]]})
    assert validate(ok) == []


def test_validation_collects_everything():
    spec = ExperimentSpec("mc-scan", {"t_grid": [1.5], "sizes": [], "p": 0.9}, workers=0)
    assert len(validate(spec)) >= 4
    assert validate(ExperimentSpec("teleport")) and "unknown command" in validate(ExperimentSpec("teleport"))[0]


def test_spec_roundtrip():
    spec = ExperimentSpec("mc-scan", {"t_grid": [0.5], "sizes": [[4, 4]], "N": 1.5}, out="x",
                          seed=17, seed_policy="fixed", workers=3)
    assert ExperimentSpec.from_json(spec.to_json()) == spec
    with pytest.raises(ValueError):
        ExperimentSpec.from_json('{"command": "mc-scan", "colour": "red"}')


def test_seeds_distinct_per_task():
    spec = ExperimentSpec("mc-scan", {"t_grid": [0.5, 0.55, 0.6], "sizes": [[4, 4], [6, 6]]}, seed=3)
    seeds = [t["seed"] for t in _expand(spec)]
    assert len(seeds) == 6 and len(set(seeds)) == 6
    fixed = ExperimentSpec("mc-scan", spec.params, seed=3, seed_policy="fixed")
    assert {t["seed"] for t in _expand(fixed)} == {3}


def test_oracle_check_run(tmp_path):
    out = tmp_path / "o"
    code = main(["--spec", _write(tmp_path, ExperimentSpec("oracle-check")), "--out", str(out)])
    assert code == 0
    rows = json.loads((out / "results.json").read_text())
    assert {r["mapping"] for r in rows} >= {"ising-dual", "rbim", "face-cubic", "mixed-cubic"}
    assert all(r["relative_error"] < 1e-10 for r in rows)
    man = json.loads((out / "manifest.json").read_text())
    assert man["n_failed"] == 0 and all("wall_time" in t for t in man["tasks"])


def test_mc_scan_reproducible(tmp_path):
    spec = ExperimentSpec("mc-scan", {"lattice": "honeycomb", "N": 1, "t_grid": [0.5, 0.6],
                                      "sizes": [[4, 4], [6, 6]], "eq_sweeps": 100,
                                      "measure_sweeps": 300}, seed=5)
    texts = []
    for k in range(2):
        spec.out = str(tmp_path / f"run{k}")
        assert run(spec) == 0
        texts.append((tmp_path / f"run{k}" / "results.csv").read_text())
    assert texts[0] == texts[1]
    lines = texts[0].splitlines()
    assert lines[0] == "#schema=1"
    assert lines[1].split(",") == ["lattice", "N", "t", "size_x", "size_y", "seed", "mean_length",
                                   "var_length_norm", "binder_Q", "q_err", "acceptance"]
    assert len(lines) == 2 + 4
    assert (tmp_path / "run0" / "crossings.json").exists()


def test_invalid_spec_exit_code(tmp_path):
    spec = ExperimentSpec("spectrum", {"p_list": [0.7]}, out=str(tmp_path / "bad"))
    assert main(["--spec", _write(tmp_path, spec), "--validate-only"]) == 2
    assert main(["--spec", _write(tmp_path, spec)]) == 2
    assert not (tmp_path / "bad").exists()


def test_validate_only_good(tmp_path):
    spec = ExperimentSpec("spectrum", {"p_list": [0.1]}, out=str(tmp_path / "never"))
    assert main(["--spec", _write(tmp_path, spec), "--validate-only"]) == 0
    assert not (tmp_path / "never").exists()


def test_partial_failure_exit_code(tmp_path):
    # Z3 has no order-two element, so the single task fails at run time
    spec = ExperimentSpec("qd-overlap", {"group": "Z3", "g": "1", "nx": 3, "ny": 3},
                          out=str(tmp_path / "qd"))
    assert run(spec) == 3
    man = json.loads((tmp_path / "qd" / "manifest.json").read_text())
    assert man["n_failed"] == 1 and "error" in man["tasks"][0]


def test_other_commands(tmp_path):
    for spec in (ExperimentSpec("qd-overlap", {"nx": 3, "ny": 4}),
                 ExperimentSpec("spectrum", {"p_list": [0.0, 0.25]}),
                 ExperimentSpec("fidelity-check", {"n_instances": 5}),
                 ExperimentSpec("weight-table", {"lx": 6, "ly": 4, "max_faces": 3})):
        spec.out = str(tmp_path / spec.command)
        assert run(spec) == 0, spec.command
