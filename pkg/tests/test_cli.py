import filecmp
import json

import pytest

from hardy_fundsol import cli


def write_config(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data, indent=1))
    return str(path)


def base_config(**overrides):
    data = {
        "dimension": 3,
        "mu": 0.1875,
        "potential": {"kind": "inverse_square"},
    }
    data.update(overrides)
    return data


def run(sub, cfg_path, out_dir, *extra):
    return cli.main([sub, "--config", cfg_path, "--out", str(out_dir),
                     *extra])


def test_solve_model_report(tmp_path):
    cfg = write_config(tmp_path, "m.json", base_config())
    code = run("solve", cfg, tmp_path / "out")
    assert code == 0
    doc = json.loads((tmp_path / "out" / "report.json").read_text())
    res = doc["results"]
    assert res["verdict"] == "converged"
    assert abs(float(res["k_estimate"]) - 1.0) < 1e-6
    assert abs(float(res["origin_exponent"]) + 0.75) < 1e-8
    assert doc["provenance"]["artifact_version"]
    with open(tmp_path / "out" / "solution.csv") as fh:
        header = fh.readline().strip()
    assert header == "r,u,phi_mu,gamma_mu,ratio_u_phi"


def test_solve_determinism(tmp_path):
    cfg = write_config(tmp_path, "m.json",
                       base_config(potential={"kind": "vrho", "rho": 1.2}))
    assert run("solve", cfg, tmp_path / "a") == 0
    assert run("solve", cfg, tmp_path / "b") == 0
    for name in ("report.json", "report.txt", "solution.csv"):
        assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name,
                           shallow=False), f"{name} differs between runs"


def test_missing_mu_names_field(tmp_path, capsys):
    cfg = write_config(tmp_path, "bad.json",
                       {"dimension": 3,
                        "potential": {"kind": "inverse_square"}})
    code = run("solve", cfg, tmp_path / "out")
    assert code == 1
    err = capsys.readouterr().err
    assert "mu" in err


def test_threshold_inverted_bracket(tmp_path, capsys):
    cfg = write_config(
        tmp_path, "t.json",
        base_config(threshold={"bracket": [9.0, 1.05], "tol": 1e-3}))
    code = run("threshold", cfg, tmp_path / "out")
    assert code == 1
    assert "BracketInvalid" in capsys.readouterr().err


def test_verify_critical_coupling_notes_sign_change(tmp_path):
    cfg = write_config(tmp_path, "v.json", base_config(mu=0.25))
    code = run("verify", cfg, tmp_path / "out")
    assert code == 0
    doc = json.loads((tmp_path / "out" / "report.json").read_text())
    assert "sign" in doc["results"]["note"]
    masses = doc["results"]["masses"]
    assert all(abs(float(m["k_estimate"]) - 1.0) < 1e-5 for m in masses)


def test_plots_emitted_on_request(tmp_path):
    cfg = write_config(tmp_path, "m.json", base_config())
    assert run("solve", cfg, tmp_path / "out", "--plots") == 0
    assert (tmp_path / "out" / "profiles.svg").exists()


def test_exit_code_corpus(tmp_path):
    """Exit-code contract over a 12-config corpus."""
    corpus = []

    def case(name, sub, data, expected):
        corpus.append((name, sub, data, expected))

    case("solve-model", "solve", base_config(), 0)
    case("solve-vrho", "solve",
         base_config(potential={"kind": "vrho", "rho": 1.2}), 0)
    case("solve-breakdown", "solve",
         base_config(potential={"kind": "vrho", "rho": 9.0}), 2)
    case("verify-model", "verify", base_config(), 0)
    case("verify-critical", "verify", base_config(mu=0.25), 0)
    case("certify-exist-ok", "certify-exist",
         base_config(potential={"kind": "vrho", "rho": 1.2},
                     certify_exist={"variant": "subcritical",
                                    "mu_prime": 0.23}), 0)
    case("certify-exist-inadmissible", "certify-exist",
         base_config(potential={"kind": "vrho", "rho": 1.2},
                     certify_exist={"variant": "subcritical",
                                    "mu_prime": 0.2249}), 1)
    case("certify-nonexist-fires", "certify-nonexist",
         base_config(certify_nonexist={"beta": 9.0, "epsilon": 0.1}), 0)
    case("certify-nonexist-small-beta", "certify-nonexist",
         base_config(certify_nonexist={"beta": 1.01}), 2)
    case("threshold-bad-bracket", "threshold",
         base_config(threshold={"bracket": [2.0, 2.0], "tol": 1e-3}), 1)
    case("config-missing-mu", "solve",
         {"dimension": 3, "potential": {"kind": "inverse_square"}}, 1)
    case("iterate-vrho", "iterate",
         base_config(potential={"kind": "vrho", "rho": 1.2}), 0)

    assert len(corpus) == 12
    for name, sub, data, expected in corpus:
        cfg = write_config(tmp_path, f"{name}.json", data)
        code = run(sub, cfg, tmp_path / f"out-{name}")
        assert code == expected, f"{name}: expected exit {expected}, got {code}"


def test_certify_barrier_variant(tmp_path):
    cfg = write_config(
        tmp_path, "b.json",
        base_config(certify_exist={"variant": "barrier", "c5": 0.0}))
    assert run("certify-exist", cfg, tmp_path / "out") == 0


def test_threshold_small_run(tmp_path):
    cfg = write_config(
        tmp_path, "t.json",
        base_config(threshold={"bracket": [1.05, 9.0], "tol": 0.05,
                               "numeric_budget": 4}))
    assert run("threshold", cfg, tmp_path / "out") == 0
    doc = json.loads((tmp_path / "out" / "report.json").read_text())
    res = doc["results"]
    assert float(res["rho_lo"]) >= 4 / 3 - 0.05
    assert float(res["rho_lo"]) < float(res["rho_hi"])


def test_solve_zero_mass(tmp_path):
    cfg = write_config(tmp_path, "z.json", base_config(k=0.0))
    assert run("solve", cfg, tmp_path / "out") == 0
    doc = json.loads((tmp_path / "out" / "report.json").read_text())
    assert "zero mass" in doc["results"]["note"]


def test_bad_schedule_rejected_at_config_time(tmp_path, capsys):
    cfg = write_config(tmp_path, "s.json",
                       base_config(r_schedule=[10.0, 5.0, 100.0]))
    assert run("solve", cfg, tmp_path / "out") == 1
    assert "r_schedule" in capsys.readouterr().err
    cfg = write_config(tmp_path, "p.json",
                       base_config(probe_r=50.0))
    assert run("solve", cfg, tmp_path / "out2") == 1
    assert "probe_r" in capsys.readouterr().err


def test_threads_env_caps_pool(tmp_path, monkeypatch):
    monkeypatch.setenv("HARDY_FUNDSOL_THREADS", "1")
    from hardy_fundsol.config import worker_count
    assert worker_count() == 1
    cfg = write_config(tmp_path, "v.json", base_config())
    assert run("verify", cfg, tmp_path / "out") == 0
    monkeypatch.setenv("HARDY_FUNDSOL_THREADS", "not-a-number")
    assert run("verify", cfg, tmp_path / "out2") == 1


def test_unknown_backend_env_rejected(monkeypatch):
    import importlib
    monkeypatch.setenv("HARDY_FUNDSOL_BACKEND", "fortran")
    import hardy_fundsol.backend as backend
    with pytest.raises(ValueError):
        importlib.reload(backend)
    monkeypatch.delenv("HARDY_FUNDSOL_BACKEND")
    importlib.reload(backend)
