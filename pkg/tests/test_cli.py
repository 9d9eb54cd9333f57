import json

import pytest

from commhide.cli import main


@pytest.fixture
def dataset(tmp_path):
    from commhide.graph import generate_planted_partition
    graph, _ = generate_planted_partition([10] * 3, 0.55, 0.05, seed=2)
    path = tmp_path / "net.txt"
    path.write_text("".join(f"{u} {v}\n" for u, v in graph.sorted_edges()))
    return str(path)


def test_detect_command(dataset, capsys):
    assert main(["detect", "--dataset", dataset, "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("n=30 ")
    assert "detector=louvain" in out


def test_generate_command(tmp_path, capsys):
    out = tmp_path / "gen.txt"
    code = main(["generate", "--sizes", "6,6", "--p-in", "0.9",
                 "--p-out", "0.05", "--seed", "4", "--out", str(out)])
    assert code == 0
    assert out.exists() and (tmp_path / "gen.txt.labels").exists()
    labels = (tmp_path / "gen.txt.labels").read_text().splitlines()
    assert len(labels) == 12


def test_attack_csv_output(dataset, tmp_path):
    out = tmp_path / "res.csv"
    code = main(["attack", "--dataset", dataset, "--method", "ab",
                 "--budget", "3", "--detectors", "louvain,labelprop",
                 "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ("dataset,method,scale,detector,seed,budget,"
                        "nmi,ari,h,delta,degree_increment_pct,walltime_s")
    assert len([l for l in lines[1:] if not l.startswith("#")]) == 2


def test_attack_epa_json_output(dataset, tmp_path):
    out = tmp_path / "res.json"
    code = main(["attack", "--dataset", dataset, "--method", "epa",
                 "--budget", "4", "--population", "8", "--generations", "4",
                 "--seed", "5", "--out", str(out), "--out-format", "json"])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["rows"][0]["method"] == "epa"
    assert 1 <= payload["rows"][0]["budget"] <= 4


def test_attack_config_file(dataset, tmp_path):
    cfg = tmp_path / "exp.json"
    out = tmp_path / "out.csv"
    cfg.write_text(json.dumps({
        "dataset": {"name": "net", "path": dataset},
        "method": "random",
        "budget": 2,
        "reps": 2,
        "out": str(out),
    }))
    assert main(["attack", "--config", str(cfg)]) == 0
    body = [l for l in out.read_text().splitlines()[1:] if not l.startswith("#")]
    assert len(body) == 2


def test_attack_repeated_invocations_identical(dataset, tmp_path, capsys):
    def run():
        assert main(["attack", "--dataset", dataset, "--method", "random",
                     "--budget", "2", "--reps", "3", "--seed", "9"]) == 0
        out = capsys.readouterr().out
        # timing varies run to run; everything else must not
        return [",".join(f.split(",")[:11]) for f in out.splitlines()
                if not f.startswith("#")]
    assert run() == run()


def test_config_error_exit_code(dataset, capsys):
    assert main(["attack", "--dataset", dataset, "--method", "epa"]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["detect", "--dataset", "/nonexistent/file.txt"]) == 2
    assert main(["attack", "--method", "ab", "--budget", "1"]) == 2


def test_infeasible_exit_code(tmp_path, capsys):
    k4 = tmp_path / "k4.txt"
    k4.write_text("\n".join(f"{u} {v}" for u in range(4)
                            for v in range(u + 1, 4)))
    code = main(["attack", "--dataset", str(k4), "--method", "ab",
                 "--budget", "2"])
    assert code == 3


def test_bench_command(dataset, capsys):
    assert main(["bench", "--dataset", dataset]) == 0
    out = capsys.readouterr().out
    for det in ("louvain", "greedy", "labelprop"):
        assert det in out
