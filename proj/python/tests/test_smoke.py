"""End-to-end smoke tests for the python module and the CLI binary."""

import os
import subprocess

import pytest

import ntrack


def test_version_is_exposed():
    assert isinstance(ntrack.__version__, str)
    assert ntrack.__version__


def test_search_finds_both_triangles():
    g = ntrack.Hypergraph(6, [1, 1])
    for v in range(6):
        g.add_edge([v], [0.1])
    for base in (0, 3):
        for i in range(3):
            for j in range(i + 1, 3):
                g.add_edge([base + i, base + j], [1.0])
    structures, all_converged = ntrack.search_all(g, [[1.0], [1.0]])
    assert all_converged
    supports = sorted(tuple(s["support"]) for s in structures)
    assert supports == [(0, 1, 2), (3, 4, 5)]
    assert structures[0]["theta"] == pytest.approx(
        ntrack.support_objective(g, [[1.0], [1.0]], [0, 1, 2])
    )


def test_duplicate_edges_are_rejected():
    g = ntrack.Hypergraph(3, [1, 1])
    assert g.add_edge([0, 1], [0.5])
    assert not g.add_edge([1, 0], [0.9])  # same canonical tuple
    assert g.edge_count(2) == 1
    with pytest.raises(ntrack.ValidationError):
        g.add_edge([0, 7], [0.5])  # node out of range


def test_local_maximizer_reports_support_and_state():
    g = ntrack.Hypergraph(4, [1, 1])
    for v in range(4):
        g.add_edge([v], [0.1])
    for i in range(4):
        for j in range(i + 1, 4):
            g.add_edge([i, j], [1.0])
    r = ntrack.local_maximizer(g, [[1.0], [1.0]], start=0)
    assert r["converged"] and r["feasible"]
    assert r["support"] == [0, 1, 2, 3]
    assert sum(r["y"]) == pytest.approx(1.0)


def test_track_and_evaluate_synthetic_scenario():
    sc = ntrack.synthesize("cross2", seed=1)
    rows, all_converged = ntrack.track(
        sc["detections"],
        points=sc["trajectories"],
        embeddings=sc["embeddings"],
    )
    assert all_converged
    assert rows, "tracker produced no output"
    report = ntrack.evaluate(rows, sc["ground_truth"])
    assert report["mota"] >= 0.9
    assert report["ids"] <= 2


def test_training_on_separable_clusters():
    g = ntrack.Hypergraph(8, [1, 3])
    for v in range(8):
        g.add_edge([v], [0.5])
    for i in range(8):
        for j in range(i + 1, 8):
            same = (i < 4) == (j < 4)
            g.add_edge([i, j], [0.1, 0.9 if same else 0.05, 0.1])
    labels = [1, 1, 1, 1, 2, 2, 2, 2]
    result = ntrack.train_weights([(g, labels)], C=1e6, qp_gap=1e-12)
    assert result["converged"]
    assert result["total_slack"] <= 1e-3
    star = ntrack.structured_score(result["weights"], labels, g)
    merged = ntrack.structured_score(result["weights"], [1] * 8, g)
    assert merged < star


def test_default_weights_shape():
    w = ntrack.default_weights()
    assert [len(row) for row in w] == [1, 3, 1, 1]


@pytest.fixture
def cli():
    path = os.environ.get("NTRACK_CLI")
    if not path or not os.path.exists(path):
        pytest.skip("NTRACK_CLI not set")
    return path


def test_cli_usage_error_exits_2(cli):
    proc = subprocess.run(
        [cli, "track", "--out", "/tmp/unused.csv"],  # --det is required
        capture_output=True,
    )
    assert proc.returncode == 2


def test_cli_missing_input_exits_3(cli, tmp_path):
    proc = subprocess.run(
        [
            cli,
            "track",
            "--det",
            str(tmp_path / "missing.txt"),
            "--out",
            str(tmp_path / "res.csv"),
        ],
        capture_output=True,
    )
    assert proc.returncode == 3


def test_cli_malformed_input_exits_3(cli, tmp_path):
    bad = tmp_path / "det.txt"
    bad.write_text("1,1,not,a,number,0,0,-1,-1,-1\n")
    proc = subprocess.run(
        [cli, "track", "--det", str(bad), "--out", str(tmp_path / "res.csv")],
        capture_output=True,
    )
    assert proc.returncode == 3


def test_cli_round_trip_matches_library(cli, tmp_path):
    out = tmp_path / "synth"
    subprocess.run(
        [cli, "synth", "--scenario", "parallel2", "--seed", "5",
         "--out-dir", str(out)],
        check=True,
        capture_output=True,
    )
    res = tmp_path / "res.csv"
    subprocess.run(
        [cli, "track", "--det", str(out / "det.txt"), "--emb",
         str(out / "emb.bin"), "--pts", str(out / "pts.txt"),
         "--out", str(res)],
        check=True,
        capture_output=True,
    )
    report = tmp_path / "report.json"
    subprocess.run(
        [cli, "eval", "--results", str(res), "--gt", str(out / "gt.txt"),
         "--report", str(report)],
        check=True,
        capture_output=True,
    )
    assert report.exists() and report.stat().st_size > 0
