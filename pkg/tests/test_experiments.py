"""Experiment runner and CLI tests: schemas, reproducibility, artifacts."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from rgglab import cli, graphgen
from rgglab.errors import InvalidParameterError
from rgglab.experiments import (
    ExperimentConfig,
    run_experiment,
    run_id_for,
    run_sample,
    write_report,
)

from oracles import (
    BRIDGED_BLOCKS_EDGES,
    BRIDGED_BLOCKS_JUNCTIONS,
    BRIDGED_BLOCKS_N,
    FOUR_EAR_GRAPH_EDGES,
    FOUR_EAR_GRAPH_N,
)

TOP_LEVEL_KEYS = {
    "experiment",
    "run_id",
    "config",
    "prng",
    "aggregates",
    "comparisons",
    "checks_passed",
    "per_trial",
    "artifacts",
    "warnings",
    "wall_clock_seconds",
}


def small_lsd_config(**overrides):
    base = dict(
        experiment="lsd", n=150, d=40, p=0.08, trials=2, seed=5, k_max=4,
        output_dir="unused",
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_config_validation():
    with pytest.raises(InvalidParameterError):
        ExperimentConfig(experiment="nope")
    with pytest.raises(InvalidParameterError):
        ExperimentConfig(experiment="lsd", k_max=13)
    with pytest.raises(InvalidParameterError):
        ExperimentConfig.from_dict({"experiment": "lsd", "bogus": 1})
    cfg = ExperimentConfig(experiment="lsd", n=100, alpha=2.0)
    assert cfg.resolved_p() == pytest.approx(0.02)
    with pytest.raises(InvalidParameterError):
        ExperimentConfig(experiment="lsd", n=100).resolved_p()


def test_run_id_depends_on_config_and_seed():
    a = run_id_for(small_lsd_config())
    b = run_id_for(small_lsd_config())
    c = run_id_for(small_lsd_config(seed=6))
    assert a == b != c


def test_report_schema_is_stable(tmp_path):
    report = run_experiment(small_lsd_config(output_dir=str(tmp_path)))
    report.pop("_eigenvalue_rows")
    report.pop("scale")
    assert set(report.keys()) == TOP_LEVEL_KEYS
    for aggregate in report["aggregates"].values():
        assert set(aggregate.keys()) == {"mean", "se", "exact"}
        assert aggregate["se"] is not None or aggregate["exact"] or True
    for comparison in report["comparisons"]:
        assert set(comparison.keys()) == {
            "name", "observed", "reference", "tolerance", "kind", "passed",
        }
    json.dumps(report)  # fully serializable once eigenvalue rows are gone


def test_runs_are_bit_reproducible(tmp_path):
    first = run_experiment(small_lsd_config(output_dir=str(tmp_path)))
    second = run_experiment(small_lsd_config(output_dir=str(tmp_path)))
    for key in first["aggregates"]:
        assert first["aggregates"][key]["mean"] == second["aggregates"][key]["mean"]


def test_thread_count_does_not_change_results(tmp_path):
    sequential = run_experiment(small_lsd_config(trials=4, threads=1))
    threaded = run_experiment(small_lsd_config(trials=4, threads=3))
    for key in sequential["aggregates"]:
        assert sequential["aggregates"][key]["mean"] == threaded["aggregates"][key]["mean"]


def test_write_report_artifacts(tmp_path):
    config = small_lsd_config(output_dir=str(tmp_path))
    path = write_report(run_experiment(config))
    out_dir = path.parent
    assert path.name == "report.json"
    assert out_dir.name == run_id_for(config)

    eigen_lines = (out_dir / "eigenvalues.csv").read_text().splitlines()
    assert eigen_lines[0] == "index,value_adjacency,value_centered"
    assert len(eigen_lines) == 1 + config.n

    esd_lines = (out_dir / "esd.csv").read_text().splitlines()
    assert esd_lines[0] == "bin_lo,bin_hi,count,density"
    assert len(esd_lines) == 1 + config.bins

    payload = json.loads(path.read_text())
    assert payload["prng"] == {"algorithm": "pcg64", "seed": 5}
    assert "_eigenvalue_rows" not in payload
    # spectral runs carry the normalization alongside the stable base schema
    assert set(payload.keys()) == TOP_LEVEL_KEYS | {"scale"}
    assert set(payload["artifacts"]) == {"eigenvalues_csv", "esd_csv"}


def test_sparse_run_compares_both_limits():
    config = ExperimentConfig(
        experiment="moments", n=300, d=50, alpha=2.0, trials=3, seed=2, k_max=6
    )
    report = run_experiment(config)
    names = {c["name"] for c in report["comparisons"]}
    assert "moment_6_vs_sparse_limit" in names
    assert "moment_6_vs_tree_walk_limit" in names


def test_decomp_runner_on_fixture_file(tmp_path):
    edges = np.array(BRIDGED_BLOCKS_EDGES)
    adjacency = graphgen.Adjacency(n=BRIDGED_BLOCKS_N, edges=edges)
    graph_path = tmp_path / "fixture.edges"
    graphgen.save_edge_list(adjacency, graph_path)

    config = ExperimentConfig(
        experiment="decomp",
        graph_file=str(graph_path),
        walks=((0, 1, 2),),
        output_dir=str(tmp_path),
        seed=0,
    )
    report = run_experiment(config)
    payload = report["per_trial"][0]
    assert payload["junctions"] == sorted(BRIDGED_BLOCKS_JUNCTIONS)
    assert len(payload["components"]) == 2
    # each component's ear decomposition is rooted at its junction vertex
    assert sorted(c["root"] for c in payload["components"]) == sorted(
        BRIDGED_BLOCKS_JUNCTIONS
    )
    for component in payload["components"]:
        assert component["root"] in component["ears"][0]
    assert report["aggregates"]["bridges"]["mean"] == 3
    walk_stats = payload["walks"][0]
    assert walk_stats["g"] == 1 and walk_stats["c"] == 3


def test_decomp_runner_reports_four_ears(tmp_path):
    adjacency = graphgen.Adjacency(
        n=FOUR_EAR_GRAPH_N, edges=np.array([sorted(e) for e in FOUR_EAR_GRAPH_EDGES])
    )
    graph_path = tmp_path / "four_ear.edges"
    graphgen.save_edge_list(adjacency, graph_path)
    config = ExperimentConfig(
        experiment="decomp", graph_file=str(graph_path), output_dir=str(tmp_path), seed=0
    )
    report = run_experiment(config)
    component = report["per_trial"][0]["components"][0]
    assert len(component["ears"]) == 4


def test_oracle_runner_guards():
    with pytest.raises(InvalidParameterError):
        run_experiment(
            ExperimentConfig(experiment="oracle", n=9, d=10, p=0.2, walk_len=4)
        )


def test_sample_writes_metadata(tmp_path):
    config = ExperimentConfig(
        experiment="lsd", n=30, d=8, p=0.2, seed=3, output_dir=str(tmp_path)
    )
    report = run_sample(config)
    edge_path = Path(report["artifacts"]["edge_list"])
    loaded, metadata = graphgen.load_edge_list(edge_path)
    assert loaded.n == 30
    assert metadata["generator"] == "geometric"
    assert metadata["p"] == 0.2
    assert metadata["prng"] == "pcg64"
    assert 0 < metadata["tau"] < 1


def test_cap_mixing_tv_decays_and_shrinks_with_dimension():
    low = run_experiment(
        ExperimentConfig(experiment="cap_mixing", d=40, p=0.1, walkers=6000, walk_steps=2, seed=4)
    )
    high = run_experiment(
        ExperimentConfig(experiment="cap_mixing", d=400, p=0.1, walkers=6000, walk_steps=2, seed=4)
    )
    assert low["comparisons"][0]["passed"]
    assert high["aggregates"]["tv_step_2"]["mean"] < low["aggregates"]["tv_step_2"]["mean"]


def test_cap_mixing_symmetric_cap_mixes_in_two_steps():
    report = run_experiment(
        ExperimentConfig(experiment="cap_mixing", d=60, p=0.5, walkers=20000, walk_steps=2, seed=6)
    )
    # tau = 0: one step fills a hemisphere, two steps are near stationary
    assert report["aggregates"]["tv_step_2"]["mean"] <= 0.03


def test_subgraph_runner_warning_for_thin_sampling():
    report = run_experiment(
        ExperimentConfig(experiment="subgraph_prob", d=30, p=0.05, trials=1000, seed=1, cycle_len=3)
    )
    assert report["warnings"]


def test_frame_sampler_matches_direct_vector_simulation():
    # the Gram-Schmidt frame sampler must reproduce the law of pairwise
    # inner products of i.i.d. uniform sphere points
    from rgglab.experiments import _frame_inner_products
    from rgglab.rng import generator
    from rgglab import sphere

    d, count = 12, 60000
    gram = _frame_inner_products(3, d, count, generator(5))
    tau = sphere.calibrate_tau(0.2, d).tau
    frame_triangle = float(
        ((gram[:, 0, 1] >= tau) & (gram[:, 1, 2] >= tau) & (gram[:, 0, 2] >= tau)).mean()
    )

    rng = generator(99)
    hits = 0
    for _ in range(6):
        x = rng.standard_normal((10000, 3, d))
        x /= np.linalg.norm(x, axis=2, keepdims=True)
        t01 = np.einsum("bd,bd->b", x[:, 0], x[:, 1])
        t12 = np.einsum("bd,bd->b", x[:, 1], x[:, 2])
        t02 = np.einsum("bd,bd->b", x[:, 0], x[:, 2])
        hits += int(((t01 >= tau) & (t12 >= tau) & (t02 >= tau)).sum())
    direct_triangle = hits / count

    se = math.sqrt(2 * frame_triangle * (1 - frame_triangle) / count)
    assert abs(frame_triangle - direct_triangle) <= 4 * se
    # marginal of any single pair matches the cap measure
    assert abs(float((gram[:, 0, 1] >= tau).mean()) - 0.2) <= 4 * math.sqrt(0.2 * 0.8 / count)


def test_subgraph_deviation_ratio_bounded_on_grid():
    # |est - p^3| / (p^2 tau sqrt(log 1/p)) stays below a fixed constant;
    # oracle sweeps put it near 0.17
    for d in (100, 400):
        for p in (0.05, 0.15):
            report = run_experiment(
                ExperimentConfig(
                    experiment="subgraph_prob", d=d, p=p, trials=400000, seed=3, cycle_len=3
                )
            )
            ratio = report["aggregates"]["cycle_deviation_ratio"]["mean"]
            assert ratio <= 0.5, (d, p, ratio)


def test_dense_odd_moments_vanish_for_independent_edges():
    # E tr(Q^k) = 0 exactly for odd k under independent edges, so the
    # trial-averaged odd moments sit within 3 SE of zero
    report = run_experiment(
        ExperimentConfig(
            experiment="lsd", n=500, d=2, p=0.04, trials=4, seed=11,
            k_max=6, model="erdos_renyi",
        )
    )
    for k in (3, 5):
        agg = report["aggregates"][f"moment_centered_{k}"]
        assert abs(agg["mean"]) <= 3 * agg["se"], (k, agg)
    names = {c["name"]: c["passed"] for c in report["comparisons"]}
    assert names["odd_moment_3_near_zero"] and names["odd_moment_5_near_zero"]


def test_decomp_runner_on_random_tree(tmp_path):
    rng = np.random.default_rng(12)
    n = 30
    edges = np.array([[int(rng.integers(0, i)), i] for i in range(1, n)])
    adjacency = graphgen.Adjacency(n=n, edges=edges)
    path = tmp_path / "tree.edges"
    graphgen.save_edge_list(adjacency, path)
    report = run_experiment(
        ExperimentConfig(experiment="decomp", graph_file=str(path), output_dir=str(tmp_path))
    )
    assert report["aggregates"]["two_edge_connected_components"]["mean"] == 0
    assert report["aggregates"]["bridge_components"]["mean"] == 1
    assert report["per_trial"][0]["junctions"] == []


def test_second_eig_sweep_accepts_p_list():
    report = run_experiment(
        ExperimentConfig(
            experiment="second_eig_sweep", sweep_n=(60, 80), sweep_p=(0.3, 0.25),
            sweep_d=(10, 12), seed=2, ratio_lo=0.0, ratio_hi=100.0,
            slope_lo=-5.0, slope_hi=5.0,
        )
    )
    assert [row["p"] for row in report["per_trial"]] == [0.3, 0.25]


# ---------------------------------------------------------------------------
# CLI


def test_cli_oracle_pass_and_exit_codes(tmp_path, capsys):
    code = cli.main([
        "oracle", "--n", "5", "--d", "40", "--p", "0.2", "--trials", "60",
        "--walk-len", "4", "--seed", "5", "--out", str(tmp_path),
    ])
    out = capsys.readouterr().out
    assert code == 0
    assert "report:" in out and "[PASS]" in out


def test_cli_validation_error_exit_code(tmp_path, capsys):
    code = cli.main([
        "lsd", "--n", "50", "--d", "10", "--p", "1.5", "--out", str(tmp_path)
    ])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_cli_config_file_and_flag_override(tmp_path, capsys):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"n": 5, "d": 30, "p": 0.2, "trials": 40, "walk_len": 4}))
    code = cli.main([
        "oracle", "--config", str(config_path), "--seed", "9",
        "--out", str(tmp_path),
    ])
    assert code == 0
    report_dirs = [p for p in tmp_path.iterdir() if p.is_dir()]
    payload = json.loads((report_dirs[0] / "report.json").read_text())
    assert payload["config"]["n"] == 5
    assert payload["config"]["seed"] == 9


def test_cli_env_override_for_output_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RGGLAB_OUT", str(tmp_path / "env_out"))
    code = cli.main(["sample", "--n", "20", "--d", "6", "--p", "0.3", "--seed", "2"])
    assert code == 0
    assert (tmp_path / "env_out").exists()


def test_cli_env_override_for_threads(tmp_path, monkeypatch):
    monkeypatch.setenv("RGGLAB_THREADS", "2")
    code = cli.main([
        "lsd", "--n", "60", "--d", "12", "--p", "0.2", "--trials", "2",
        "--k-max", "2", "--seed", "4", "--out", str(tmp_path),
    ])
    assert code in (0, 2)  # checks may fail at toy scale; config must load
    report_dirs = [p for p in tmp_path.iterdir() if p.is_dir()]
    payload = json.loads((report_dirs[0] / "report.json").read_text())
    assert payload["config"]["threads"] == 2


def test_cli_decomp_walk_flag(tmp_path, capsys):
    adjacency = graphgen.Adjacency(n=3, edges=np.array([[0, 1], [0, 2], [1, 2]]))
    graph_path = tmp_path / "tri.edges"
    graphgen.save_edge_list(adjacency, graph_path)
    code = cli.main([
        "decomp", "--graph-file", str(graph_path), "--walk", "0,1,2",
        "--out", str(tmp_path),
    ])
    assert code == 0


def test_cli_size_guard_is_validation_error(tmp_path):
    code = cli.main([
        "oracle", "--n", "9", "--d", "10", "--p", "0.2", "--out", str(tmp_path)
    ])
    assert code == 1


def test_cli_sparse_moments_run(tmp_path, capsys):
    code = cli.main([
        "moments", "--n", "250", "--d", "40", "--alpha", "2.0", "--trials", "3",
        "--k-max", "4", "--seed", "8", "--out", str(tmp_path),
    ])
    assert code in (0, 2)
    out = capsys.readouterr().out
    assert "moment_4_vs_sparse_limit" in out
    assert "moment_4_vs_tree_walk_limit" in out


def test_cli_second_eig_sweep(tmp_path, capsys):
    config_path = tmp_path / "sweep.json"
    config_path.write_text(json.dumps({
        "p": 0.1, "sweep_n": [80, 120], "sweep_d": [8, 10],
        "ratio_lo": 0.0, "ratio_hi": 100.0, "slope_lo": -5.0, "slope_hi": 5.0,
    }))
    code = cli.main([
        "second-eig", "--config", str(config_path), "--seed", "4", "--out", str(tmp_path)
    ])
    assert code == 0
    run_dirs = [p for p in tmp_path.iterdir() if p.is_dir()]
    sweep_csv = run_dirs[0] / "sweep.csv"
    lines = sweep_csv.read_text().splitlines()
    assert lines[0].startswith("n,d,p,tau,np,lambda_second")
    assert len(lines) == 3
