import math
import os
from pathlib import Path

import numpy as np
import pytest

import pairstab

CONFIGS = Path(os.environ.get("PAIRSTAB_CONFIGS", Path(__file__).resolve().parents[2] / "configs"))


def test_synthetic_dataset_shape_and_determinism():
    a = pairstab.make_synthetic("gauss-linear", 30, 4, 0.5, 7)
    b = pairstab.make_synthetic("gauss-linear", 30, 4, 0.5, 7)
    assert (a.n, a.d) == (30, 4)
    assert a.features.shape == (30, 4)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)
    assert np.all(np.linalg.norm(a.features, axis=1) <= a.feature_bound + 1e-12)


def test_dataset_save_load(tmp_path):
    a = pairstab.make_synthetic("imbalanced-auc", 20, 3, 0.1, 3)
    a.save(str(tmp_path / "d.txt"))
    b = pairstab.load_dataset(str(tmp_path / "d.txt"))
    assert np.array_equal(a.features, b.features)


def test_recipe():
    assert pairstab.recipe("sgd", "smooth", 100, 0.07)[0] == 7
    T, eta = pairstab.recipe("sgda", "nonsmooth", 10, 1.0)
    assert T == 100
    assert eta == pytest.approx(100 ** -0.75)


def test_kl_against_numpy():
    rng = np.random.default_rng(0)
    n = 5
    W = rng.random((n, n))
    np.fill_diagonal(W, 0.0)
    Q = W / W.sum()
    P = np.full((n, n), 1.0 / (n * (n - 1)))
    np.fill_diagonal(P, 0.0)
    mask = Q > 0
    expected = float(np.sum(Q[mask] * np.log(Q[mask] / P[mask])))
    assert pairstab.kl_step(W.tolist()) == pytest.approx(expected, rel=1e-12)
    assert pairstab.kl_step(P.tolist()) == pytest.approx(0.0, abs=1e-15)
    renyi = float(np.sum(Q[mask] ** 6 / P[mask] ** 5))
    assert pairstab.renyi_moment6(W.tolist()) == pytest.approx(renyi, rel=1e-12)


def test_sample_trajectory_pairs():
    traj = pairstab.sample_trajectory(6, 200, 9)
    assert len(traj) == 200
    assert all(1 <= i <= 6 and 1 <= j <= 6 and i != j for i, j in traj)
    assert traj == pairstab.sample_trajectory(6, 200, 9)


def test_chernoff_and_coefficients():
    assert pairstab.chernoff_occupancy_bound(100, 10, 0.05) == pytest.approx(39.85622568683641, rel=1e-12)
    c = pairstab.stability_coefficients("sgd-smooth", L=1.0, alpha=0.25, eta=0.1, t=10, n=10)
    assert c["c1"] > 0 and c["c2"] > 0
    with pytest.raises(pairstab.PairstabError) as err:
        pairstab.stability_coefficients("sgd-smooth", L=1.0, eta=0.1, t=10, n=10)
    assert err.value.args[0] == "missing-alpha"


def test_bound_main_term():
    b = pairstab.pacbayes_bound(kl=0.0, log_renyi6=0.0, delta=0.005, delta_prime=math.exp(-3), c1=0.01, c2=0.001, n=100)
    assert b["lambda"] == pytest.approx(min(b["lambda_stability"], b["lambda_moment"]))
    assert b["main_term"] == pytest.approx(6.0 / b["lambda"], rel=1e-12)
    assert b["total"] == pytest.approx(b["main_term"] + b["residual_term"])


def test_u_statistic_and_block_identity():
    rng = np.random.default_rng(1)
    K = rng.random((6, 6))
    off = ~np.eye(6, dtype=bool)
    assert pairstab.u_statistic(K) == pytest.approx(K[off].mean(), rel=1e-14)
    assert abs(pairstab.block_risk_identity_check(K)) < 1e-12


def test_run_commands(tmp_path):
    res = pairstab.run("train", CONFIGS / "train_smoke.cfg", {"out": tmp_path / "train"})
    assert res["status"] == 0
    assert any(f.endswith(".txt") or f.endswith(".run") for f in res["files"])
    again = pairstab.run("train", CONFIGS / "train_smoke.cfg", {"out": tmp_path / "train2"})
    assert again["config_hash"] == res["config_hash"]

    ch = pairstab.run("chernoff", CONFIGS / "chernoff.cfg", {"out": tmp_path / "ch", "chernoff.trials": 500})
    assert ch["status"] == 0


def test_run_command_config_error(tmp_path):
    with pytest.raises(pairstab.PairstabError) as err:
        pairstab.run_command("train", "seed = 1\nnot.a.key = 3\n", {"out": str(tmp_path)})
    assert err.value.args[0] == "config-error"
