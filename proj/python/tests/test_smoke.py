# Copyright 2026 The iltm Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Smoke tests for the Python bindings."""

import numpy as np
import pytest

import iltm


def write_task(directory, name, n, d, seed, regression=False):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    if regression:
        y = X @ rng.normal(size=d) + 0.1 * rng.normal(size=n)
        target = "y,regression_target"
        labels = [repr(float(v)) for v in y]
    else:
        y = (X[:, 0] + X[:, 1] > 0).astype(int)
        target = "y,class_target,neg,pos"
        labels = ["pos" if v else "neg" for v in y]
    cols = [f"x{i}" for i in range(d)]
    (directory / f"{name}.schema").write_text(
        "".join(f"{c},numeric\n" for c in cols) + target + "\n"
    )
    lines = [",".join(cols + ["y"])]
    lines += [",".join([repr(float(v)) for v in row] + [lab]) for row, lab in zip(X, labels)]
    (directory / f"{name}.csv").write_text("\n".join(lines) + "\n")
    order = rng.permutation(n)
    cut1, cut2 = int(0.6 * n), int(0.8 * n)
    for split, idx in (("train", order[:cut1]), ("val", order[cut1:cut2]), ("test", order[cut2:])):
        (directory / f"{name}.{split}").write_text("".join(f"{i}\n" for i in sorted(idx)))
    return directory / f"{name}.csv", X


SMALL = {
    "d_main": "8",
    "hidden": "16",
    "random_features": "64",
    "gbdt_rounds": "5",
    "accumulation": "2",
    "batch_gen": "64",
    "batch_grad": "64",
}

FIT = {"n_ens": "2", "finetune_steps": "5", "gbdt_rounds": "5", "batch": "64", "random_features": "64"}


@pytest.fixture(scope="module")
def checkpoint(tmp_path_factory):
    root = tmp_path_factory.mktemp("meta")
    (root / "train").mkdir()
    (root / "val").mkdir()
    for i in range(3):
        write_task(root / "train", f"t{i}", 150, 4 + i, i)
    write_task(root / "val", "v0", 150, 5, 10)
    settings = dict(SMALL, train_dir=str(root / "train"), val_dir=str(root / "val"),
                    build_cache="true", max_steps="4", val_period="2", out=str(root / "out"))
    log = iltm.run_command("meta-train", settings)
    assert "best checkpoint:" in log
    return root / "out" / "final.iltm"


def test_module_surface():
    assert iltm.__version__
    assert set(iltm.command_names()) == {
        "meta-train", "fit-predict", "evaluate", "dedupe", "gradcheck", "hpo-sample", "build-cache"}
    keys = iltm.command_keys("meta-train")
    assert keys["accumulation"] == "40"
    assert keys["batch_gen"] == "2048"


def test_hyperparams_and_names():
    d = iltm.default_hyperparams()
    assert d["preprocessing"] == "RX" and d["n_ens"] == "8"
    assert d["alpha"] == "0.5" and d["tau"] == "2"
    assert iltm.sample_hyperparams(5) == iltm.sample_hyperparams(5)
    assert iltm.levenshtein_similarity("kitten", "sitting") == pytest.approx(4 / 7, abs=1e-15)
    assert iltm.token_sort_ratio("heart disease", "disease heart") == 1.0
    assert iltm.sanitize_name("Heart  Disease!!") == "heart-disease"
    assert iltm.clean_keywords("airlines_small_2016_processed") == "airlines"


def test_gradcheck():
    assert iltm.gradcheck()["passed"]
    assert not iltm.gradcheck(mutate_relu=True)["passed"]


def test_errors_map_to_exceptions(tmp_path):
    with pytest.raises(iltm.ConfigError):
        iltm.run_command("hpo-sample", {"bogus": "1"})
    with pytest.raises(iltm.DataError):
        iltm.Model.fit(str(tmp_path / "none.iltm"), str(tmp_path / "none.csv"))


def test_fit_predict_round_trip(checkpoint, tmp_path):
    csv, X = write_task(tmp_path, "cls", 200, 4, 3)
    model = iltm.Model.fit(str(checkpoint), str(csv), FIT)
    assert model.n_classes == 2 and model.n_members == 2
    P = model.predict(X)
    assert P.shape == (200, 2)
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)
    ev = model.evaluate(str(csv))
    assert ev["metric"] == "auc" and 0.0 <= ev["value"] <= 1.0
    path = tmp_path / "model.iltm"
    model.save(str(path))
    again = iltm.Model.load(str(path))
    np.testing.assert_array_equal(again.predict(X), P)
    with pytest.raises(iltm.DataError):
        model.predict(X[:, :3])


def test_regression_fit(checkpoint, tmp_path):
    csv, X = write_task(tmp_path, "reg", 200, 3, 4, regression=True)
    model = iltm.Model.fit(str(checkpoint), str(csv), FIT)
    assert model.n_classes == 0
    assert model.predict(X).shape == (200, 1)
    assert model.evaluate(str(csv))["metric"] == "rmse"
