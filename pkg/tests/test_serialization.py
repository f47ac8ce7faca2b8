import json

import numpy as np
import pytest

from seroclass.classification.rules import ClassificationRule, Weights
from seroclass.classification.serialization import (
    label_summary,
    labels_frame,
    load_rule,
    rule_to_dict,
    save_rule,
)
from seroclass.core.params import QuadratureScheme, QuadratureSpec
from seroclass.models.density import gridded_density
from seroclass.models.serialization import load_density, save_density
from seroclass.utils.exceptions import (
    InvalidConfigException,
    MissingInputException,
    ReplayMismatchException,
)
from seroclass.utils.manifest import (
    RunManifest,
    default_manifest_path,
    digests,
    file_digest,
    read_manifest,
    write_manifest,
)

POINTS = np.array([[0.5, 0.4], [3.4, 3.2], [2.0, 1.0]])


class TestDensityFiles:
    def test_parametric(self, tmp_path, pos_density):
        path = str(tmp_path / "pos.json")
        save_density(pos_density, path)
        loaded = load_density(path)
        assert loaded.params == pos_density.params
        assert loaded.norm_const == pos_density.norm_const
        assert loaded.domain == pos_density.domain
        assert np.array_equal(loaded(POINTS[:, 0], POINTS[:, 1]), pos_density(POINTS[:, 0], POINTS[:, 1]))

    def test_gridded_values_go_to_a_sidecar(self, tmp_path):
        values = np.arange(256, dtype=float).reshape(16, 16)
        density = gridded_density(values)
        path = str(tmp_path / "grid.json")
        save_density(density, path)

        assert (tmp_path / "grid.values.csv").exists()
        assert json.loads((tmp_path / "grid.json").read_text())["values_csv"] == "grid.values.csv"
        loaded = load_density(path)
        assert np.allclose(loaded.grid_values, density.grid_values, rtol=1e-12, atol=0.0)
        quad = QuadratureSpec(16, QuadratureScheme.TENSOR_MIDPOINT)
        assert loaded.mass(quad) == pytest.approx(1.0)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingInputException):
            load_density(str(tmp_path / "none.json"))

    @pytest.mark.parametrize("content", ["{", json.dumps({"family": "negative"})])
    def test_malformed(self, tmp_path, content):
        path = tmp_path / "bad.json"
        path.write_text(content)
        with pytest.raises(InvalidConfigException):
            load_density(str(path))

    def test_wrong_sidecar_size(self, tmp_path):
        path = str(tmp_path / "grid.json")
        save_density(gridded_density(np.ones((16, 16))), path)
        sidecar = tmp_path / "grid.values.csv"
        sidecar.write_text("\n".join(sidecar.read_text().splitlines()[:-3]) + "\n")
        with pytest.raises(InvalidConfigException):
            load_density(path)


class TestRuleDocuments:
    def test_binary(self, tmp_path, model_files, densities):
        rule = ClassificationRule.binary(*densities, 0.1, Weights(w_fp=2.0, w_fn=1.0))
        path = str(tmp_path / "rule.json")
        save_rule(rule, path, "pos.json", "neg.json")
        loaded = load_rule(path)
        assert loaded.prevalence == 0.1
        assert loaded.weights == rule.weights
        assert np.array_equal(loaded.label_codes(POINTS), rule.label_codes(POINTS))

    def test_ternary(self, tmp_path, model_files, densities):
        rule = ClassificationRule.ternary(*densities, (0.01, 0.9))
        document = rule_to_dict(rule, "pos.json", "neg.json")
        assert document["interval"] == {"p_lo": 0.01, "p_hi": 0.9}
        assert "prevalence" not in document
        path = str(tmp_path / "rule.json")
        save_rule(rule, path, "pos.json", "neg.json")
        assert load_rule(path).interval == rule.interval

    def test_unknown_kind(self, tmp_path, model_files):
        path = tmp_path / "rule.json"
        path.write_text(json.dumps({"kind": "quaternary", "pos_density": "pos.json", "neg_density": "neg.json"}))
        with pytest.raises(InvalidConfigException):
            load_rule(str(path))

    def test_missing(self, tmp_path):
        with pytest.raises(MissingInputException):
            load_rule(str(tmp_path / "rule.json"))


class TestLabelTables:
    def test_frame(self):
        frame = labels_frame(["a", "b", "c"], np.array([1, -1, 0]), np.array([2.0, -1.5, 0.0]))
        assert frame["label"].tolist() == ["positive", "negative", "holdout"]
        assert frame["score"].tolist() == [2.0, -1.5, 0.0]

    def test_summary(self):
        assert label_summary(np.array([1, 1, -1, 0, -1, -1])) == {"positive": 2, "negative": 3, "holdout": 1}


class TestManifest:
    def test_digest(self, tmp_path):
        path = tmp_path / "a.txt"
        path.write_bytes(b"abc")
        assert file_digest(str(path)) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        with pytest.raises(MissingInputException):
            file_digest(str(tmp_path / "b.txt"))

    def test_round_trip_and_verify(self, tmp_path):
        output = tmp_path / "out.csv"
        output.write_text("x\n1\n")
        manifest = RunManifest("sweep", {"true_p": 0.1}, 3, outputs=digests([str(output)]), version="1.0")
        path = default_manifest_path(str(output))
        assert path == str(tmp_path / "out.manifest.json")
        write_manifest(manifest, path)
        loaded = read_manifest(path)
        assert loaded == manifest
        loaded.verify_outputs()

        output.write_text("x\n2\n")
        with pytest.raises(ReplayMismatchException) as e:
            loaded.verify_outputs()
        assert e.value.mismatched == [str(output)]

    def test_identical_runs_write_identical_manifests(self, tmp_path):
        manifest = RunManifest("sweep", {"true_p": 0.1}, None)
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        write_manifest(manifest, str(first))
        write_manifest(manifest, str(second))
        assert first.read_bytes() == second.read_bytes()

    def test_malformed(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"command": "sweep"}))
        with pytest.raises(InvalidConfigException):
            read_manifest(str(path))
