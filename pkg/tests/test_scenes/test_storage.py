import json
import shutil
import tempfile
import unittest
from pathlib import Path

from gwm_segment.errors import IoFailure, ValidationError
from gwm_segment.scenes.generator import generate
from gwm_segment.scenes.presets import preset
from gwm_segment.scenes.storage import SceneDirectory, load_scene, save_scene, scene_document


class TestSceneStorage(unittest.TestCase):
    def setUp(self):
        self.tmpdir = Path(tempfile.mkdtemp())
        self.scene = generate(preset("two-sprites", 2))

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def test_save_and_load(self):
        layout = save_scene(self.scene, self.tmpdir / "scene")
        for t in range(self.scene.frames):
            for path in (layout.frame_path(t), layout.flow_path(t), layout.gt_path(t), layout.fg_path(t)):
                self.assertTrue(path.exists(), path)
        loaded = load_scene(self.tmpdir / "scene")
        self.assertEqual(loaded, self.scene)
        self.assertEqual(loaded.placements, self.scene.placements)

    def test_document(self):
        payload = scene_document(self.scene)
        self.assertEqual(payload["schema_version"], 1)
        self.assertEqual(payload["seed"], 2)
        self.assertEqual(payload["frames"], 4)
        self.assertEqual(len(payload["placements"]), 2)
        self.assertEqual(payload["spec"]["name"], "two-sprites")

    def test_file_names(self):
        layout = SceneDirectory(self.tmpdir)
        self.assertEqual(layout.frame_path(3).name, "frame_0003.ppm")
        self.assertEqual(layout.flow_path(12).name, "flow_0012.flo")

    def test_missing_directory(self):
        with self.assertRaises(IoFailure):
            load_scene(self.tmpdir / "missing")

    def test_unsupported_schema(self):
        save_scene(self.scene, self.tmpdir / "scene")
        scene_file = self.tmpdir / "scene" / "scene.json"
        payload = json.loads(scene_file.read_text(encoding="utf-8"))
        payload["schema_version"] = 99
        scene_file.write_text(json.dumps(payload), encoding="utf-8")
        with self.assertRaises(ValidationError):
            load_scene(self.tmpdir / "scene")

    def test_corrupt_json(self):
        directory = self.tmpdir / "bad"
        directory.mkdir()
        (directory / "scene.json").write_text("{not json", encoding="utf-8")
        with self.assertRaises(ValidationError):
            load_scene(directory)


if __name__ == "__main__":
    unittest.main()
