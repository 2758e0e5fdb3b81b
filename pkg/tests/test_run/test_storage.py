import shutil
import tempfile
import unittest
from pathlib import Path

import numpy as np

from gwm_segment.errors import IoFailure, ValidationError
from gwm_segment.flowfield.containers import LabelMap
from gwm_segment.flowfield.io import read_pgm
from gwm_segment.motion.energy import SoftMasks
from gwm_segment.run.storage import RunDirectory


class TestRunDirectory(unittest.TestCase):
    def setUp(self):
        self.tmpdir = Path(tempfile.mkdtemp())
        self.run_dir = RunDirectory(self.tmpdir / "run")
        rng = np.random.default_rng(0)
        self.masks = [SoftMasks.from_logits(rng.standard_normal((5, 6, 3))) for _ in range(2)]

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def test_save_frames_and_load_masks(self):
        self.run_dir.ensure_directories()
        for t, masks in enumerate(self.masks):
            self.run_dir.save_frame(t, masks, LabelMap(masks.argmax().data == 1))
        loaded = self.run_dir.load_masks()
        self.assertEqual(len(loaded), 2)
        for original, back in zip(self.masks, loaded):
            np.testing.assert_array_equal(original.probs, back.probs)
        components = read_pgm(self.run_dir.components_path(0), num_labels=2)
        self.assertEqual(components, self.masks[0].argmax())
        predictions = self.run_dir.load_predictions()
        np.testing.assert_array_equal(predictions[1].data, self.masks[1].argmax().data == 1)
        self.assertEqual(
            self.run_dir.written_outputs(),
            [
                "components_0000.pgm", "components_0001.pgm",
                "masks_0000.npy", "masks_0001.npy",
                "pred_0000.pgm", "pred_0001.pgm",
            ],
        )

    def test_missing_masks(self):
        with self.assertRaises(IoFailure):
            self.run_dir.load_masks()
        self.run_dir.ensure_directories()
        with self.assertRaises(IoFailure):
            self.run_dir.load_masks()

    def test_gap_in_frame_numbers(self):
        self.run_dir.ensure_directories()
        self.run_dir.save_frame(0, self.masks[0])
        self.run_dir.save_frame(2, self.masks[1])
        with self.assertRaises(ValidationError):
            self.run_dir.load_masks()

    def test_loss_trace_roundtrip(self):
        self.run_dir.ensure_directories()
        trace = [1.0, 0.1 + 0.2, 1e-17]
        self.run_dir.write_loss_trace(trace)
        lines = self.run_dir.loss_trace_file.read_text(encoding="utf-8").splitlines()
        self.assertEqual(lines[0], "iteration,loss")
        self.assertEqual(lines[2], "1,0.30000000000000004")
        self.assertEqual(self.run_dir.read_loss_trace(), trace)

    def test_write_json(self):
        self.run_dir.write_json(self.run_dir.report_file, {"mean_jaccard": 0.5, "note": "é"})
        text = self.run_dir.report_file.read_text(encoding="utf-8")
        self.assertIn('"note": "é"', text)
        self.assertTrue(text.endswith("}\n"))

    def test_written_outputs_share_one_record(self):
        self.run_dir.ensure_directories()
        self.run_dir.write_loss_trace([1.0])
        heldout = self.run_dir.subdirectory("heldout")
        heldout.ensure_directories()
        heldout.save_prediction(0, self.masks[0].argmax())
        self.run_dir.write_json(self.run_dir.manifest_file, {})
        self.assertEqual(
            self.run_dir.written_outputs(exclude=[self.run_dir.manifest_file]),
            ["heldout/pred_0000.pgm", "loss_trace.csv"],
        )

    def test_files_already_on_disk_are_not_outputs(self):
        self.run_dir.ensure_directories()
        (self.run_dir.base_dir / "notes.txt").write_text("stale", encoding="utf-8")
        self.run_dir.save_frame(0, self.masks[0])
        self.assertEqual(self.run_dir.written_outputs(), ["components_0000.pgm", "masks_0000.npy"])

    def test_prune_frames(self):
        self.run_dir.ensure_directories()
        for t in range(4):
            self.run_dir.save_frame(t, self.masks[t % 2], self.masks[t % 2].argmax())
        self.run_dir.write_loss_trace([1.0])
        self.run_dir.prune_frames(2, kinds=("pred",))
        names = sorted(p.name for p in self.run_dir.base_dir.iterdir())
        self.assertIn("masks_0003.npy", names)
        self.assertNotIn("pred_0002.pgm", names)
        self.assertIn("pred_0001.pgm", names)

        self.run_dir.prune_frames(0)
        self.assertEqual(sorted(p.name for p in self.run_dir.base_dir.iterdir()), ["loss_trace.csv"])
        self.assertEqual(self.run_dir.written_outputs(), ["loss_trace.csv"])

    def test_prune_missing_directory(self):
        self.run_dir.prune_frames(0)
        self.assertFalse(self.run_dir.base_dir.exists())

    def test_subdirectory(self):
        self.assertEqual(self.run_dir.subdirectory("heldout").pred_path(1), self.tmpdir / "run" / "heldout" / "pred_0001.pgm")


if __name__ == "__main__":
    unittest.main()
