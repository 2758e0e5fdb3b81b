"""
Tests for sprite scene generation.
"""

import dataclasses
import unittest

import numpy as np

from gwm_segment.errors import ConfigError, SpriteOutOfBounds
from gwm_segment.flowfield.containers import LabelMap, RgbImage
from gwm_segment.motion.energy import SoftMasks, gwm_loss
from gwm_segment.scenes.generator import generate, place_sprite, render_fill, sprite_mask, verify_scene
from gwm_segment.scenes.presets import translation
from gwm_segment.scenes.spec import BackgroundSpec, Fill, SceneSpec, SpriteSpec


def _sliding_box(dx: float = 3.0, frames: int = 3, sigma: float = 0.0, seed: int = 0) -> SceneSpec:
    sprite = SpriteSpec(
        shape="rectangle",
        size_range=((8, 8), (6, 6)),
        center_range=((10, 10), (12, 12)),
        fill=Fill("flat", ((200, 30, 30),)),
        motions=(translation(dx, 0.0),),
    )
    background = BackgroundSpec(Fill("flat", ((20, 20, 20),)), (translation(0.0, 0.0),))
    return SceneSpec(32, 24, frames, (sprite,), background, sigma, seed, "sliding-box")


class TestGenerate(unittest.TestCase):
    def test_translating_rectangle(self):
        scene = generate(_sliding_box())
        self.assertEqual(scene.frames, 3)
        self.assertEqual(scene.placements[0].centers, ((10.0, 12.0), (13.0, 12.0), (16.0, 12.0)))
        for t, cx in enumerate((10, 13, 16)):
            expected = np.zeros((24, 32), dtype=np.int32)
            expected[9:15, cx - 4 : cx + 4] = 1
            np.testing.assert_array_equal(scene.labels[t].data, expected)
            np.testing.assert_array_equal(scene.foreground[t].data, expected)
            np.testing.assert_array_equal(scene.flows[t].data[..., 0], 3.0 * expected)
            self.assertTrue(np.all(scene.flows[t].data[..., 1] == 0.0))
            self.assertEqual(scene.images[t].data[12, cx].tolist(), [200, 30, 30])
            self.assertEqual(scene.images[t].data[0, 0].tolist(), [20, 20, 20])

    def test_ground_truth_masks_explain_the_flow(self):
        scene = generate(_sliding_box())
        for labels, flow in zip(scene.labels, scene.flows):
            report = gwm_loss(flow, SoftMasks.from_labels(labels, K=2), "constant")
            self.assertLessEqual(report.total, 1e-9)

    def test_deterministic(self):
        spec = _sliding_box(sigma=0.2, seed=5)
        self.assertEqual(generate(spec), generate(spec))
        other = generate(spec.with_seed(6))
        self.assertFalse(np.array_equal(other.flows[0].data, generate(spec).flows[0].data))

    def test_noise_stream_depends_only_on_frame(self):
        short = generate(_sliding_box(sigma=0.2, frames=2, seed=3))
        long = generate(_sliding_box(sigma=0.2, frames=3, seed=3))
        self.assertEqual(short.flows[1], long.flows[1])

    def test_sprite_leaving_the_frame(self):
        with self.assertRaises(SpriteOutOfBounds):
            generate(_sliding_box(dx=10.0))
        with self.assertRaises(SpriteOutOfBounds):
            place_sprite(_sliding_box(dx=10.0), 0)

    def test_verify_scene(self):
        scene = generate(_sliding_box(sigma=0.1))
        self.assertEqual(verify_scene(scene), [])
        broken = dataclasses.replace(
            scene, foreground=(LabelMap(np.zeros((24, 32), dtype=np.int32)),) + scene.foreground[1:]
        )
        self.assertTrue(any("union" in problem for problem in verify_scene(broken)))

    def test_verify_scene_checks_every_frame(self):
        scene = generate(_sliding_box())
        broken = dataclasses.replace(
            scene,
            images=(RgbImage(np.zeros((10, 10, 3), dtype=np.uint8)),) + scene.images[1:],
            foreground=scene.foreground[:2] + (LabelMap(np.zeros((24, 32), dtype=np.int32)),),
        )
        problems = verify_scene(broken)
        self.assertTrue(any(p.startswith("frame 0: image") for p in problems))
        self.assertTrue(any(p.startswith("frame 2:") and "union" in p for p in problems))


class TestSpriteShapes(unittest.TestCase):
    def test_rectangle_is_half_open(self):
        mask = sprite_mask("rectangle", 4, 2, (5.0, 5.0), (10, 10))
        self.assertEqual(int(mask.sum()), 8)
        self.assertTrue(mask[4, 3] and mask[5, 6])
        self.assertFalse(mask[6, 5] or mask[5, 7])

    def test_ellipse_is_symmetric(self):
        mask = sprite_mask("ellipse", 6, 6, (8.0, 8.0), (17, 17))
        np.testing.assert_array_equal(mask, mask[::-1, ::-1])
        self.assertTrue(mask[8, 8])
        self.assertFalse(mask[8, 11])

    def test_triangle_apex_on_top(self):
        mask = sprite_mask("triangle", 8, 8, (10.0, 10.0), (20, 20))
        widths = mask.sum(axis=1)
        self.assertLess(widths[7], widths[13])
        self.assertEqual(int(widths[5]), 0)


class TestRenderFill(unittest.TestCase):
    def test_checker(self):
        image = render_fill(Fill("checker", ((0, 0, 0), (255, 255, 255)), 2), (4, 4))
        self.assertEqual(image[:, :, 0].tolist(), [[0, 0, 255, 255], [0, 0, 255, 255], [255, 255, 0, 0], [255, 255, 0, 0]])

    def test_checker_origin(self):
        fill = Fill("checker", ((0, 0, 0), (255, 255, 255)), 2)
        shifted = render_fill(fill, (4, 4), origin=(1.0, 0.0))
        self.assertEqual(shifted[0, :, 0].tolist(), [255, 0, 0, 255])


class TestSceneSpec(unittest.TestCase):
    def test_invalid_specs(self):
        spec = _sliding_box()
        cases = {
            "width": 0,
            "frames": 0,
            "sprites": (),
            "noise_sigma": -1.0,
        }
        for key, value in cases.items():
            with self.subTest(key=key):
                with self.assertRaises(ConfigError):
                    dataclasses.replace(spec, **{key: value})
        with self.assertRaises(ConfigError):
            dataclasses.replace(spec.sprites[0], shape="star")
        with self.assertRaises(ConfigError):
            Fill("checker", ((0, 0, 0),))
        with self.assertRaises(ConfigError):
            Fill("flat", ((0, 0, 300),))

    def test_dict_roundtrip(self):
        spec = _sliding_box(sigma=0.25, seed=9)
        self.assertEqual(SceneSpec.from_dict(spec.to_dict()).to_dict(), spec.to_dict())

    def test_from_dict_rejects_incomplete_documents(self):
        payload = _sliding_box().to_dict()
        del payload["sprites"]
        with self.assertRaises(ConfigError):
            SceneSpec.from_dict(payload)


if __name__ == "__main__":
    unittest.main()
