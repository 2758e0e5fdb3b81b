import shutil
import tempfile
import unittest
from pathlib import Path

import numpy as np
from PIL import Image

from gwm_segment.errors import (
    BadMagic,
    DimensionOverflow,
    FlowFormatError,
    IoFailure,
    NonFiniteValue,
    TruncatedFile,
)
from gwm_segment.flowfield.containers import FlowField, LabelMap, RgbImage
from gwm_segment.flowfield.io import (
    encode_flo,
    label_gray_levels,
    read_flo,
    read_pgm,
    read_ppm,
    write_flo,
    write_pgm,
    write_ppm,
)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def _header(magic: float, width: int, height: int) -> bytes:
    return np.array([magic], dtype="<f4").tobytes() + np.array([width, height], dtype="<i4").tobytes()


class TestFloFormat(unittest.TestCase):
    def setUp(self):
        self.tmpdir = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def test_reference_file_parses_to_exact_values(self):
        field = read_flo(DATA_DIR / "reference_2x1.flo")
        self.assertEqual((field.width, field.height), (2, 1))
        self.assertEqual(field.data[0, 0].tolist(), [1.5, -2.0])
        self.assertEqual(field.data[0, 1].tolist(), [0.0, 0.0])

    def test_encode_matches_reference_bytes(self):
        field = FlowField(np.array([[[1.5, -2.0], [0.0, 0.0]]], dtype=np.float32))
        self.assertEqual(encode_flo(field), (DATA_DIR / "reference_2x1.flo").read_bytes())

    def test_random_fields_roundtrip_bit_exact(self):
        rng = np.random.default_rng(1)
        path = self.tmpdir / "f.flo"
        for _ in range(100):
            h, w = rng.integers(1, 17, size=2)
            data = (rng.standard_normal((h, w, 2)) * 10).astype(np.float32)
            write_flo(FlowField(data), path)
            back = read_flo(path)
            self.assertEqual(back.data.tobytes(), data.tobytes())

    def test_bad_magic(self):
        path = self.tmpdir / "bad.flo"
        path.write_bytes(_header(1.0, 1, 1) + bytes(8))
        with self.assertRaises(BadMagic):
            read_flo(path)

    def test_truncated_header_and_payload(self):
        path = self.tmpdir / "short.flo"
        path.write_bytes(_header(202021.25, 2, 2)[:8])
        with self.assertRaises(TruncatedFile):
            read_flo(path)
        path.write_bytes(_header(202021.25, 2, 2) + bytes(4 * 7))
        with self.assertRaises(TruncatedFile):
            read_flo(path)

    def test_trailing_bytes(self):
        path = self.tmpdir / "long.flo"
        path.write_bytes(_header(202021.25, 2, 2) + bytes(4 * 8 + 1))
        with self.assertRaises(FlowFormatError) as ctx:
            read_flo(path)
        self.assertNotIsInstance(ctx.exception, TruncatedFile)
        self.assertIn("1 trailing byte", str(ctx.exception))

    def test_dimension_overflow(self):
        path = self.tmpdir / "dims.flo"
        for width, height in ((0, 1), (1, -3), (70000, 1)):
            with self.subTest(width=width, height=height):
                path.write_bytes(_header(202021.25, width, height) + bytes(8))
                with self.assertRaises(DimensionOverflow):
                    read_flo(path)

    def test_non_finite_values(self):
        path = self.tmpdir / "nan.flo"
        payload = np.array([np.nan, 0.0], dtype="<f4").tobytes()
        path.write_bytes(_header(202021.25, 1, 1) + payload)
        with self.assertRaises(NonFiniteValue):
            read_flo(path)
        with self.assertRaises(NonFiniteValue):
            FlowField(np.full((1, 1, 2), np.inf))

    def test_missing_file_is_io_failure(self):
        with self.assertRaises(IoFailure):
            read_flo(self.tmpdir / "missing.flo")
        with self.assertRaises(IoFailure):
            write_flo(FlowField.zeros(2, 2), self.tmpdir / "no" / "such" / "dir.flo")


class TestPnmFormats(unittest.TestCase):
    def setUp(self):
        self.tmpdir = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def test_gray_levels(self):
        self.assertEqual(label_gray_levels(1).tolist(), [0, 255])
        self.assertEqual(label_gray_levels(3).tolist(), [0, 85, 170, 255])

    def test_component_map_roundtrip(self):
        labels = LabelMap(np.array([[0, 1, 2, 3], [3, 2, 1, 0]]))
        path = self.tmpdir / "c.pgm"
        write_pgm(labels, path, num_labels=3)
        self.assertEqual(path.read_bytes()[:2], b"P5")
        self.assertEqual(read_pgm(path, num_labels=3), labels)

    def test_binary_mask_written_as_0_255(self):
        path = self.tmpdir / "m.pgm"
        write_pgm(LabelMap(np.array([[True, False], [False, True]])), path)
        with Image.open(path) as img:
            self.assertEqual(sorted(set(np.asarray(img).ravel().tolist())), [0, 255])

    def test_label_above_scale_rejected(self):
        with self.assertRaises(FlowFormatError):
            write_pgm(LabelMap(np.array([[0, 4]])), self.tmpdir / "x.pgm", num_labels=3)

    def test_rgb_roundtrip(self):
        rng = np.random.default_rng(0)
        image = RgbImage(rng.integers(0, 256, size=(5, 7, 3), dtype=np.uint8))
        path = self.tmpdir / "i.ppm"
        write_ppm(image, path)
        self.assertEqual(path.read_bytes()[:2], b"P6")
        self.assertEqual(read_ppm(path), image)

    def test_not_an_image(self):
        path = self.tmpdir / "junk.pgm"
        path.write_bytes(b"definitely not a pnm")
        with self.assertRaises(FlowFormatError):
            read_pgm(path)


if __name__ == "__main__":
    unittest.main()
