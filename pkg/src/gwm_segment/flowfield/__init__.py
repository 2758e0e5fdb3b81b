"""Dense flow/image/label containers, binary I/O and visualization."""

from gwm_segment.flowfield.containers import FlowField, LabelMap, RgbImage
from gwm_segment.flowfield.io import (
    read_flo,
    read_pgm,
    read_ppm,
    write_flo,
    write_pgm,
    write_ppm,
)
from gwm_segment.flowfield.viz import flow_to_color, labels_to_color, overlay

__all__ = [
    "FlowField",
    "LabelMap",
    "RgbImage",
    "flow_to_color",
    "labels_to_color",
    "overlay",
    "read_flo",
    "read_pgm",
    "read_ppm",
    "write_flo",
    "write_pgm",
    "write_ppm",
]
