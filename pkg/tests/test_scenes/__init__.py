"""Tests for gwm_segment.scenes."""
