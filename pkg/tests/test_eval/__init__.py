"""Tests for gwm_segment.eval."""
