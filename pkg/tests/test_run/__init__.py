"""Tests for gwm_segment.run."""
