"""Tests for gwm_segment.merge."""
