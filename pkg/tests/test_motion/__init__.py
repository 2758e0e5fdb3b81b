"""Tests for gwm_segment.motion."""
