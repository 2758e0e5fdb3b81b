"""Tests for gwm_segment.flowfield."""
