"""Tests for gwm_segment.segment."""
