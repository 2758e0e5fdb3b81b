"""Test package for gwm_segment."""
