"""Test package for the bellsim project."""
