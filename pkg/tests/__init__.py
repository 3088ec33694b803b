"""Unit test package for oosplan."""
