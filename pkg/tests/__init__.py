"""Tests package for tor-height."""
