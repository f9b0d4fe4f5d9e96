"""Test suite for the almost-elliptic Lie group toolkit."""
