"""Tests for the boxmso engine, encoders and command line."""
