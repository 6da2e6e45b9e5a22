"""Distortion-perception source-channel coding: solvers, schemes, evaluators."""

__version__ = "0.1.0"
