"""Benchmark problems: synthetic functions, windfarm layout, battery fixture."""

from .problems import Problem, available_problems, get_problem

__all__ = ["Problem", "available_problems", "get_problem"]
