"""Hybrid Pedestrian Simulator - Analytics"""

from .benchmark import BenchmarkSeries, benchmark_series, run_benchmark, summarize_benchmark
from .metrics import RunMetricsCalculator, run_summary

__all__ = [
    "BenchmarkSeries",
    "benchmark_series",
    "run_benchmark",
    "summarize_benchmark",
    "RunMetricsCalculator",
    "run_summary",
]
