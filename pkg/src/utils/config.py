"""
Configuration Management
========================
Centralized process-level configuration using environment variables.

Simulation parameters live in the scenario file (see src.world.scenario);
this class only carries settings that belong to the running process.
"""

import os

from dotenv import load_dotenv

# Load environment variables
load_dotenv()


class Config:
    """Application configuration from environment variables."""

    # Application
    DEBUG: bool = os.getenv("DEBUG", "False").lower() == "true"
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # Runs
    HYBRID_OUTPUT_DIR: str = os.getenv("HYBRID_OUTPUT_DIR", "runs")
    HYBRID_DEFAULT_SEED: int = int(os.getenv("HYBRID_DEFAULT_SEED", "42"))

    # Benchmark
    BENCHMARK_REPETITIONS: int = int(os.getenv("BENCHMARK_REPETITIONS", "5"))
    BENCHMARK_WARMUP: int = int(os.getenv("BENCHMARK_WARMUP", "1"))

    @property
    def output_root(self) -> str:
        """Get the directory new runs are written below."""
        return os.path.abspath(self.HYBRID_OUTPUT_DIR)
