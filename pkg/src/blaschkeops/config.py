"""Run configuration shared by the verification suite and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class RunConfig:
    """Grid, window, tolerance and output policy for a run.

    tol_operator governs identities of truncated matrices on interior blocks;
    tol_function governs pointwise/boundary-function identities.
    """

    grid_size: int = 4096
    mode_window: int = 64
    interior_fraction: float = 0.5
    tol_operator: float = 1e-6
    tol_function: float = 1e-8
    eps_tail: float = 1e-10
    seed: int = 0
    output_format: str = "json"
    output_path: str | None = None

    def __post_init__(self):
        if self.grid_size < 2 or self.grid_size & (self.grid_size - 1):
            raise ValueError("grid_size must be a power of two")
        if 2 * self.mode_window + 1 > self.grid_size:
            raise ValueError("mode window exceeds grid capacity")
        if not 0.0 < self.interior_fraction <= 1.0:
            raise ValueError("interior fraction must lie in (0, 1]")
        if self.output_format not in ("json", "csv"):
            raise ValueError("output format must be json or csv")

    @property
    def interior(self) -> int:
        return max(1, int(self.mode_window * self.interior_fraction))

    def with_window(self, window: int) -> "RunConfig":
        return replace(self, mode_window=window)
