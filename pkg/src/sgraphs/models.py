from __future__ import annotations

from pydantic import BaseModel, Field


class LayerCounts(BaseModel):
    keyframes: int = 0
    planes: int = 0
    rooms_finite: int = 0
    rooms_infinite: int = 0
    floors: int = 0
    loop_factors: int = 0
    factors: int = 0


class RunReport(BaseModel):
    """Outcome of one ``run_slam`` call.

    ``wall_clock_s`` and ``timing`` are left out of ``report.json`` so that the
    file only depends on the dataset and the configuration.
    """

    dataset: str
    frames: int = 0
    counts: LayerCounts = Field(default_factory=LayerCounts)
    merged_planes: int = 0
    ate_rmse: float | None = None
    odom_ate_rmse: float | None = None
    map_rmse: float | None = None
    wall_clock_s: float = Field(0.0, exclude=True)
    timing: dict[str, float] = Field(default_factory=dict, exclude=True)

    def timing_dump(self) -> dict[str, float]:
        return {"wall_clock_s": self.wall_clock_s, **self.timing}
