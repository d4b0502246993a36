"""Five-player Nash-equilibrium swap search over forest harvest plans."""

from nash_harvest.stands import (
    Dataset,
    ForestStand,
    SpeciesShare,
    parse_stands,
    stand_volume,
)
from nash_harvest.growth import Horizon, SpeciesParams, co2_sequestration, volume_at_age
from nash_harvest.indicators import (
    IndicatorVector,
    StandScores,
    aggregate,
    score_stand,
    shannon_wiener,
    suitability,
)
from nash_harvest.game import GameConfig, decide, diagonal_nash, full_nash_oracle
from nash_harvest.simulator import RunConfig, run_experiment, run_game

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "ForestStand",
    "SpeciesShare",
    "parse_stands",
    "stand_volume",
    "Horizon",
    "SpeciesParams",
    "co2_sequestration",
    "volume_at_age",
    "IndicatorVector",
    "StandScores",
    "aggregate",
    "score_stand",
    "shannon_wiener",
    "suitability",
    "GameConfig",
    "decide",
    "diagonal_nash",
    "full_nash_oracle",
    "RunConfig",
    "run_experiment",
    "run_game",
]
