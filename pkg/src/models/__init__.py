"""Domain data types: models, grids, initial data, segments and measures."""

from src.models.empirical_measure import EmpiricalSegmentMeasure
from src.models.functional import TestFunctional
from src.models.grid import Grid
from src.models.initial_data import InitialData
from src.models.sdde_model import SddeModel
from src.models.segment import Segment
from src.models.trajectory import Trajectory

__all__ = [
    "EmpiricalSegmentMeasure",
    "Grid",
    "InitialData",
    "SddeModel",
    "Segment",
    "TestFunctional",
    "Trajectory",
]
