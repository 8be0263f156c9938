# Grid Module
from .grid import Grid, GridFunction, VecGridFunction, Ball, ball_nodes, sample, l2_pointwise, in_ball
from .family import BallFamily

__all__ = [
    "Grid",
    "GridFunction",
    "VecGridFunction",
    "Ball",
    "BallFamily",
    "ball_nodes",
    "sample",
    "l2_pointwise",
    "in_ball",
]
