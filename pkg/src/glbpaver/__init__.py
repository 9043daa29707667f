"""Interval branch-and-prune solver with lifeline work stealing."""

from .contractor import Certificate, PruneOutcome, prune
from .expression import Constraint, Problem, Relation
from .interval import EMPTY, Box, Interval
from .problems import builtin_problem, load_problem, parse_problem
from .search import Paving, SearchStats, TaskQueue, WorkItem, solve_sequential

__version__ = "0.1.0"

__all__ = [
    "Box", "Certificate", "Constraint", "EMPTY", "Interval", "Paving",
    "Problem", "PruneOutcome", "Relation", "SearchStats", "TaskQueue",
    "WorkItem", "builtin_problem", "load_problem", "parse_problem", "prune",
    "solve_sequential",
]
