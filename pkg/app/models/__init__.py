from .tsp import Instance, Move, Tour  # noqa: F401
from .search import SearchState, StepRecord, Trajectory  # noqa: F401
