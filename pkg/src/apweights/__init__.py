"""Muckenhoupt weights, maximal and sparse operators, and Rubio de Francia
iteration on uniform dyadic grids."""
from .errors import (ApWeightsError, DegenerateMeasureError, DomainError, FormatError,
                     InvariantError, NonIntegrableError, ParameterError, SeriesError)
from .reports import Check, CheckList
from .parallel import get_threads, set_threads
from .grid import *  # noqa: F401,F403
from .weights import *  # noqa: F401,F403
from .maximal import *  # noqa: F401,F403
from .czsparse import *  # noqa: F401,F403
from .rdf import *  # noqa: F401,F403
from .bilinear import *  # noqa: F401,F403
from .studies import *  # noqa: F401,F403
from . import io

__version__ = "0.1.0"
