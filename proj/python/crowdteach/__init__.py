"""Iterative machine teaching simulator.

Linear SGD students are taught by a random teacher, an omniscient teacher, or
a teacher-less policy that periodically examines the students, jointly
estimates the true model and all student models from their answers, pseudo-
labels the teaching pool and selects per-student examples against the
estimates. The heavy lifting lives in the compiled extension ``_core``.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
