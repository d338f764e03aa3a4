"""Junction conflict scenario toolkit."""

from junctiongen._core import *  # noqa: F401,F403
from junctiongen._core import __version__  # noqa: F401
