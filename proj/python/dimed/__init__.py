"""Design-based weighted quantile estimation integrating big data and survey data.

The heavy lifting lives in the compiled extension; this package re-exports it.
"""

from ._dimed import *  # noqa: F401,F403
from ._dimed import __version__  # noqa: F401
