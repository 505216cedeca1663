"""Python bindings for the in-pixel foreground/contrast enhancement simulator."""

from ._ipfe import *  # noqa: F401,F403
from ._ipfe import __doc__  # noqa: F401
