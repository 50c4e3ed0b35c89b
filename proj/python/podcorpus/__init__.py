"""Podcast corpus analysis: thin Python front end over the C++ core."""

try:
    from ._podcorpus import *  # noqa: F401,F403
    from ._podcorpus import __version__
except ImportError:  # in-tree build: module sits next to the build outputs
    from _podcorpus import *  # noqa: F401,F403
    from _podcorpus import __version__
