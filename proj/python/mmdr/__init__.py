"""Multi-modal delay randomization: delayed-observation pipeline, planar
obstacle world, PPO training and the evaluation protocols.

The heavy lifting lives in the `_mmdr` extension; this package just re-exports
it. In a build tree the extension sits on PYTHONPATH next to the package, in
an installed layout it sits inside it.
"""

try:
    from ._mmdr import *  # noqa: F401,F403
    from ._mmdr import __version__  # noqa: F401
except ImportError:
    from _mmdr import *  # noqa: F401,F403
    from _mmdr import __version__  # noqa: F401
