"""gridveil: metering-privacy economics toolkit.

Quantifies how likely an adversary is to distinguish consumption patterns
from metered data, how direct load control degrades when metering is
subsampled, and what screening and insurance contract menus follow from
those quantities.
"""

from ._kernels import BACKEND as kernel_backend

__version__ = "0.1.0"

__all__ = ["__version__", "kernel_backend"]
