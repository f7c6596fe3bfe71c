"""Life-index evaluation of health care systems and health budget allocation."""

from .errors import ComputationError, InputError, LifeIndexError

__version__ = "0.1.0"

__all__ = ["ComputationError", "InputError", "LifeIndexError", "__version__"]
