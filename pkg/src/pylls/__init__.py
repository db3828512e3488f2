"""
Latent label shift identification with Python.

"""

__version__ = "0.1.0"

# Errors and core types
from .errors import *
from .model import *
from .linalg import *

# Synthetic problems
from .distributions import *
from .dataset import *
from .synthgen import *

# Pipeline stages
from .discriminator import *
from .discretize import *
from .factorize import *
from .adjust import *

# Analysis
from .evaluation import *
from .analysis import *
from .ddfa import *
from .sweep import *

# Batch front end
from .config import *
from .selftest import *
