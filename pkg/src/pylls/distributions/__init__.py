# Distributions
from .distribution import *
from .uniform import *
from .mixture import *
