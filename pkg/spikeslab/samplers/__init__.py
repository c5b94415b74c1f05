from .config import *
from .mode import *
from .kernels import *
from .mala import *
from .hmc import *
from .conditional import *
from .two_stage import *
