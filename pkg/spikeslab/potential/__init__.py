from .transform import *
from .potential import *
from .decomposition import *
