from .errors import *
from .utils import *
from .rng import *
from .log import *
from .io import *
from .parallel import *
