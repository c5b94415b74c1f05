from .spectrum import *
from .feasibility import *
from .region import *
