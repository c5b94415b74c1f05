from .slabs import *
from .design import *
from .model import *
