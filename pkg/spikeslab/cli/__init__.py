from .config import *
from .main import *
