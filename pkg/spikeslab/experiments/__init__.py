from .intervals import *
from .diagnostics import *
from .coverage import *
