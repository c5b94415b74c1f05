from .exact import *
from .quadrature import *
from .consistency import *
