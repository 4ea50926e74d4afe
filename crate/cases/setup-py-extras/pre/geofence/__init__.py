import numpy as np
from shapely.geometry import Point
