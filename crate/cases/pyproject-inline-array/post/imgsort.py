from PIL import Image
from tqdm import tqdm
