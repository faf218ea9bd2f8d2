"""Joint detection and decoding of nonbinary LDPC codes over binary-input ISI channels."""

from .gf import GaloisField
from .channel import IsiChannel, CATALOG, get_channel, SectionalizedTrellis
from .code import SparseParityMatrix, Encoder, random_regular_code, load_alist, save_alist

__version__ = "0.1.0"
