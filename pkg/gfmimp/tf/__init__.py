from .polynomial import Polynomial, poly_add, poly_mul
from .rational import RationalTF, PoleError, rtf_add, rtf_mul, rtf_div
from .matrix import TFMatrix2x2, positive_sequence

__all__ = [
    'Polynomial',
    'RationalTF',
    'TFMatrix2x2',
    'PoleError',
    'poly_add',
    'poly_mul',
    'rtf_add',
    'rtf_mul',
    'rtf_div',
    'positive_sequence',
]
