from .provider_interface import Provider
from .spectral_provider import SpectralProvider
from .svd_provider import SvdProvider
