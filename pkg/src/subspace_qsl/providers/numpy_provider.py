import numpy as np

from subspace_qsl.errors import EigensolverFailure, SvdFailure
from subspace_qsl.framework.spectral_provider import SpectralProvider
from subspace_qsl.framework.svd_provider import SvdProvider


class NumpySpectralProvider(SpectralProvider):
    """LAPACK ``heevd`` through :func:`numpy.linalg.eigh`."""

    methods = ("eigh",)

    def __init__(self, **config):
        self.uplo = config.get("uplo", "L")

    def eigh(self, matrix, method):
        try:
            eigenvalues, eigenvectors = np.linalg.eigh(matrix, UPLO=self.uplo)
        except np.linalg.LinAlgError as e:
            raise EigensolverFailure(f"numpy eigh did not converge: {e}")
        return eigenvalues, eigenvectors


class NumpySvdProvider(SvdProvider):
    methods = ("svd",)

    def __init__(self, **config):
        pass

    def singular_values(self, matrix, method):
        if 0 in matrix.shape:
            return np.zeros(0)
        try:
            return np.linalg.svd(matrix, compute_uv=False)
        except np.linalg.LinAlgError as e:
            raise SvdFailure(f"numpy svd did not converge: {e}")
