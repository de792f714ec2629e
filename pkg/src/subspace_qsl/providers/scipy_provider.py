"""SciPy LAPACK drivers, installed with the ``scipy`` extra.

Serves as the independent eigensolver for cross-checks: ``scipy:evr`` (MRRR),
``scipy:evx`` (bisection), ``scipy:ev`` (QR iteration), ``scipy:evd``
(divide and conquer).
"""
import scipy.linalg

from subspace_qsl.errors import EigensolverFailure, SvdFailure
from subspace_qsl.framework.spectral_provider import SpectralProvider
from subspace_qsl.framework.svd_provider import SvdProvider


class ScipySpectralProvider(SpectralProvider):
    methods = ("ev", "evd", "evr", "evx")

    def __init__(self, **config):
        self.check_finite = config.get("check_finite", True)

    def eigh(self, matrix, method):
        try:
            return scipy.linalg.eigh(matrix, driver=method, check_finite=self.check_finite)
        except (scipy.linalg.LinAlgError, ValueError) as e:
            raise EigensolverFailure(f"scipy eigh driver '{method}' failed: {e}")


class ScipySvdProvider(SvdProvider):
    methods = ("gesdd", "gesvd")

    def __init__(self, **config):
        self.check_finite = config.get("check_finite", True)

    def singular_values(self, matrix, method):
        try:
            return scipy.linalg.svd(
                matrix,
                compute_uv=False,
                lapack_driver=method,
                check_finite=self.check_finite,
            )
        except (scipy.linalg.LinAlgError, ValueError) as e:
            raise SvdFailure(f"scipy svd driver '{method}' failed: {e}")
