from abc import ABC, abstractmethod

import numpy as np

from subspace_qsl.framework.provider_interface import Provider


class SpectralProvider(Provider, ABC):
    @abstractmethod
    def eigh(self, matrix: np.ndarray, method: str) -> tuple[np.ndarray, np.ndarray]:
        """Hermitian eigendecomposition, to be implemented by each provider.

        Args:
            matrix: Square Hermitian matrix.
            method: Backend routine selected by the solver string, e.g. ``evr``.

        Returns:
            Eigenvalues in ascending order and the matching orthonormal eigenvectors as columns.

        Raises:
            EigensolverFailure: The backend did not converge.
        """
        pass
