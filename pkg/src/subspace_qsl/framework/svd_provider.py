from abc import ABC, abstractmethod

import numpy as np

from subspace_qsl.framework.provider_interface import Provider


class SvdProvider(Provider, ABC):
    @abstractmethod
    def singular_values(self, matrix: np.ndarray, method: str) -> np.ndarray:
        """Singular values in descending order.

        :raises SvdFailure: The backend did not converge.
        """
        pass
