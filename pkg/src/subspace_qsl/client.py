import functools
import os

import numpy as np

from subspace_qsl.errors import UnsupportedSolver
from subspace_qsl.provider import ProviderFactory, ProviderType

EIGENSOLVER_ENV = "SUBSPACE_QSL_EIGENSOLVER"
SVD_ENV = "SUBSPACE_QSL_SVD"


def default_eigensolver() -> str:
    return os.getenv(EIGENSOLVER_ENV, "numpy:eigh")


def default_svd() -> str:
    return os.getenv(SVD_ENV, "numpy:svd")


def split_solver(solver: str) -> tuple[str, str]:
    """Split a ``provider:method`` string and check the provider exists."""
    if ":" not in solver:
        raise UnsupportedSolver(
            f"Invalid solver format. Expected 'provider:method', got '{solver}'"
        )
    provider_key, method = solver.split(":", 1)

    supported_providers = ProviderFactory.get_supported_providers()
    if provider_key not in supported_providers:
        raise UnsupportedSolver(
            f"Invalid provider key '{provider_key}'. Supported providers: {supported_providers}. "
            "Make sure the solver string is formatted correctly as 'provider:method'."
        )
    return provider_key, method


class Client:
    def __init__(self, provider_configs: dict | None = None):
        """
        Initialize the client with provider configurations.
        Providers are created by the ProviderFactory on first use and then reused.

        Args:
            provider_configs (dict): Keys are provider names ("numpy", "scipy"),
                values are keyword arguments for that provider's constructor.
                For example:
                {
                    "numpy": {"uplo": "U"},
                    "scipy": {"check_finite": False}
                }
        """
        self.providers = {}
        self.provider_configs = dict(provider_configs or {})
        self._spectral = None
        self._svd = None

    def configure(self, provider_configs: dict = None):
        """
        Configure the client with provider configurations.
        """
        if provider_configs is None:
            return

        self.provider_configs.update(provider_configs)
        self.providers.clear()  # NOTE: providers are rebuilt with the new configuration on next use.

    def provider_for(self, solver: str, provider_type: ProviderType):
        provider_key, method = split_solver(solver)

        # Creating twice under a race yields equivalent instances, last write wins.
        cache_key = (provider_type, provider_key)
        if cache_key not in self.providers:
            config = self.provider_configs.get(provider_key, {})
            self.providers[cache_key] = ProviderFactory.create_provider(
                provider_key, config, provider_type
            )
        provider = self.providers[cache_key]

        if not provider.supports(method):
            raise UnsupportedSolver(
                f"Provider '{provider_key}' does not offer {provider_type.value.lower()} "
                f"method '{method}'. Available: {provider.methods}."
            )
        return provider, method

    @property
    def spectral(self):
        """Return the eigensolver interface."""
        if not self._spectral:
            self._spectral = Spectral(self)
        return self._spectral

    @property
    def svd(self):
        """Return the singular value interface."""
        if not self._svd:
            self._svd = Svd(self)
        return self._svd


class Spectral:
    def __init__(self, client: "Client"):
        self.client = client

    def decompose(self, solver: str | None, matrix: np.ndarray):
        """
        Hermitian eigendecomposition with the backend named by ``solver`` (e.g. "scipy:evr").
        """
        provider, method = self.client.provider_for(
            solver or default_eigensolver(), ProviderType.SPECTRAL
        )
        return provider.eigh(matrix, method)


class Svd:
    def __init__(self, client: "Client"):
        self.client = client

    def singular_values(self, solver: str | None, matrix: np.ndarray) -> np.ndarray:
        provider, method = self.client.provider_for(solver or default_svd(), ProviderType.SVD)
        return provider.singular_values(matrix, method)


@functools.cache
def default_client() -> Client:
    """Process-wide client used when callers do not pass their own."""
    return Client()
