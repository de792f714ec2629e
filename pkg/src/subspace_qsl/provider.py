import enum
import functools
import importlib
import typing
from pathlib import Path

from subspace_qsl.errors import UnsupportedSolver
from subspace_qsl.framework.provider_interface import Provider
from subspace_qsl.framework.spectral_provider import SpectralProvider
from subspace_qsl.framework.svd_provider import SvdProvider


class ProviderType(enum.Enum):
    SPECTRAL = "Spectral"
    SVD = "Svd"


class ProviderFactory:
    """Factory to dynamically load provider instances based on naming conventions."""

    PROVIDERS_DIR = Path(__file__).parent / "providers"

    @classmethod
    def create_provider(
        cls, provider_key, config, provider_type: ProviderType = ProviderType.SPECTRAL
    ) -> Provider:
        """Dynamically load and create an instance of a provider based on the naming convention."""
        # numpy + Spectral -> subspace_qsl.providers.numpy_provider.NumpySpectralProvider
        provider_class_name = f"{provider_key.capitalize()}{provider_type.value}Provider"
        provider_module_name = f"{provider_key}_provider"

        module_path = f"subspace_qsl.providers.{provider_module_name}"

        # Lazily load the module, optional backends are only imported on first use
        try:
            module = importlib.import_module(module_path)
        except ImportError as e:
            raise UnsupportedSolver(
                f"Could not import module {module_path}: {str(e)}. Install the matching extra, "
                f"e.g. pip install 'subspace-qsl[{provider_key}]'."
            )

        provider_class = getattr(module, provider_class_name, None)
        if provider_class is None:
            raise UnsupportedSolver(
                f"Provider '{provider_key}' has no {provider_type.value} backend."
            )
        return provider_class(**config)

    @classmethod
    def create_spectral_provider(cls, provider_key, config) -> SpectralProvider:
        return typing.cast(
            SpectralProvider,
            cls.create_provider(provider_key, config, ProviderType.SPECTRAL),
        )

    @classmethod
    def create_svd_provider(cls, provider_key, config) -> SvdProvider:
        return typing.cast(
            SvdProvider, cls.create_provider(provider_key, config, ProviderType.SVD)
        )

    @classmethod
    @functools.cache
    def get_supported_providers(cls):
        """List all supported provider names based on files present in the providers directory."""
        provider_files = Path(cls.PROVIDERS_DIR).glob("*_provider.py")
        return {file.stem.replace("_provider", "") for file in provider_files}
