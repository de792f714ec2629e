"""The shared interface for linear-algebra backends."""
import abc


class Provider(abc.ABC):
    """Base of every backend. `methods` lists the names accepted after the colon of a solver string."""

    methods: tuple[str, ...] = ()

    def supports(self, method: str) -> bool:
        return method in self.methods
