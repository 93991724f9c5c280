"""Material parameters and derived wavenumbers."""
from dataclasses import dataclass
import math

from .errors import ParameterError


@dataclass(frozen=True)
class LameParameters:
    """Lamé constants shared by both media, plus the two densities.

    ``lam`` is the first Lamé parameter (``lambda`` is reserved in Python).
    The inclusion uses the same ``lam`` and ``mu`` as the background.
    """

    lam: float = 1.0
    mu: float = 1.0
    rho: float = 1.0
    rho_tilde: float = 20.0
    dim: int = 2

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ParameterError(f"dimension must be 2 or 3, got {self.dim}")
        if not self.mu > 0:
            raise ParameterError(f"mu must be positive, got {self.mu}")
        if not 2 * self.lam + self.dim * self.mu > 0:
            raise ParameterError("strong convexity requires 2*lam + N*mu > 0")
        if not (self.rho > 0 and self.rho_tilde > 0):
            raise ParameterError("densities must be positive")
        if self.rho == self.rho_tilde:
            raise ParameterError("rho and rho_tilde must differ")

    @property
    def n(self) -> float:
        """Contrast sqrt(rho_tilde / rho)."""
        return math.sqrt(self.rho_tilde / self.rho)

    @property
    def shear_speed(self) -> float:
        """sqrt(mu / rho), the scale of every eigenvalue bracket."""
        return math.sqrt(self.mu / self.rho)

    def with_(self, **changes) -> "LameParameters":
        d = dict(lam=self.lam, mu=self.mu, rho=self.rho, rho_tilde=self.rho_tilde, dim=self.dim)
        d.update(changes)
        return LameParameters(**d)


def unchecked_parameters(lam, mu, rho, rho_tilde, dim=2) -> LameParameters:
    """Build parameters without validation.

    Used to probe degenerate configurations such as identical media.
    """
    p = object.__new__(LameParameters)
    for name, value in dict(lam=lam, mu=mu, rho=rho, rho_tilde=rho_tilde, dim=dim).items():
        object.__setattr__(p, name, value)
    return p


@dataclass(frozen=True)
class Wavenumbers:
    k1: float
    k2: float
    k1_tilde: float
    k2_tilde: float


def wavenumbers(omega, params: LameParameters) -> Wavenumbers:
    """Compressional and shear wavenumbers in both media at frequency ``omega``."""
    if not omega > 0:
        raise ParameterError(f"omega must be positive, got {omega}")
    p_mod = params.lam + 2 * params.mu
    return Wavenumbers(
        k1=omega * math.sqrt(params.rho / p_mod),
        k2=omega * math.sqrt(params.rho / params.mu),
        k1_tilde=omega * math.sqrt(params.rho_tilde / p_mod),
        k2_tilde=omega * math.sqrt(params.rho_tilde / params.mu),
    )
