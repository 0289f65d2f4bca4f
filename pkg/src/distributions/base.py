"""
Base error kernel class and kernel registry for the quantile models.
"""
from abc import ABC, abstractmethod
from enum import Enum
from typing import Annotated, Dict, List, Optional, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from ..exceptions import DomainError

ArrayLike = Union[float, np.ndarray]

QuantileLevel = Annotated[float, Field(gt=0.0, lt=1.0)]


class KernelKind(str, Enum):
    """Error kernel families."""
    SL = "sl"
    SEP = "sep"


class KernelParams(BaseModel):
    """Shared fields of the kernel parameter bundles."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mu: Union[float, np.ndarray] = 0.0
    sigma: float = Field(gt=0.0)
    p0: QuantileLevel


def check_probability(u: ArrayLike) -> np.ndarray:
    """Return ``u`` as an array, raising if any entry lies outside (0, 1)."""
    arr = np.asarray(u, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError(f"quantile level must lie in (0, 1), got {u!r}")
    return arr


def as_output(out: np.ndarray, *inputs: ArrayLike) -> ArrayLike:
    """Collapse a 0-d result to a float when every input was scalar."""
    if all(np.ndim(x) == 0 for x in inputs):
        return float(np.asarray(out).reshape(()))
    return out


class ErrorKernel(ABC):
    """Base class for quantile-anchored error distributions."""

    def __init__(self):
        self.name = self.kind.value

    @property
    @abstractmethod
    def kind(self) -> KernelKind:
        """Return the kernel family."""

    @property
    @abstractmethod
    def shape_names(self) -> Tuple[str, ...]:
        """Names of the positive error parameters, scale first."""

    @abstractmethod
    def make_params(
        self,
        mu: ArrayLike,
        sigma: float,
        p0: float,
        kappa1: float = 1.0,
        kappa2: float = 1.0,
        validate: bool = True,
    ) -> KernelParams:
        """
        Build the parameter bundle for this kernel.

        Args:
            mu: Location (the p0-th quantile), scalar or array
            sigma: Scale
            p0: Quantile level
            kappa1: Left-tail shape (ignored by kernels without tail shapes)
            kappa2: Right-tail shape (ignored by kernels without tail shapes)
            validate: Skip validation when False, for use inside samplers

        Returns:
            Parameter bundle
        """

    @abstractmethod
    def logpdf(self, y: ArrayLike, params: KernelParams) -> ArrayLike:
        """Log density."""

    @abstractmethod
    def cdf(self, y: ArrayLike, params: KernelParams) -> ArrayLike:
        """Cumulative distribution function."""

    @abstractmethod
    def logcdf(self, y: ArrayLike, params: KernelParams) -> ArrayLike:
        """Log CDF."""

    @abstractmethod
    def logsf(self, y: ArrayLike, params: KernelParams) -> ArrayLike:
        """Log survival function."""

    @abstractmethod
    def quantile(self, u: ArrayLike, params: KernelParams) -> ArrayLike:
        """Quantile function."""

    @abstractmethod
    def sample(
        self,
        params: KernelParams,
        rng: np.random.Generator,
        size: Optional[Union[int, Tuple[int, ...]]] = None,
    ) -> ArrayLike:
        """Draw random variates."""


class KernelRegistry:
    """Registry for the available error kernels."""

    def __init__(self):
        self._kernels: Dict[KernelKind, ErrorKernel] = {}

    def register(self, kernel: ErrorKernel) -> None:
        """
        Register a kernel.

        Args:
            kernel: Kernel instance to register
        """
        self._kernels[kernel.kind] = kernel
        logger.debug(f"Registered error kernel: {kernel.name}")

    def get_kernel(self, kind: Union[str, KernelKind]) -> ErrorKernel:
        """
        Get a kernel by kind.

        Args:
            kind: Kernel kind or its string value

        Returns:
            Kernel instance

        Raises:
            DomainError: If no kernel of that kind is registered
        """
        try:
            return self._kernels[KernelKind(kind)]
        except (KeyError, ValueError):
            raise DomainError(f"Unknown error kernel '{kind}'") from None

    def list_kernels(self) -> List[str]:
        """Names of all registered kernels."""
        return [k.value for k in self._kernels]


# Global kernel registry instance
kernel_registry = KernelRegistry()
