"""
Quantile link functions mapping fixed and random effects to the location.
"""
import math
from abc import ABC, abstractmethod
from enum import Enum
from typing import Dict, List, Optional, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, field_validator

from ..exceptions import DomainError

ArrayLike = Union[float, np.ndarray]

LN10 = math.log(10.0)


class LinkKind(str, Enum):
    """Available link functions."""
    LINEAR = "linear"
    BIEXPONENTIAL = "biexponential"


class FixedEffects(BaseModel):
    """Population coefficients of the link."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    beta: np.ndarray
    gamma: Optional[float] = None

    @field_validator("beta", mode="before")
    @classmethod
    def _as_array(cls, value):
        arr = np.asarray(value, dtype=float).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise ValueError("fixed effects must be finite")
        return arr


class LinkFunction(ABC):
    """Base class for links ``mu_ij = g(t_ij, x_ij, beta, v_i)``."""

    def __init__(self):
        self.name = self.kind.value

    @property
    @abstractmethod
    def kind(self) -> LinkKind:
        """Return the link kind."""

    @property
    @abstractmethod
    def n_beta(self) -> int:
        """Number of beta coefficients."""

    @property
    def q(self) -> int:
        """Random-effect dimension."""
        return self.n_beta

    @property
    def uses_cd4(self) -> bool:
        """Whether the link has a CD4 coefficient ``gamma``."""
        return False

    @abstractmethod
    def evaluate(
        self,
        time: np.ndarray,
        beta: np.ndarray,
        v: np.ndarray,
        gamma: Optional[float] = None,
        cd4: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """
        Evaluate the link row-wise.

        Args:
            time: Observation times, shape (n,)
            beta: Fixed effects, shape (n_beta,)
            v: Random effects per row, shape (n, q) or (q,)
            gamma: CD4 coefficient
            cd4: CD4 covariate per row

        Returns:
            Location per row
        """


class LinearLink(LinkFunction):
    """Random intercept and slope: ``beta1 + v1 + (beta2 + v2) t``."""

    @property
    def kind(self) -> LinkKind:
        return LinkKind.LINEAR

    @property
    def n_beta(self) -> int:
        return 2

    def evaluate(self, time, beta, v, gamma=None, cd4=None):
        v = np.asarray(v, dtype=float)
        return beta[0] + v[..., 0] + (beta[1] + v[..., 1]) * time


class BiexponentialLink(LinkFunction):
    """
    Two-phase viral decay on the log10 scale.

    ``log10(P1 exp(-lambda1 t) + P2 exp(-lambda2 t))`` with
    ``P1 = exp(beta1 + v1)``, ``lambda1 = beta2 + v2``,
    ``P2 = exp(beta3 + v3)`` and ``lambda2 = beta4 + v4 + gamma * cd4``.
    The sum is formed in log space, so the result is ``-inf`` only when both
    phases underflow.
    """

    @property
    def kind(self) -> LinkKind:
        return LinkKind.BIEXPONENTIAL

    @property
    def n_beta(self) -> int:
        return 4

    @property
    def uses_cd4(self) -> bool:
        return True

    def evaluate(self, time, beta, v, gamma=None, cd4=None):
        v = np.asarray(v, dtype=float)
        slow_rate = beta[3] + v[..., 3]
        if gamma is not None and cd4 is not None:
            slow_rate = slow_rate + gamma * np.asarray(cd4, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            fast = beta[0] + v[..., 0] - (beta[1] + v[..., 1]) * time
            slow = beta[2] + v[..., 2] - slow_rate * time
            return np.logaddexp(fast, slow) / LN10


class LinkRegistry:
    """Registry for link functions."""

    def __init__(self):
        self._links: Dict[LinkKind, LinkFunction] = {}

    def register(self, link: LinkFunction) -> None:
        self._links[link.kind] = link
        logger.debug(f"Registered link: {link.name}")

    def get_link(self, kind: Union[str, LinkKind]) -> LinkFunction:
        """
        Get a link by kind.

        Raises:
            DomainError: If the link is unknown
        """
        try:
            return self._links[LinkKind(kind)]
        except (KeyError, ValueError):
            raise DomainError(f"Unknown link '{kind}'") from None

    def list_links(self) -> List[str]:
        return [k.value for k in self._links]


link_registry = LinkRegistry()
link_registry.register(LinearLink())
link_registry.register(BiexponentialLink())


def _scalar_or_array(out: np.ndarray, *inputs) -> ArrayLike:
    if all(np.ndim(x) == 0 for x in inputs):
        return float(out)
    return out


def link_linear(t: ArrayLike, fx: FixedEffects, v) -> ArrayLike:
    """
    Linear random intercept and slope link.

    Args:
        t: Time(s)
        fx: Fixed effects with two betas
        v: Random effects (v1, v2)

    Returns:
        ``beta1 + v1 + (beta2 + v2) t``
    """
    tt = np.asarray(t, dtype=float)
    out = link_registry.get_link(LinkKind.LINEAR).evaluate(tt, fx.beta, np.asarray(v, dtype=float))
    return _scalar_or_array(out, t)


def link_biexponential(t: ArrayLike, cd4: ArrayLike, fx: FixedEffects, v) -> ArrayLike:
    """
    Biexponential decay link with a CD4-modified slow phase.

    Args:
        t: Time(s)
        cd4: CD4 covariate value(s)
        fx: Fixed effects with four betas and ``gamma`` (``None`` means 0)
        v: Random effects (v1, v2, v3, v4)

    Returns:
        log10 viral load at ``t``
    """
    tt = np.asarray(t, dtype=float)
    out = link_registry.get_link(LinkKind.BIEXPONENTIAL).evaluate(
        tt, fx.beta, np.asarray(v, dtype=float), gamma=fx.gamma, cd4=cd4
    )
    return _scalar_or_array(out, t, cd4)
