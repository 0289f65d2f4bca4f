"""
Parameter containers and the constrained <-> unconstrained layout.

Unconstrained coordinates are ordered as: beta, gamma (CD4 links only),
log sigma, the tail shapes (SEP only; log or scaled-logit depending on the
prior, one shared coordinate when tails are tied), log diag(L_v), the strict
lower triangle of L_v, then every subject's random effects stacked.
"""
import math
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import expit, log_expit, logit

from ..exceptions import DomainError
from .links import FixedEffects
from .priors import KappaPriorKind
from .spec import ErrorModel, ModelSpec


class RandomEffectsSpec(BaseModel):
    """Dimension and precision Cholesky factor of the random effects."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    q: int = Field(ge=1)
    cholesky_precision: np.ndarray

    @model_validator(mode="after")
    def _check_factor(self) -> "RandomEffectsSpec":
        lv = np.asarray(self.cholesky_precision, dtype=float)
        if lv.shape != (self.q, self.q):
            raise ValueError(f"L_v must be {self.q}x{self.q}")
        if not np.allclose(lv, np.tril(lv)):
            raise ValueError("L_v must be lower triangular")
        if not np.all(np.diag(lv) > 0.0):
            raise ValueError("L_v needs a positive diagonal")
        return self

    @property
    def covariance(self) -> np.ndarray:
        """``Sigma_v = (L L^T)^-1``."""
        lv = self.cholesky_precision
        return np.linalg.inv(lv @ lv.T)


class ModelParameters(BaseModel):
    """Constrained parameter state."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    beta: np.ndarray
    gamma: Optional[float] = None
    sigma: float
    kappa1: Optional[float] = None
    kappa2: Optional[float] = None
    lv: np.ndarray
    v: np.ndarray

    @property
    def fixed_effects(self) -> FixedEffects:
        return FixedEffects.model_construct(beta=self.beta, gamma=self.gamma)

    def error_model(self, spec: ModelSpec) -> ErrorModel:
        return ErrorModel.model_construct(
            kernel=spec.kernel,
            p0=spec.p0,
            sigma=self.sigma,
            kappa1=1.0 if self.kappa1 is None else self.kappa1,
            kappa2=1.0 if self.kappa2 is None else self.kappa2,
        )

    @property
    def random_effects(self) -> RandomEffectsSpec:
        return RandomEffectsSpec(q=self.lv.shape[0], cholesky_precision=self.lv)


class BlockKind(str, Enum):
    """Groups of coordinates updated together by the sampler."""
    FIXED = "fixed"
    SUBJECT = "subject"
    ERROR = "error"
    COVARIANCE = "covariance"
    JOINT = "joint"


class Block(BaseModel):
    """A set of unconstrained coordinates updated jointly."""

    model_config = ConfigDict(frozen=True)

    name: str
    kind: BlockKind
    indices: Tuple[int, ...]
    subject: Optional[int] = None

    @property
    def size(self) -> int:
        return len(self.indices)


class ParameterLayout:
    """Maps a ModelSpec and subject count to the flat unconstrained vector."""

    def __init__(self, spec: ModelSpec, n_subjects: int):
        """
        Initialize the layout.

        Args:
            spec: Model specification
            n_subjects: Number of subjects N
        """
        self.spec = spec
        self.n_subjects = n_subjects
        link = spec.link_fn
        self.n_beta = link.n_beta
        self.has_gamma = link.uses_cd4
        self.q = link.q
        self.n_kappa = 0 if not spec.has_kappas else (1 if spec.tie_kappas else 2)
        self.tril = np.tril_indices(self.q, -1)

        offset = 0

        def take(n: int) -> slice:
            nonlocal offset
            s = slice(offset, offset + n)
            offset += n
            return s

        self.beta_slice = take(self.n_beta)
        self.gamma_slice = take(1 if self.has_gamma else 0)
        self.sigma_slice = take(1)
        self.kappa_slice = take(self.n_kappa)
        self.diag_slice = take(self.q)
        self.offdiag_slice = take(len(self.tril[0]))
        self.v_slice = take(n_subjects * self.q)
        self.dim = offset

    # -- names -------------------------------------------------------------

    @property
    def column_names(self) -> List[str]:
        """Constrained draw columns, ``lp__`` excluded."""
        names = [f"beta[{k + 1}]" for k in range(self.n_beta)]
        if self.has_gamma:
            names.append("gamma")
        names.append("sigma")
        if self.spec.has_kappas:
            names += ["kappa1", "kappa2"]
        names += [f"Lv[{i + 1},{j + 1}]" for i in range(self.q) for j in range(i + 1)]
        names += [f"v[{i + 1},{k + 1}]" for i in range(self.n_subjects) for k in range(self.q)]
        return names

    @property
    def global_columns(self) -> List[str]:
        """Columns excluding the subject random effects."""
        return [c for c in self.column_names if not c.startswith("v[")]

    @property
    def summary_columns(self) -> List[str]:
        """Fixed effects and error parameters."""
        return [c for c in self.global_columns if not c.startswith("Lv[")]

    @property
    def unconstrained_names(self) -> List[str]:
        names = [f"beta[{k + 1}]" for k in range(self.n_beta)]
        if self.has_gamma:
            names.append("gamma")
        names.append("log_sigma")
        if self.n_kappa == 1:
            names.append("t_kappa")
        elif self.n_kappa == 2:
            names += ["t_kappa1", "t_kappa2"]
        names += [f"log_Lv[{i + 1},{i + 1}]" for i in range(self.q)]
        names += [f"Lv[{i + 1},{j + 1}]" for i, j in zip(*self.tril)]
        names += [f"v[{i + 1},{k + 1}]" for i in range(self.n_subjects) for k in range(self.q)]
        return names

    def component_of(self, index: int) -> str:
        """Name of the unconstrained coordinate at ``index``."""
        return self.unconstrained_names[index]

    # -- blocks ------------------------------------------------------------

    def blocks(self, plan: str = "grouped") -> List[Block]:
        """
        Sampler blocks.

        Args:
            plan: ``grouped`` (fixed effects, each subject, error parameters,
                L_v) or ``joint`` (one block over everything)

        Returns:
            Ordered list of blocks
        """
        if plan == "joint":
            return [Block(name="joint", kind=BlockKind.JOINT, indices=tuple(range(self.dim)))]
        if plan != "grouped":
            raise DomainError(f"Unknown block plan '{plan}'")

        def rng(*slices: slice) -> Tuple[int, ...]:
            return tuple(i for s in slices for i in range(s.start, s.stop))

        blocks = [Block(name="fixed", kind=BlockKind.FIXED, indices=rng(self.beta_slice, self.gamma_slice))]
        start = self.v_slice.start
        for i in range(self.n_subjects):
            idx = tuple(range(start + i * self.q, start + (i + 1) * self.q))
            blocks.append(Block(name=f"v[{i + 1}]", kind=BlockKind.SUBJECT, indices=idx, subject=i))
        blocks.append(Block(name="error", kind=BlockKind.ERROR, indices=rng(self.sigma_slice, self.kappa_slice)))
        blocks.append(Block(name="Lv", kind=BlockKind.COVARIANCE, indices=rng(self.diag_slice, self.offdiag_slice)))
        return blocks

    # -- transforms --------------------------------------------------------

    def _kappa_from(self, u: np.ndarray) -> Tuple[np.ndarray, float]:
        prior = self.spec.priors.kappa
        if prior.kind == KappaPriorKind.UNIFORM:
            width = prior.upper - prior.lower
            kappa = prior.lower + width * expit(u)
            log_jac = float(np.sum(math.log(width) + log_expit(u) + log_expit(-u)))
            return kappa, log_jac
        return np.exp(u), float(np.sum(u))

    def _kappa_to(self, kappa: np.ndarray) -> np.ndarray:
        prior = self.spec.priors.kappa
        if prior.kind == KappaPriorKind.UNIFORM:
            return logit((kappa - prior.lower) / (prior.upper - prior.lower))
        return np.log(kappa)

    def constrain(self, u: np.ndarray) -> Tuple[ModelParameters, float]:
        """
        Map an unconstrained vector to parameters.

        Args:
            u: Flat vector of length ``dim``

        Returns:
            (parameters, log-Jacobian of the constraining transform)
        """
        u = np.asarray(u, dtype=float)
        if u.shape != (self.dim,):
            raise DomainError(f"expected a vector of length {self.dim}, got shape {u.shape}")

        log_sigma = float(u[self.sigma_slice][0])
        log_jac = log_sigma
        kappa1 = kappa2 = None
        if self.n_kappa:
            kappas, kj = self._kappa_from(u[self.kappa_slice])
            log_jac += kj
            kappa1 = float(kappas[0])
            kappa2 = float(kappas[-1])

        log_diag = u[self.diag_slice]
        log_jac += float(np.sum(log_diag))
        lv = np.zeros((self.q, self.q))
        lv[np.diag_indices(self.q)] = np.exp(log_diag)
        lv[self.tril] = u[self.offdiag_slice]

        params = ModelParameters.model_construct(
            beta=u[self.beta_slice].copy(),
            gamma=float(u[self.gamma_slice][0]) if self.has_gamma else None,
            sigma=math.exp(log_sigma),
            kappa1=kappa1,
            kappa2=kappa2,
            lv=lv,
            v=u[self.v_slice].reshape(self.n_subjects, self.q),
        )
        return params, log_jac

    def unconstrain(self, params: ModelParameters) -> np.ndarray:
        """Inverse of :meth:`constrain`."""
        u = np.empty(self.dim)
        u[self.beta_slice] = params.beta
        if self.has_gamma:
            u[self.gamma_slice] = 0.0 if params.gamma is None else params.gamma
        u[self.sigma_slice] = math.log(params.sigma)
        if self.n_kappa == 1:
            u[self.kappa_slice] = self._kappa_to(np.array([params.kappa1]))
        elif self.n_kappa == 2:
            u[self.kappa_slice] = self._kappa_to(np.array([params.kappa1, params.kappa2]))
        u[self.diag_slice] = np.log(np.diag(params.lv))
        u[self.offdiag_slice] = params.lv[self.tril]
        u[self.v_slice] = np.asarray(params.v, dtype=float).reshape(-1)
        return u

    def to_row(self, params: ModelParameters) -> np.ndarray:
        """Constrained values in :attr:`column_names` order."""
        parts = [np.asarray(params.beta, dtype=float)]
        if self.has_gamma:
            parts.append([params.gamma])
        parts.append([params.sigma])
        if self.spec.has_kappas:
            parts.append([params.kappa1, params.kappa2])
        parts.append([params.lv[i, j] for i in range(self.q) for j in range(i + 1)])
        parts.append(np.asarray(params.v, dtype=float).reshape(-1))
        return np.concatenate([np.asarray(p, dtype=float) for p in parts])

    def from_row(self, row: np.ndarray) -> ModelParameters:
        """Inverse of :meth:`to_row`."""
        row = np.asarray(row, dtype=float)
        pos = 0

        def take(n: int) -> np.ndarray:
            nonlocal pos
            out = row[pos:pos + n]
            pos += n
            return out

        beta = take(self.n_beta).copy()
        gamma = float(take(1)[0]) if self.has_gamma else None
        sigma = float(take(1)[0])
        kappa1 = kappa2 = None
        if self.spec.has_kappas:
            kappa1, kappa2 = (float(x) for x in take(2))
        lv = np.zeros((self.q, self.q))
        lv[np.tril_indices(self.q)] = take(self.q * (self.q + 1) // 2)
        v = take(self.n_subjects * self.q).reshape(self.n_subjects, self.q)
        return ModelParameters.model_construct(
            beta=beta, gamma=gamma, sigma=sigma, kappa1=kappa1, kappa2=kappa2, lv=lv, v=v,
        )


class ParameterVector(BaseModel):
    """Flat unconstrained state together with its layout."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    values: np.ndarray
    layout: ParameterLayout

    def constrain(self) -> Tuple[ModelParameters, float]:
        return self.layout.constrain(self.values)

    @property
    def log_jacobian(self) -> float:
        return self.constrain()[1]

    @classmethod
    def from_parameters(cls, params: ModelParameters, layout: ParameterLayout) -> "ParameterVector":
        return cls(values=layout.unconstrain(params), layout=layout)
