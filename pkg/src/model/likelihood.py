"""
Censored log-likelihood, log-prior and log-posterior of the quantile model.

Zero-probability regions evaluate to ``-inf``; a NaN anywhere is a bug in
the inputs and raises :class:`~src.exceptions.NumericError`.
"""
import math
from typing import List, Optional, Sequence, Union

import numpy as np
from loguru import logger
from scipy.optimize import least_squares

from ..distributions import ErrorKernel, KernelParams, kernel_registry
from ..exceptions import InitializationError, NumericError
from .data import INTERVAL, LEFT, OBSERVED, RIGHT, CensorKind, Dataset, Observation
from .parameters import Block, BlockKind, ModelParameters, ParameterLayout, ParameterVector
from .priors import KappaPriorKind, PriorSpec, half_t_logpdf, normal_logpdf, random_effects_logdensity
from .spec import ErrorModel, ModelSpec


def _log_interval(kernel: ErrorKernel, lower, upper, params_lo: KernelParams, params_hi: KernelParams):
    """``log(F(upper) - F(lower))`` without cancellation in either tail."""
    hi_cdf = np.asarray(kernel.logcdf(upper, params_hi), dtype=float)
    lo_cdf = np.asarray(kernel.logcdf(lower, params_lo), dtype=float)
    hi_sf = np.asarray(kernel.logsf(upper, params_hi), dtype=float)
    lo_sf = np.asarray(kernel.logsf(lower, params_lo), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        via_cdf = hi_cdf + np.log1p(-np.exp(lo_cdf - hi_cdf))
        via_sf = lo_sf + np.log1p(-np.exp(hi_sf - lo_sf))
    # work in whichever tail holds the smaller probabilities
    out = np.where(hi_cdf < lo_sf, via_cdf, via_sf)
    return np.where(np.isnan(out), -np.inf, out)


def obs_loglik(obs: Observation, mu: float, err: ErrorModel) -> float:
    """
    Log-likelihood contribution of one observation.

    Args:
        obs: The observation; censored rows use the bounds of ``obs.censor``
            and fall back to ``obs.response``
        mu: Location of the row (finite)
        err: Error kernel, quantile level and error parameters

    Returns:
        log f(y), log F(b), log(1 - F(b)) or log(F(u) - F(l))
    """
    kernel = err_kernel(err)
    params = err.params(mu)
    kind = obs.censor.kind
    if kind == CensorKind.OBSERVED:
        return float(kernel.logpdf(obs.response, params))
    if kind == CensorKind.LEFT:
        bound = obs.censor.upper if obs.censor.upper is not None else obs.response
        return float(kernel.logcdf(bound, params))
    if kind == CensorKind.RIGHT:
        bound = obs.censor.lower if obs.censor.lower is not None else obs.response
        return float(kernel.logsf(bound, params))
    return float(_log_interval(kernel, obs.censor.lower, obs.censor.upper, params, params))


def err_kernel(err: ErrorModel) -> ErrorKernel:
    return kernel_registry.get_kernel(err.kernel)


def row_logliks(
    kernel: ErrorKernel,
    err: ErrorModel,
    mu: np.ndarray,
    response: np.ndarray,
    upper: np.ndarray,
    censor: np.ndarray,
) -> np.ndarray:
    """
    Per-row log-likelihood terms for arrays of rows.

    Each censoring kind is evaluated only on its own rows.
    """
    out = np.empty(mu.shape[0])

    def params(mask):
        return err.params(mu[mask], validate=False)

    for code, fn in ((OBSERVED, kernel.logpdf), (LEFT, kernel.logcdf), (RIGHT, kernel.logsf)):
        mask = censor == code
        if mask.any():
            out[mask] = fn(response[mask], params(mask))
    mask = censor == INTERVAL
    if mask.any():
        p = params(mask)
        out[mask] = _log_interval(kernel, response[mask], upper[mask], p, p)
    return out


def cd4_values(data: Dataset, spec: ModelSpec) -> Optional[np.ndarray]:
    if not spec.link_fn.uses_cd4:
        return None
    return data.covariate(spec.cd4_column)


def _as_parameters(theta: Union[ModelParameters, ParameterVector]) -> ModelParameters:
    if isinstance(theta, ParameterVector):
        return theta.constrain()[0]
    return theta


def _valid_error(params: ModelParameters) -> bool:
    values = [params.sigma, params.kappa1, params.kappa2]
    return all(x is None or (math.isfinite(x) and x > 0.0) for x in values)


def log_likelihood(
    data: Dataset,
    theta: Union[ModelParameters, ParameterVector],
    spec: ModelSpec,
) -> float:
    """
    Sum of per-row censored log-likelihood terms.

    Args:
        data: Dataset
        theta: Parameters (constrained, or a ParameterVector to constrain)
        spec: Model specification

    Returns:
        Total log-likelihood, possibly ``-inf``
    """
    params = _as_parameters(theta)
    if not _valid_error(params):
        return -math.inf
    mu = spec.link_fn.evaluate(data.time, params.beta, params.v[data.subject], params.gamma, cd4_values(data, spec))
    terms = row_logliks(spec.kernel_fn, params.error_model(spec), mu, data.response, data.upper, data.censor)
    return float(np.sum(terms))


def log_prior_terms(params: ModelParameters, priors: PriorSpec, spec: ModelSpec) -> dict:
    """Log-prior split by component, used for diagnosing bad starts."""
    terms = {
        "beta": float(np.sum(normal_logpdf(params.beta, priors.beta_variance))),
        "sigma": half_t_logpdf(params.sigma, priors.scale_df, priors.scale_scale),
    }
    if params.gamma is not None:
        terms["gamma"] = normal_logpdf(params.gamma, priors.beta_variance)
    if spec.has_kappas:
        kappas = [params.kappa1] if spec.tie_kappas else [params.kappa1, params.kappa2]
        terms["kappa"] = float(sum(priors.kappa.logpdf(k) for k in kappas))
    q = params.lv.shape[0]
    diag = np.diag(params.lv)
    terms["Lv"] = (
        float(np.sum(half_t_logpdf(diag, priors.scale_df, priors.scale_scale)))
        + float(np.sum(normal_logpdf(params.lv[np.tril_indices(q, -1)], priors.offdiag_variance)))
    )
    terms["v"] = float(np.sum(random_effects_logdensity(params.v, params.lv)))
    return terms


def log_prior(
    theta: Union[ModelParameters, ParameterVector],
    priors: PriorSpec,
    spec: Optional[ModelSpec] = None,
) -> float:
    """
    Log prior density.

    Normal terms for beta, gamma and the off-diagonal of L_v; half-t terms
    for sigma and diag(L_v); the configured prior for each tail shape; and
    the random-effects density of every subject.

    Args:
        theta: Parameters
        priors: Hyperparameters
        spec: Model specification (defaults to an SEP model when omitted)

    Returns:
        Log prior, ``-inf`` outside a uniform support
    """
    params = _as_parameters(theta)
    spec = spec or ModelSpec(kernel="sep" if params.kappa1 is not None else "sl", priors=priors)
    return float(sum(log_prior_terms(params, priors, spec).values()))


def log_posterior_unconstrained(
    theta_unc: np.ndarray,
    data: Dataset,
    spec: ModelSpec,
    layout: Optional[ParameterLayout] = None,
) -> float:
    """
    Unnormalized log posterior on the unconstrained scale.

    Args:
        theta_unc: Flat unconstrained vector
        data: Dataset
        spec: Model specification
        layout: Parameter layout (built from ``spec`` and ``data`` if omitted)

    Returns:
        log-likelihood + log-prior + log-Jacobian

    Raises:
        NumericError: If the result is NaN
    """
    layout = layout or ParameterLayout(spec, data.n_subjects)
    params, log_jac = layout.constrain(theta_unc)
    ll = log_likelihood(data, params, spec)
    lp = log_prior(params, spec.priors, spec)
    total = ll + lp + log_jac
    if math.isnan(total):
        component = "likelihood" if math.isnan(ll) else "prior" if math.isnan(lp) else "jacobian"
        raise NumericError("log posterior evaluated to NaN", component=component)
    return total


class QMMPosterior:
    """
    Unconstrained log posterior of the quantile mixed model.

    Exposes the block interface used by the sampler: subject blocks only
    evaluate that subject's rows plus its random-effects density.
    """

    def __init__(self, data: Dataset, spec: ModelSpec):
        """
        Initialize the posterior.

        Args:
            data: Dataset
            spec: Model specification
        """
        self.data = data
        self.spec = spec
        self.layout = ParameterLayout(spec, data.n_subjects)
        self.kernel = spec.kernel_fn
        self.link = spec.link_fn
        self.cd4 = cd4_values(data, spec)
        self.rows = data.subject_rows()
        self._start: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.layout.dim

    def blocks(self, plan: str = "grouped") -> List[Block]:
        return self.layout.blocks(plan)

    def log_density(self, u: np.ndarray) -> float:
        return log_posterior_unconstrained(u, self.data, self.spec, self.layout)

    __call__ = log_density

    def block_log_density(self, u: np.ndarray, block: Block) -> float:
        """Log density up to terms that do not depend on ``block``."""
        if block.kind != BlockKind.SUBJECT:
            return self.log_density(u)
        params, _ = self.layout.constrain(u)
        rows = self.rows[block.subject]
        v = params.v[block.subject]
        cd4 = None if self.cd4 is None else self.cd4[rows]
        mu = self.link.evaluate(self.data.time[rows], params.beta, v, params.gamma, cd4)
        terms = row_logliks(
            self.kernel, params.error_model(self.spec), np.atleast_1d(mu),
            self.data.response[rows], self.data.upper[rows], self.data.censor[rows],
        )
        total = float(np.sum(terms)) + random_effects_logdensity(v, params.lv)
        if math.isnan(total):
            raise NumericError("log posterior evaluated to NaN", component=block.name)
        return total

    def diagnose(self, u: np.ndarray) -> str:
        """Name of the first component that is not finite at ``u``."""
        params, log_jac = self.layout.constrain(u)
        if not _valid_error(params):
            return "error parameters"
        for name, value in log_prior_terms(params, self.spec.priors, self.spec).items():
            if not math.isfinite(value):
                return f"prior:{name}"
        if not math.isfinite(log_jac):
            return "jacobian"
        mu = self.link.evaluate(self.data.time, params.beta, params.v[self.data.subject], params.gamma, self.cd4)
        if not np.all(np.isfinite(mu)):
            return "link"
        terms = row_logliks(self.kernel, params.error_model(self.spec), mu,
                            self.data.response, self.data.upper, self.data.censor)
        bad = np.flatnonzero(~np.isfinite(terms))
        if bad.size:
            return f"likelihood:row {int(bad[0]) + 1}"
        return "none"

    def _start_beta(self) -> np.ndarray:
        data = self.data
        rows = data.uncensored if data.uncensored.sum() >= self.layout.n_beta else np.ones(data.n_obs, bool)
        t, y = data.time[rows], data.response[rows]
        cd4 = None if self.cd4 is None else self.cd4[rows]
        zero_v = np.zeros(self.layout.q)

        if self.link.uses_cd4:
            level = float(np.quantile(y, 0.9)) * math.log(10.0)
            x0 = np.array([level + math.log(0.9), 0.5, level + math.log(0.1), 0.05])
        else:
            slope = float(np.polyfit(t, y, 1)[0]) if np.ptp(t) > 0 else 0.0
            x0 = np.array([float(np.mean(y)) - slope * float(np.mean(t)), slope])

        def residuals(beta):
            return self.link.evaluate(t, beta, zero_v, 0.0 if cd4 is not None else None, cd4) - y

        try:
            fit = least_squares(residuals, x0, loss="soft_l1")
            if np.all(np.isfinite(fit.x)):
                return fit.x
        except (ValueError, np.linalg.LinAlgError) as e:
            logger.debug(f"Least-squares start failed, using heuristic start: {e}")
        return x0

    def _cached_start_beta(self) -> np.ndarray:
        if self._start is None:
            self._start = self._start_beta()
        return self._start.copy()

    def initial_point(self, rng: Optional[np.random.Generator] = None, jitter: float = 0.0) -> np.ndarray:
        """
        Starting point: least-squares fixed effects, v = 0, sigma = 1,
        unit tail shapes (clipped into a uniform prior) and L_v = I.

        Args:
            rng: Generator for the optional jitter
            jitter: Standard deviation of normal noise added to the fixed
                effect and error coordinates

        Returns:
            Unconstrained vector
        """
        layout = self.layout
        kappa = 1.0
        prior = self.spec.priors.kappa
        if prior.kind == KappaPriorKind.UNIFORM and not prior.lower < kappa < prior.upper:
            kappa = 0.5 * (prior.lower + prior.upper)
        params = ModelParameters.model_construct(
            beta=self._cached_start_beta(),
            gamma=0.0 if layout.has_gamma else None,
            sigma=1.0,
            kappa1=kappa if self.spec.has_kappas else None,
            kappa2=kappa if self.spec.has_kappas else None,
            lv=np.eye(layout.q),
            v=np.zeros((layout.n_subjects, layout.q)),
        )
        u = layout.unconstrain(params)
        if rng is not None and jitter > 0.0:
            idx = np.r_[layout.beta_slice, layout.gamma_slice, layout.sigma_slice, layout.kappa_slice]
            idx = np.arange(layout.dim)[idx]
            u[idx] += rng.normal(0.0, jitter, size=idx.size)
        return u

    def find_start(self, rng: np.random.Generator, jitter: float, attempts: int) -> np.ndarray:
        """
        First start with a finite log posterior.

        Raises:
            InitializationError: If every attempt is ``-inf``; the message
                names the offending component of the last attempt
        """
        u = self.initial_point(rng, jitter)
        for attempt in range(max(attempts, 1)):
            if attempt > 0:
                # widen the jitter on every restart
                u = self.initial_point(rng, max(jitter, 0.1) * (attempt + 1))
            if math.isfinite(self.log_density(u)):
                return u
        raise InitializationError(
            f"log posterior is -inf at all {attempts} starting points",
            component=self.diagnose(u),
        )


def subject_logliks(data: Dataset, params: ModelParameters, spec: ModelSpec) -> np.ndarray:
    """Per-subject log-likelihood sums."""
    mu = spec.link_fn.evaluate(data.time, params.beta, params.v[data.subject], params.gamma, cd4_values(data, spec))
    terms = row_logliks(spec.kernel_fn, params.error_model(spec), mu, data.response, data.upper, data.censor)
    return np.bincount(data.subject, weights=terms, minlength=data.n_subjects)


def population_curve(
    spec: ModelSpec,
    params: ModelParameters,
    time: Sequence[float],
    cd4: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """Link evaluated with all random effects at zero."""
    t = np.asarray(time, dtype=float)
    v = np.zeros(spec.q)
    c = None if cd4 is None else np.asarray(cd4, dtype=float)
    return spec.link_fn.evaluate(t, params.beta, v, params.gamma, c)
