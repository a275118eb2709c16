"""Built-in coefficient families."""

from __future__ import annotations

from functools import partial

import numpy as np

from ..core.errors import ConfigurationError
from .models import CoefficientFamily, CoefficientSet


def _constant(value: float, u: np.ndarray) -> np.ndarray:
    return np.full_like(np.asarray(u, dtype=float), value)


def _sqrt(u: np.ndarray) -> np.ndarray:
    return np.sqrt(np.maximum(u, 0.0))


def _identity(u: np.ndarray) -> np.ndarray:
    return np.asarray(u, dtype=float).copy()


def _logistic(theta: float, u: np.ndarray) -> np.ndarray:
    return theta - np.asarray(u, dtype=float)


def _stepping_stone_drift(q: float, r_sel: float, u: np.ndarray) -> np.ndarray:
    # a(u)/u with p = 0, extended continuously to u = 0
    return q + r_sel * (1.0 - np.asarray(u, dtype=float))


def _stepping_stone_noise(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return np.sqrt(np.maximum(u, 0.0) * np.maximum(1.0 - u, 0.0))


def _brwre_noise(u: np.ndarray) -> np.ndarray:
    u = np.maximum(u, 0.0)
    return np.sqrt(u + u * u)


def _half_negative(u: np.ndarray) -> np.ndarray:
    return -0.5 * np.asarray(u, dtype=float)


def catalog(
    family: CoefficientFamily | str,
    *,
    beta: float = 0.0,
    theta: float = 1.0,
    p: float = 0.0,
    q: float = 0.0,
    r_sel: float = 0.0,
) -> CoefficientSet:
    """Return a catalog family tagged with growth parameters that hold on all of [0, inf).

    ``beta`` applies to sbm, ``theta`` to contact_limit and ``p``, ``q``,
    ``r_sel`` to stepping_stone.
    """
    try:
        family = CoefficientFamily(family)
    except ValueError:
        known = ", ".join(f.value for f in CoefficientFamily)
        raise ConfigurationError(f"unknown coefficient family {family!r} (known: {known})") from None

    if family is CoefficientFamily.SBM:
        return CoefficientSet(
            b=partial(_constant, float(beta)),
            sigma=_sqrt,
            r=0.5,
            L_b=max(beta, 0.0),
            l_b=max(-beta, 0.0),
            L_sigma=1.0,
            label=family.value,
        )
    if family is CoefficientFamily.STEPPING_STONE:
        if p != 0.0:
            raise ConfigurationError(
                f"stepping_stone needs p = 0: a(0) = p = {p} is not of the form b(u)u"
            )
        if q < 0.0 or r_sel < 0.0:
            raise ConfigurationError(f"stepping_stone needs q >= 0 and r_sel >= 0, got q={q}, r_sel={r_sel}")
        return CoefficientSet(
            b=partial(_stepping_stone_drift, float(q), float(r_sel)),
            sigma=_stepping_stone_noise,
            r=0.5,
            L_b=q + r_sel,
            l_b=r_sel,
            L_sigma=1.0,
            label=family.value,
        )
    if family is CoefficientFamily.CONTACT_LIMIT:
        if theta < 0.0:
            raise ConfigurationError(f"contact_limit needs theta >= 0, got {theta}")
        return CoefficientSet(
            b=partial(_logistic, float(theta)),
            sigma=_sqrt,
            theta=1.0,
            r=0.5,
            L_b=theta,
            l_b=1.0,
            L_sigma=1.0,
            label=family.value,
        )
    if family is CoefficientFamily.KPZ:
        return CoefficientSet(b=partial(_constant, 0.0), sigma=_identity, r=1.0, L_sigma=1.0, label=family.value)
    if family is CoefficientFamily.BRWRE:
        return CoefficientSet(b=partial(_constant, 0.0), sigma=_brwre_noise, r=0.5, L_sigma=1.0, label=family.value)
    return CoefficientSet(
        b=_half_negative,
        sigma=_identity,
        theta=1.0,
        r=1.0,
        l_b=0.5,
        L_sigma=1.0,
        label=family.value,
    )
