"""Resolvents and spectrum localization by scanning determinant components.

``lambda`` is in the spectrum exactly when some component of the determinant
of ``lambda I - A`` vanishes at some cell. ``spectrum_scan`` samples a grid of
``lambda`` values, records the smallest ``|pi_alpha|`` per component, and flags
samples that fall under a threshold. Grouping the flags by (subset, cell)
gives sampled dispersion branches.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import MixedOperator, identity_operator, linear_combine, norm_L
from .errors import NotInvertible
from .factorization import factorize, inverse
from .staircase import Subset, subsets_ascending

DEFAULT_THRESHOLD_RTOL = 1e-8


def shifted(A: MixedOperator, lam: complex) -> MixedOperator:
    """``lam I - A``."""
    return linear_combine(lam, identity_operator(A.N, A.M, A.p), -1.0, A)


def resolvent(A: MixedOperator, lam: complex) -> MixedOperator:
    return inverse(shifted(A, lam))


def default_threshold(A: MixedOperator, lam: complex, a_norm: float | None = None) -> float:
    if a_norm is None:
        a_norm = norm_L(A)
    return DEFAULT_THRESHOLD_RTOL * (1.0 + abs(lam) + a_norm)


@dataclass
class ComponentRecord:
    min_abs_pi: float | None = None
    argmin_cell: tuple | None = None
    undefined_at: tuple | None = None  # (subset, cell) of the earlier singular factor

    @property
    def defined(self) -> bool:
        return self.undefined_at is None


@dataclass
class SpectrumReport:
    grid: list
    records: list                 # per lambda: {subset: ComponentRecord}
    flagged: list = field(default_factory=list)  # (subset, cell, lambda)
    thresholds: list = field(default_factory=list)

    def flagged_lambdas(self, alpha: Subset | None = None) -> list:
        return [lam for a, _, lam in self.flagged if alpha is None or a == tuple(alpha)]

    def branches(self) -> dict:
        """Flagged lambdas grouped by (subset, cell): sampled dispersion data."""
        out: dict = {}
        for a, cell, lam in self.flagged:
            out.setdefault((a, cell), []).append(lam)
        return out


def _record(values: np.ndarray) -> ComponentRecord:
    mags = np.abs(values)
    b = int(np.argmin(mags))
    cell = tuple(int(c) for c in np.unravel_index(b, mags.shape)) if mags.ndim else ()
    return ComponentRecord(float(mags.reshape(-1)[b]), cell)


def scan_point(A: MixedOperator, lam: complex):
    """Per-subset records and raw determinant components for a single ``lam``."""
    subsets = subsets_ascending(A.N)
    try:
        dets = factorize(shifted(A, lam), check_residue=False).dets
        hit = None
    except NotInvertible as exc:
        dets = exc.partial
        hit = (exc.alpha, exc.cell)
    out = {}
    for alpha in subsets:
        if alpha in dets:
            out[alpha] = _record(dets[alpha])
        else:
            out[alpha] = ComponentRecord(undefined_at=hit)
    return out, dets


def spectrum_scan(A: MixedOperator, grid, threshold: float | None = None) -> SpectrumReport:
    grid = [complex(g) for g in grid]
    if not grid:
        raise ValueError("grid must be nonempty")
    if threshold is not None and threshold <= 0:
        raise ValueError("threshold must be positive")
    a_norm = norm_L(A)
    report = SpectrumReport(grid, [])
    for lam in grid:
        thr = threshold if threshold is not None else default_threshold(A, lam, a_norm)
        recs, dets = scan_point(A, lam)
        report.records.append(recs)
        report.thresholds.append(thr)
        for alpha, rec in recs.items():
            if not rec.defined or rec.min_abs_pi > thr:
                continue
            mags = np.abs(dets[alpha])
            for idx in np.argwhere(mags <= thr) if mags.ndim else [()]:
                report.flagged.append((alpha, tuple(int(c) for c in idx), lam))
    return report


def parse_range(text: str) -> np.ndarray:
    """``"a:b:n"`` -> ``n`` evenly spaced points from a to b inclusive."""
    try:
        a, b, n = text.split(":")
        n = int(n)
        if n < 1:
            raise ValueError
        return np.linspace(float(a), float(b), n)
    except ValueError as exc:
        raise ValueError(f"bad range {text!r}; expected start:stop:count") from exc


def make_grid(re_text: str, im_text: str | None = None) -> list:
    re = parse_range(re_text)
    im = parse_range(im_text) if im_text else np.zeros(1)
    return [complex(x, y) for y in im for x in re]
