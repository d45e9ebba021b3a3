"""Row generators behind the CLI subcommands.

Each ``*_rows`` function returns (header, rows). Rows are tuples in a fixed
outer-to-inner order; per-point work goes through ``pmap`` so serial and
parallel runs give the same output.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable, Iterable, Sequence

import numpy as np

from . import fock
from .errors import SingularFisherMatrix
from .metrology import bounds, closed, compat
from .metrology.qfi import numeric_qfi, numeric_qfi_matrix
from .metrology.superchannel import superchannel_max
from .protocols import sru1_state, sru1_two_axis
from .spin import as_spin, oat_phases, scs_x
from .wigner import SphericalGrid, wigner_function, wigner_rows


def pmap(fn: Callable, items: Sequence, jobs: int = 1) -> list:
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _product(*axes: Iterable):
    grid = [()]
    for ax in axes:
        grid = [g + (x,) for g in grid for x in ax]
    return grid


def _gen_axis(kind: str, phi: float, convention: str) -> float:
    """Generator angle for a row angle given in ``convention``."""
    return closed.to_formula_axis(kind, phi) if convention == "formula" else phi


def _form_axis(kind: str, phi: float, convention: str) -> float:
    return phi if convention == "formula" else closed.to_formula_axis(kind, phi)


# --- qfi surfaces ----------------------------------------------------------------

def _surface_point(p, s_m, s_p, gamma, convention, oracle):
    mu, phi = p
    c = float(closed.closed_qfi_sru2_gamma(s_m, s_p, _form_axis("sru2_gamma", phi, convention), mu))
    if not oracle:
        return (as_spin(s_m).value, as_spin(s_p).value, mu, phi, c)
    n = closed.numeric_qfi_sru2_gamma(s_m, s_p, _gen_axis("sru2_gamma", phi, convention), mu, gamma)
    return (as_spin(s_m).value, as_spin(s_p).value, mu, phi, c, n, abs(c - n))


def qfi_surface_rows(s_m, s_p, mus, phis, gamma=0.3, convention="formula", oracle=True, jobs=1):
    header = ["s_m", "s_p", "mu", "phi", "qfi_closed"] + (["qfi_numeric", "abs_diff"] if oracle else [])
    fn = partial(_surface_point, s_m=s_m, s_p=s_p, gamma=gamma, convention=convention, oracle=oracle)
    return header, pmap(fn, _product(mus, phis), jobs)


def _single_point(p, s, gamma, oracle):
    mu, phi = p
    c = float(closed.closed_qfi_sru1_gamma(s, phi, mu))
    if not oracle:
        return (as_spin(s).value, mu, phi, c)
    n = closed.numeric_qfi_sru1_gamma(s, phi, mu, gamma)
    return (as_spin(s).value, mu, phi, c, n, abs(c - n))


def qfi_single_rows(s, mus, phis, gamma=0.3, oracle=True, jobs=1):
    """Single-spin surface; phi is a generator angle for the single-spin form."""
    header = ["s_m", "mu", "phi", "qfi_closed"] + (["qfi_numeric", "abs_diff"] if oracle else [])
    return header, pmap(partial(_single_point, s=s, gamma=gamma, oracle=oracle), _product(mus, phis), jobs)


# --- multiparameter --------------------------------------------------------------

def _matrix_entries(s_m, s_p, phi1, phi2, mu, convention):
    M = closed.closed_qfi_matrix(s_m, s_p, phi1, phi2, mu, physical=(convention == "generator"))
    return M.I


def _numeric_entries(s_m, s_p, phi1, phi2, mu, convention):
    """Numeric counterpart of ``_matrix_entries``.

    In formula convention each entry is checked at its own generator angles;
    in generator convention the matrix comes from a single state.
    """
    if convention == "generator":
        return closed.numeric_qfi_two_rotations(s_m, s_p, phi1, phi2, mu).I
    i11 = closed.numeric_qfi_sru2_gamma(s_m, s_p, _gen_axis("sru2_gamma", phi1, "formula"), mu)
    i22 = closed.numeric_qfi_sru2_gamma(s_p, s_m, _gen_axis("sru2_gamma", phi2, "formula"), mu)
    g1, g2 = _gen_axis("offdiag", phi1, "formula"), _gen_axis("offdiag", phi2, "formula")
    i12 = closed.numeric_qfi_two_rotations(s_m, s_p, g1, g2, mu).I[0, 1]
    return np.array([[i11, i12], [i12, i22]])


def _multiparam_point(p, s, convention, oracle):
    mu, phi1, phi2 = p
    I = _matrix_entries(s, s, phi1, phi2, mu, convention)
    try:
        vb = bounds.variance_bounds(I)
        tail = (vb.info_g1, vb.var_g1, vb.var_g2, "ok")
    except SingularFisherMatrix:
        tail = (math.nan, math.nan, math.nan, "singular")
    row = (as_spin(s).value, mu, phi1, phi2, I[0, 0], I[1, 1], I[0, 1]) + tail
    if oracle:
        N = _numeric_entries(s, s, phi1, phi2, mu, convention)
        row += (float(np.max(np.abs(N - I))),)
    return row


def multiparam_rows(s, mus, phi1s, phi2s, convention="formula", oracle=True, jobs=1):
    header = ["s", "mu", "phi1", "phi2", "i11", "i22", "i12", "fig5_bound", "var_bound_g1",
              "var_bound_g2", "status"] + (["oracle_max_diff"] if oracle else [])
    fn = partial(_multiparam_point, s=s, convention=convention, oracle=oracle)
    return header, pmap(fn, _product(mus, phi1s, phi2s), jobs)


def _rot_diff_point(p, s1, s2, convention, oracle):
    mu, phi = p
    I = _matrix_entries(s1, s2, phi, phi, mu, convention)
    try:
        un, co = bounds.rot_diff_bounds(I, phi, phi)
        status = "ok"
    except SingularFisherMatrix:
        un, co, status = math.nan, math.nan, "singular"
    row = (as_spin(s1).value, as_spin(s2).value, mu, phi, un, co, status)
    if oracle:
        N = _numeric_entries(s1, s2, phi, phi, mu, convention)
        try:
            nu, nc = bounds.rot_diff_bounds(N)
        except SingularFisherMatrix:
            nu, nc = math.nan, math.nan
        row += (nu, nc)
    return row


def rot_diff_rows(s1, s2, mus, phis, convention="formula", oracle=True, jobs=1):
    header = ["s1", "s2", "mu", "phi", "i_tilde", "i_tilde_corr", "status"] + (
        ["i_tilde_numeric", "i_tilde_corr_numeric"] if oracle else [])
    fn = partial(_rot_diff_point, s1=s1, s2=s2, convention=convention, oracle=oracle)
    return header, pmap(fn, _product(mus, phis), jobs)


# --- sld sign map ------------------------------------------------------------------

def _sld_point(p, j, mu, oracle):
    gamma, phi = p
    c = float(compat.closed_sld_commutator_gamma_phi(j, j, gamma, phi, mu))
    row = (as_spin(j).value, mu, gamma, phi, c, int(np.sign(c)) if abs(c) > 1e-12 else 0)
    if oracle:
        row += (compat.sld_commutator_gamma_phi(j, j, gamma, phi, mu),)
    return row


def sld_map_rows(j, mu, gammas, phis, oracle=True, jobs=1):
    """Mean SLD commutator Tr(rho[L_gamma, L_phi])/i; phi is a generator angle."""
    header = ["j", "mu", "gamma", "phi", "comm_closed", "sign"] + (["comm_numeric"] if oracle else [])
    return header, pmap(partial(_sld_point, j=j, mu=mu, oracle=oracle), _product(gammas, phis), jobs)


# --- two-axis ------------------------------------------------------------------------

def _two_axis_point(p, s, gamma):
    mu, phi = p
    q = numeric_qfi(lambda g: sru1_two_axis(s, g, phi, mu), gamma)
    return (as_spin(s).value, mu, phi, q, 4 * as_spin(s).value ** 2)


def two_axis_rows(s, mus, phis, gamma=0.3, jobs=1):
    header = ["s", "mu", "phi", "qfi_numeric", "heisenberg"]
    return header, pmap(partial(_two_axis_point, s=s, gamma=gamma), _product(mus, phis), jobs)


def longest_flat_run(mus, values_by_phi: np.ndarray, threshold: float) -> float:
    """Width of the longest mu interval where the spread over phi stays below ``threshold``."""
    spread = values_by_phi.max(axis=1) - values_by_phi.min(axis=1)
    best, start = 0.0, None
    for i, flat in enumerate(spread < threshold):
        if flat and start is None:
            start = i
        if start is not None and (not flat or i == len(mus) - 1):
            end = i if flat else i - 1
            best = max(best, mus[end] - mus[start])
            start = None
    return best


# --- wigner --------------------------------------------------------------------------

def wigner_state(s, mu, gamma=0.0, phi=0.0):
    """OAT-squeezed X coherent state, optionally followed by an SRU rotation."""
    if gamma == 0.0:
        return oat_phases(s, mu) * scs_x(s).vec
    return sru1_state(s, gamma, phi, mu).vec


def wigner_table(s, mu, gamma=0.0, phi=0.0, n_theta=181, n_phi=360):
    header = ["theta", "phi", "w_normalized", "w_raw"]
    th, ph, w, raw = wigner_function(wigner_state(s, mu, gamma, phi), s, SphericalGrid(n_theta, n_phi))
    return header, list(wigner_rows(th, ph, w, raw))


# --- reports -------------------------------------------------------------------------

def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def sdu_report(rs: Sequence[float], alpha=0.1, beta=0.1, tol=1e-3):
    """(check, expected, measured, rel_dev, pass) rows for the SDU anchors."""
    rows = []
    for r in rs:
        n1 = fock.auto_cutoff(fock.sdu1_state, alpha, beta, r)
        Q1 = numeric_qfi_matrix(lambda t: fock.sdu1_state(t[0], t[1], r, n1).vec, [alpha, beta])
        n2 = fock.auto_cutoff(fock.sdu2_state, alpha, beta, r)
        Q2 = numeric_qfi_matrix(lambda t: fock.sdu2_state(t[0], t[1], r, n2).vec, [alpha, beta])
        checks = [
            (f"single I_alpha r={r:g} (n_max={n1})", 4 * math.exp(2 * r), Q1.I[0, 0]),
            (f"single I_beta r={r:g} (n_max={n1})", 4 * math.exp(-2 * r), Q1.I[1, 1]),
            (f"single C/i r={r:g}", 8.0, Q1.C[0, 1].imag),
            (f"two-mode I_alpha r={r:g} (n_max={n2})", 8 * math.cosh(2 * r), Q2.I[0, 0]),
            (f"two-mode I_beta r={r:g}", 8 * math.cosh(2 * r), Q2.I[1, 1]),
            (f"two-mode C/i r={r:g}", 16.0, Q2.C[0, 1].imag),
        ]
        for name, exp, got in checks:
            d = _rel(got, exp)
            rows.append((name, exp, float(got), d, d <= tol))
    return rows


def superchannel_report(ns: Sequence[int], restarts=8, seed=0):
    rows = []
    for n in ns:
        res = superchannel_max(n, restarts=restarts, seed=seed)
        rows.append((f"ansatz N={n}", res.bound, res.ansatz_qfi, abs(res.ansatz_qfi - res.bound),
                     abs(res.ansatz_qfi - res.bound) <= 1e-8))
        rows.append((f"search N={n} <= 4N^2", res.bound, res.best_search, res.best_search - res.bound,
                     res.best_search <= res.bound + 1e-6))
    return rows
