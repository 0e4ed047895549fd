"""Outer factor, left unitary factor and the Douglas-Shapiro-Shields
factorization.

Pipeline: ``R -> Psi`` (invertible outer, ``R*R = Psi*Psi``),
``Xi = R Psi^{-1}`` (unitary on the circle), ``Xi = V W*`` with `V`, `W`
bi-inner and given by unitary realizations, plus the coupling matrix `X`
with ``X - A_V X A_W* = B_V B_W*``.
"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg as sla

from .errors import NonInvertibleP0, SpectraNotDisjoint, UnitarityCheckFailed
from .linalg import DEFAULT_TOL, ct, norm2, spectral_radius, unitary_completion
from .realization import (
    TwoSidedRealization,
    circle_grid,
    evaluate_many,
    product_data,
)
from .solvers import (
    gramian_factor,
    solve_constrained_sylvester,
    solve_dare,
    solve_stein,
    solve_sylvester,
    sylvester_separation,
)
from .staircase import controllable_subspace, minimal_part, system_scale

log = logging.getLogger(__name__)

__all__ = [
    "OuterFactor",
    "UnitaryFactorRealization",
    "BiInnerRealization",
    "DssFactorization",
    "outer_factor",
    "left_unitary_factor",
    "minimal_reduce",
    "dss_factorize",
    "zero_pole_coupling",
    "spectra_separated",
    "change_state",
    "reconstruct_from_coupling",
    "verify_unitary_identities",
    "controllability_observability",
    "coupling_realization",
    "coupling_matrix_toeplitz",
]

CHECK_SAMPLES = 64
UNITARITY_FAIL = 1e-8


def _max_dev(F, G):
    return float(np.max(np.linalg.norm(F - G, ord=2, axis=(1, 2)))) if F.size else 0.0


def _unitarity_defect(vals):
    if not vals.size:
        return 0.0
    eye = np.eye(vals.shape[1])
    return float(np.max(np.linalg.norm(np.conj(np.swapaxes(vals, 1, 2)) @ vals - eye, ord=2, axis=(1, 2))))


@dataclass(frozen=True, eq=False)
class OuterFactor:
    """``Psi(z) = D + z Cout (I - z AtildeStar)^{-1} B0`` with ``Cout = D^{-1} C0``.

    Its inverse is ``D^{-1} - z D^{-2} C0 (I - z A0)^{-1} B0 D^{-1}``.
    """

    D: np.ndarray
    Cout: np.ndarray
    AtildeStar: np.ndarray
    B0: np.ndarray
    A0: np.ndarray
    C0: np.ndarray
    dare: object = None
    product: object = None
    residuals: dict = field(default_factory=dict)

    @property
    def psi(self):
        return TwoSidedRealization.build(self.D, (self.AtildeStar, self.B0, self.Cout))

    @property
    def psi_inv(self):
        Dinv = np.linalg.inv(self.D)
        return TwoSidedRealization.build(
            Dinv, (self.A0, self.B0 @ Dinv, -Dinv @ Dinv @ self.C0)
        )


def outer_factor(r, samples=CHECK_SAMPLES, pd=None, dare=None):
    """Invertible outer factor of `r` from the stabilizing Riccati solution.

    `pd` and `dare` may be passed in when the caller already computed them.
    """
    pd = product_data(r) if pd is None else pd
    sol = solve_dare(pd) if dare is None else dare
    Dinv = np.linalg.inv(sol.D)
    psi = OuterFactor(
        D=sol.D, Cout=Dinv @ sol.C0, AtildeStar=ct(pd.Atilde), B0=sol.B0,
        A0=sol.A0, C0=sol.C0, dare=sol, product=pd,
    )
    zs = circle_grid(samples)
    Rv = evaluate_many(r, zs)
    Pv = evaluate_many(psi.psi, zs)
    Piv = evaluate_many(psi.psi_inv, zs)
    RtR = np.conj(np.swapaxes(Rv, 1, 2)) @ Rv
    PtP = np.conj(np.swapaxes(Pv, 1, 2)) @ Pv
    rn = np.max(np.linalg.norm(Rv, ord=2, axis=(1, 2))) if r.m else 0.0
    eye = np.eye(r.m)
    psi.residuals.update(
        spectral_identity=_max_dev(RtR, PtP) / (1.0 + rn ** 2),
        inverse=_max_dev(Pv @ Piv, np.broadcast_to(eye, Pv.shape)),
        riccati=sol.residual,
        closed_loop_radius=sol.closed_loop_radius,
    )
    return psi


@dataclass(frozen=True, eq=False)
class UnitaryFactorRealization:
    """``Xi(z) = Xi0 + gamma (zI - alpha)^{-1} beta1 + z C1 (I - z A0)^{-1} B0 D^{-1}``."""

    Xi0: np.ndarray
    alpha: np.ndarray
    beta1: np.ndarray
    gamma: np.ndarray
    A0: np.ndarray
    B0: np.ndarray
    C1: np.ndarray
    D: np.ndarray
    Y: np.ndarray = None
    reduction: dict = None
    residuals: dict = field(default_factory=dict)

    @property
    def B1(self):
        return self.B0 @ np.linalg.inv(self.D)

    @property
    def m(self):
        return self.Xi0.shape[0]

    @property
    def realization(self):
        return TwoSidedRealization.build(
            self.Xi0, (self.A0, self.B1, self.C1), (self.alpha, self.beta1, self.gamma)
        )


def left_unitary_factor(r, psi, samples=CHECK_SAMPLES):
    """Realization of ``Xi = R Psi^{-1}`` sharing the plus state of ``Psi^{-1}``.

    Raises :class:`UnitarityCheckFailed` if ``Xi`` deviates from unitary on
    the sample grid by more than 1e-8.
    """
    D, C0, B0, A0 = psi.D, psi.C0, psi.B0, psi.A0
    Dinv = np.linalg.inv(D)
    Dinv2 = Dinv @ Dinv
    al, be, ga = r.alpha, r.beta, r.gamma
    Y = solve_stein(al, A0, al @ be @ Dinv2 @ C0)
    Xi0 = r.R0 @ Dinv - ga @ Y @ A0 @ B0 @ Dinv - ga @ be @ Dinv2 @ C0 @ B0 @ Dinv
    C_pad = np.hstack([r.C, np.zeros((r.m, r.n_minus), dtype=np.complex128)])
    C1 = C_pad - r.R0 @ Dinv2 @ C0 - ga @ Y @ A0 @ A0 - ga @ be @ Dinv2 @ C0 @ A0
    beta1 = (be - Y @ B0) @ Dinv
    xi = UnitaryFactorRealization(
        Xi0=Xi0, alpha=al.copy(), beta1=beta1, gamma=ga.copy(), A0=A0, B0=B0, C1=C1, D=D, Y=Y,
    )
    zs = circle_grid(samples)
    Xv = evaluate_many(xi.realization, zs)
    Rv = evaluate_many(r, zs)
    Pv = evaluate_many(psi.psi, zs)
    rn = np.linalg.norm(Rv, ord=2, axis=(1, 2)) if r.m else np.zeros(len(zs))
    defect = _unitarity_defect(Xv)
    prod = float(np.max(np.linalg.norm(Rv - Xv @ Pv, ord=2, axis=(1, 2)) / (1.0 + rn))) if r.m else 0.0
    y_res = float(np.linalg.norm(Y - al @ Y @ A0 - al @ be @ Dinv2 @ C0)) if Y.size else 0.0
    xi.residuals.update(unitarity=defect, factor_product=prod, y_stein=y_res)
    if defect > UNITARITY_FAIL:
        raise UnitarityCheckFailed(f"max ||Xi*Xi - I|| on the circle is {defect:.3e}")
    return xi


def minimal_reduce(xi, tol=DEFAULT_TOL):
    """Remove uncontrollable and unobservable states from both parts of `xi`.

    The plus part ``(A0, B0 D^{-1}, C1)`` and the minus part
    ``(alpha, beta1, gamma)`` are reduced separately with orthogonal
    staircase steps; since their poles lie on opposite sides of the circle
    this yields a minimal realization of the whole function. ``Y`` is kept
    in the original coordinates.
    """
    Zp, logp = minimal_part(xi.A0, xi.B1, xi.C1, tol)
    Zm, logm = minimal_part(xi.alpha, xi.beta1, xi.gamma, tol)
    reduction = {
        "plus": {"before": xi.A0.shape[0], "after": Zp.shape[1], **logp},
        "minus": {"before": xi.alpha.shape[0], "after": Zm.shape[1], **logm},
        "tol": tol,
    }
    for part in ("plus", "minus"):
        info = reduction[part]
        if info["before"] != info["after"]:
            log.info("minimal_reduce: %s part %d -> %d states", part, info["before"], info["after"])
    return replace(
        xi,
        A0=ct(Zp) @ xi.A0 @ Zp,
        B0=ct(Zp) @ xi.B0,
        C1=xi.C1 @ Zp,
        alpha=ct(Zm) @ xi.alpha @ Zm,
        beta1=ct(Zm) @ xi.beta1,
        gamma=xi.gamma @ Zm,
        reduction=reduction,
        residuals=dict(xi.residuals),
    )


@dataclass(frozen=True, eq=False)
class BiInnerRealization:
    """``F(z) = D + z C (I - z A)^{-1} B``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def system_matrix(self):
        return np.block([[self.A, self.B], [self.C, self.D]])

    @property
    def unitary_defect(self):
        S = self.system_matrix
        return float(np.linalg.norm(ct(S) @ S - np.eye(S.shape[0]), 2)) if S.size else 0.0

    @property
    def systemMatrixUnitary(self):
        return self.unitary_defect <= 1e-9

    def as_two_sided(self):
        return TwoSidedRealization.build(self.D, (self.A, self.B, self.C))

    def adjoint(self):
        """``F*(z) = D* + B* (zI - A*)^{-1} C*`` as a minus-part realization."""
        return TwoSidedRealization.build(ct(self.D), None, (ct(self.A), ct(self.C), ct(self.B)))

    def similar(self, S):
        """Realization ``(S^{-1} A S, S^{-1} B, C S, D)``."""
        Sinv = np.linalg.inv(S)
        return BiInnerRealization(Sinv @ self.A @ S, Sinv @ self.B, self.C @ S, self.D)


@dataclass(frozen=True, eq=False)
class DssFactorization:
    """``Xi = V W*`` with normalized (unitary) realizations of `V` and `W`.

    `X` is the coupling matrix of the normalized realizations,
    ``X - A_V X A_W* = B_V B_W*``. The remaining fields describe the same
    factorization in the coordinates of `xi` (``A_V = A0``, ``A_W* = alpha``):
    ``P0`` is the observability gramian of ``(C1, A0)``, ``P1`` the
    zero-pole coupling, ``X_raw = P0^{-1} P1`` and ``X_stein`` the direct
    solution of the Stein equation there. ``S`` and ``T`` are upper
    triangular with ``S* S = P0`` and ``T* T = G`` (the observability
    gramian of ``(beta1*, alpha*)``), and ``X = S X_raw T*``.
    """

    V: BiInnerRealization
    W: BiInnerRealization
    X: np.ndarray
    P0: np.ndarray
    P1: np.ndarray
    X_raw: np.ndarray
    X_stein: np.ndarray
    S: np.ndarray
    T: np.ndarray
    xi: UnitaryFactorRealization
    residuals: dict = field(default_factory=dict)
    coupling_route: str = "constrained"
    spectra_separated: bool = True

    @property
    def m(self):
        return self.V.D.shape[0]


FACTOR_COND_LIMIT = 1e12


def _invert_factor(L, name):
    if L.size == 0:
        return L.copy()
    s = np.linalg.svd(L, compute_uv=False)
    if s[-1] <= s[0] / FACTOR_COND_LIMIT:
        raise NonInvertibleP0(
            f"{name} is numerically singular (factor singular values {s[-1]:.3e} .. {s[0]:.3e}); "
            "run minimal_reduce first or loosen the reduction tolerance"
        )
    return sla.solve_triangular(L, np.eye(L.shape[0], dtype=np.complex128))


def change_state(xi, S, Sinv, M, Minv):
    """`xi` with plus state ``x -> S x`` and minus state ``x -> M^{-1} x``.

    ``Y`` is left untouched; it only serves the residual recorded when `xi`
    was built.
    """
    return replace(
        xi,
        A0=S @ xi.A0 @ Sinv,
        B0=S @ xi.B0,
        C1=xi.C1 @ Sinv,
        alpha=Minv @ xi.alpha @ M,
        beta1=Minv @ xi.beta1,
        gamma=xi.gamma @ M,
        residuals=dict(xi.residuals),
    )


COUPLING_ROUTES = ("constrained", "sylvester")
# relative Sylvester separation below which A0* and alpha count as resonant
SEPARATION_FLOOR = 1e-10


def zero_pole_coupling(xi, P0, route="constrained"):
    """Solution ``P1`` of ``A0* P1 - P1 alpha = -C1* gamma`` used by the DSS
    factorization.

    ``route="sylvester"`` solves the Sylvester equation alone. That needs
    the spectra of ``A0*`` and ``alpha`` to be separated and raises
    :class:`SpectraNotDisjoint` when their relative separation is below
    ``SEPARATION_FLOOR``.

    ``route="constrained"`` adds the side condition
    ``P1 beta1 = C1* Xi0 + A0* P0 B1``, which the coupling satisfies
    whenever ``Xi`` is unitary on the circle. With ``(alpha, beta1)``
    controllable the combined system has exactly one solution, also when
    the spectra meet (a pole at the origin on both sides is the common
    case). For separated spectra both routes agree in exact arithmetic; the
    constrained one is less sensitive to rounding in the data of `xi`.
    """
    if route not in COUPLING_ROUTES:
        raise ValueError(f"route must be one of {COUPLING_ROUTES}")
    A0, C1, B1 = xi.A0, xi.C1, xi.B1
    al, be1, ga = xi.alpha, xi.beta1, xi.gamma
    lhs = -ct(C1) @ ga
    if route == "sylvester":
        sep = sylvester_separation(ct(A0), al)
        if sep < SEPARATION_FLOOR:
            raise SpectraNotDisjoint(
                f"A0* and alpha are numerically resonant (relative separation {sep:.3e})", gap=sep
            )
        return solve_sylvester(ct(A0), al, lhs)
    target = ct(C1) @ xi.Xi0 + ct(A0) @ P0 @ B1
    return solve_constrained_sylvester(ct(A0), al, lhs, be1, target)


def spectra_separated(xi):
    """Whether ``A0*`` and ``alpha`` have numerically disjoint spectra."""
    return sylvester_separation(ct(xi.A0), xi.alpha) >= SEPARATION_FLOOR


def dss_factorize(xi, tol=DEFAULT_TOL, completion_rotation=None, samples=CHECK_SAMPLES, route="constrained"):
    """Douglas-Shapiro-Shields factorization ``Xi = V W*`` of a minimal `xi`.

    The plus state of `xi` is moved to output-normal coordinates with the
    triangular factor ``S`` of ``P0`` (``P0 - A0* P0 A0 = C1* C1``) and the
    minus state with the factor ``T`` of ``G`` (``G - alpha G alpha* =
    beta1 beta1*``). In those coordinates ``[A0; C1]`` is an isometry whose
    unitary completion is directly the system matrix of `V`, ``P0 = I`` and
    the coupling matrix is ``X = P1``. Then

    * ``D_W* = D_V* Xi0 + B_V* B1``,
    * ``B_W* = D_V* gamma + B_V* P1``,
    * ``A_W = alpha*``, ``C_W = beta1*``.

    The same quantities are also formed in the coordinates of `xi` and
    recorded for cross-checking.

    Parameters
    ----------
    completion_rotation : (m, m) unitary, optional
        Test hook: right-multiplies the completion, which changes `V` and `W`
        by the same constant unitary factor.
    route : {"constrained", "sylvester"}
        How the zero-pole coupling is computed for the construction of `W`;
        see :func:`zero_pole_coupling`.
    """
    nv, nw = xi.A0.shape[0], xi.alpha.shape[0]
    S = gramian_factor(xi.A0, xi.C1)
    T = gramian_factor(ct(xi.alpha), ct(xi.beta1))
    Sinv, Tinv = _invert_factor(S, "P0"), _invert_factor(T, "observability gramian of W")
    M, Minv = ct(T), ct(Tinv)
    nx = change_state(xi, S, Sinv, M, Minv)

    F = np.vstack([nx.A0, nx.C1])
    G = unitary_completion(F, tol=max(1e-8, 100 * tol))
    if completion_rotation is not None:
        G = G @ np.asarray(completion_rotation, dtype=np.complex128)
    BV, DV = G[:nv], G[nv:]
    V = BiInnerRealization(nx.A0, BV, nx.C1, DV)

    P1n = zero_pole_coupling(nx, np.eye(nv, dtype=np.complex128), route)
    DWs = ct(DV) @ nx.Xi0 + ct(BV) @ nx.B1
    BWs = ct(DV) @ nx.gamma + ct(BV) @ P1n
    W = BiInnerRealization(ct(nx.alpha), ct(BWs), ct(nx.beta1), ct(DWs))
    X = solve_stein(V.A, nx.alpha, BV @ BWs)

    # the same factorization in the coordinates of xi. The Sylvester route
    # solves for P1 there directly; the constrained route maps the normalized
    # coupling back, since the raw coordinates can be badly scaled.
    P0 = solve_stein(ct(xi.A0), xi.A0, ct(xi.C1) @ xi.C1)
    P0 = 0.5 * (P0 + ct(P0))
    if route == "sylvester":
        P1 = zero_pole_coupling(xi, P0, route)
    else:
        P1 = ct(S) @ P1n @ ct(Tinv)
    X_stein = solve_stein(xi.A0, xi.alpha, (Sinv @ BV) @ (BWs @ Tinv.conj().T))
    # P0^{-1} = S^{-1} S^{-*}, applied with triangular solves
    X_raw = Sinv @ (ct(Sinv) @ P1) if nv else np.zeros((0, nw), dtype=np.complex128)

    xn = norm2(X_stein)
    zs = circle_grid(samples)
    Vv = evaluate_many(V.as_two_sided(), zs)
    Wv = evaluate_many(W.as_two_sided(), zs)
    Xv = evaluate_many(xi.realization, zs)
    residuals = {
        "x_identity": norm2(X_raw - X_stein) / (1.0 + xn),
        "x_coupling": norm2(X - P1n) / (1.0 + norm2(X)),
        "x_stein": norm2(X - V.A @ X @ ct(W.A) - V.B @ ct(W.B)),
        "v_unitary": V.unitary_defect,
        "w_unitary": W.unitary_defect,
        "dss_product": _max_dev(Xv, Vv @ np.conj(np.swapaxes(Wv, 1, 2))),
    }
    return DssFactorization(
        V=V, W=W, X=X, P0=P0, P1=P1, X_raw=X_raw, X_stein=X_stein, S=S, T=T, xi=xi,
        residuals=residuals, coupling_route=route, spectra_separated=spectra_separated(xi),
    )


def coupling_realization(dss):
    """Realization of ``Xi`` built from `V`, `W` and `X`:

    ``Xi0' + C_R (zI - A_W*)^{-1} C_W* + z C_V (I - z A_V)^{-1} B_R``.
    """
    V, W, X = dss.V, dss.W, dss.X
    BR = V.B @ ct(W.D) + V.A @ X @ ct(W.C)
    CR = V.D @ ct(W.B) + V.C @ X @ ct(W.A)
    Xi0 = V.D @ ct(W.D) + V.C @ X @ ct(W.C)
    return TwoSidedRealization.build(Xi0, (V.A, BR, V.C), (ct(W.A), ct(W.C), CR))


def reconstruct_from_coupling(dss, samples=CHECK_SAMPLES):
    """Max deviation on the circle between the coupling-form realization of
    ``Xi`` and the one it was factored from."""
    zs = circle_grid(samples)
    return _max_dev(
        evaluate_many(coupling_realization(dss), zs), evaluate_many(dss.xi.realization, zs)
    )


def coupling_matrix_toeplitz(V, W, xi, samples=None):
    """Coupling matrix computed as ``Gamma_V* T_Xi Gamma_W``.

    ``Gamma_F = col(C_F A_F^j)`` maps into the Hardy space, so the Toeplitz
    compression drops out and the product equals the circle average of
    ``(C_V (I - z A_V)^{-1})* Xi(z) C_W (I - z A_W)^{-1}``. The average is
    taken with the trapezoidal rule, which is exact up to aliasing terms of
    order ``rho^samples``; `samples` is chosen from the spectral radii when
    omitted. This route never touches a Stein solver.
    """
    if V.n == 0 or W.n == 0:
        return np.zeros((V.n, W.n), dtype=np.complex128)
    if samples is None:
        rho = max(spectral_radius(M) for M in (V.A, W.A, xi.A0, xi.alpha))
        need = 64 if rho == 0 else int(np.ceil(np.log(1e-18) / np.log(rho)))
        samples = 1 << max(6, int(np.ceil(np.log2(need + 1))) + 1)
    zs = circle_grid(samples)
    Xv = evaluate_many(xi.realization, zs)
    IV, IW = np.eye(V.n), np.eye(W.n)
    X = np.zeros((V.n, W.n), dtype=np.complex128)
    for z, Xz in zip(zs, Xv):
        f = np.linalg.solve((IV - z * V.A).T, V.C.T).T
        g = np.linalg.solve((IW - z * W.A).T, W.C.T).T
        X += ct(f) @ Xz @ g
    return X / samples


def verify_unitary_identities(xi, tol=DEFAULT_TOL, on_resonance="raise"):
    """Residual norms of the three unitarity identities of a minimal `xi`.

    ``P1`` is taken from the Sylvester equation alone, so the second and
    third identities need the spectra of ``A0*`` and ``alpha`` to be
    separated. Each residual is the norm of the left-hand side divided by
    one plus the norms of its terms.

    Returns
    -------
    dict
        Keys ``first``, ``second``, ``third`` with residuals, ``None``
        where an identity does not apply, and ``notes`` giving the reason
        for each ``None``.

    Raises
    ------
    SpectraNotDisjoint
        ``A0*`` and ``alpha`` are numerically resonant and `on_resonance`
        is ``"raise"``. With ``"skip"`` the second and third identities are
        reported as not applicable instead.
    """
    A0, C1, B1, B0, D = xi.A0, xi.C1, xi.B1, xi.B0, xi.D
    al, be1, ga, Xi0 = xi.alpha, xi.beta1, xi.gamma, xi.Xi0
    m = xi.m
    P0 = solve_stein(ct(A0), A0, ct(C1) @ C1)
    Pm = solve_stein(ct(al), al, ct(ga) @ ga)

    def rel(*terms, rhs=None):
        total = sum(terms) - (0 if rhs is None else rhs)
        return norm2(total) / (1.0 + sum(norm2(t) for t in terms))

    out = {"first": rel(ct(Xi0) @ Xi0, ct(B1) @ P0 @ B1, ct(be1) @ Pm @ be1, rhs=np.eye(m)),
           "second": None, "third": None, "notes": {}}
    try:
        P1 = zero_pole_coupling(xi, P0, "sylvester")
    except SpectraNotDisjoint as exc:
        if on_resonance == "raise":
            raise
        out["notes"]["second"] = out["notes"]["third"] = f"resonant spectra: {exc}"
        return out
    out["second"] = rel(ct(C1) @ Xi0, ct(A0) @ P0 @ B1, -P1 @ be1)
    ctrb = controllable_subspace(al, be1, tol, system_scale(al, be1))
    if ctrb.dim == al.shape[0]:
        out["third"] = rel(ct(D) @ ct(Xi0) @ ga, ct(D) @ ct(be1) @ Pm @ al, ct(B0) @ P1)
    else:
        out["notes"]["third"] = "(alpha, beta1) not controllable"
    return out


def controllability_observability(dss, tol=DEFAULT_TOL):
    """Rank tests for ``(A_V, B_R)`` and ``(C_R, A_W*)``.

    Both pairs are controllable/observable when `V` and `W` come from
    minimal unitary realizations.
    """
    V, W, X = dss.V, dss.W, dss.X
    BR = V.B @ ct(W.D) + V.A @ X @ ct(W.C)
    CR = V.D @ ct(W.B) + V.C @ X @ ct(W.A)
    AWs = ct(W.A)
    ctrb = controllable_subspace(V.A, BR, tol, system_scale(V.A, BR))
    obs = controllable_subspace(ct(AWs), ct(CR), tol, system_scale(AWs, CR))
    return {
        "controllable_rank": ctrb.dim,
        "n_V": V.n,
        "observable_rank": obs.dim,
        "n_W": W.n,
        "pass": ctrb.dim == V.n and obs.dim == W.n,
    }
