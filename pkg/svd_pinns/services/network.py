"""
Two-hidden-layer tanh network: forward pass, input-derivative jets and
parameter gradients of linear functionals of the jet.

Inputs are assembled as (t, x_1, ..., x_d). Derivatives are propagated in
forward mode, one tangent per input coordinate, carrying first derivatives for
every coordinate and second derivatives for the spatial ones:

    linear layer: (z, z', z'') -> (W z + b, W z', W z'')
    tanh:         a = tanh(z), a' = (1 - a²) z', a'' = (1 - a²) z'' - 2 a (1 - a²) (z')²

with seeds z' = e_i, z'' = 0. Both rules are linear in z'', so second
derivatives are carried already summed over the spatial coordinates. The
reverse pass differentiates this exact computation, so gradients of any
residual built from the jet are exact.
"""

from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from svd_pinns.exceptions import DimensionError, NumericError
from svd_pinns.models import DenseHidden, FactoredHidden, Jet, NetworkParams, ParamGrad
from svd_pinns.services import linalg


def init_params(d_in: int, width: int, out_dim: int, rng: np.random.Generator) -> NetworkParams:
    """
    Glorot-uniform weights, zero biases, dense hidden matrix.

    Args:
        d_in: Input dimension (spatial dimension + 1)
        width: Hidden width m
        out_dim: Output dimension r
        rng: Seeded generator

    Returns:
        NetworkParams: Freshly initialized parameters
    """
    if min(d_in, width, out_dim) < 1:
        raise DimensionError(f"invalid network shape d_in={d_in}, m={width}, r={out_dim}")

    def glorot(fan_out: int, fan_in: int) -> np.ndarray:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(fan_out, fan_in))

    return NetworkParams(
        w0=glorot(width, d_in),
        b0=np.zeros(width),
        hidden=DenseHidden(glorot(width, width)),
        b1=np.zeros(width),
        w2=glorot(out_dim, width),
        b2=np.zeros(out_dim),
    )


def svd_split(params: NetworkParams) -> NetworkParams:
    """Replace a dense W1 by its SVD factors (u, v frozen, sigma trainable)."""
    if params.is_factored:
        return params
    factors = linalg.svd(params.hidden.w1)
    return replace(params, hidden=FactoredHidden(factors.u, factors.v, factors.sigma))


def forward(params: NetworkParams, x) -> np.ndarray:
    """
    Network output for one input vector (d_in,) or a batch (n, d_in).

    Returns:
        np.ndarray: (r,) for a single input, (n, r) for a batch
    """
    xin = np.asarray(x, dtype=np.float64)
    single = xin.ndim == 1
    xin = np.atleast_2d(xin)
    if xin.shape[1] != params.d_in:
        raise DimensionError(f"input has {xin.shape[1]} coordinates, network expects {params.d_in}")
    a1 = np.tanh(xin @ params.w0.T + params.b0)
    a2 = np.tanh(a1 @ params.w1().T + params.b1)
    out = a2 @ params.w2.T + params.b2
    return out[0] if single else out


def assemble_inputs(t, x, d_in: int) -> np.ndarray:
    """Stack times (n,) and points (n, d) into network inputs (n, d + 1)."""
    points = np.atleast_2d(np.asarray(x, dtype=np.float64))
    times = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if times.shape[0] != points.shape[0]:
        if times.shape[0] == 1:
            times = np.full(points.shape[0], times[0])
        else:
            raise DimensionError(f"{times.shape[0]} times for {points.shape[0]} points")
    if points.shape[1] + 1 != d_in:
        raise DimensionError(
            f"points have {points.shape[1]} spatial coordinates, network expects {d_in - 1}"
        )
    return np.column_stack([times, points])


@dataclass
class _Tape:
    xin: np.ndarray
    w1: np.ndarray
    a1: np.ndarray
    s1: np.ndarray
    a1p: np.ndarray
    lap_a1: np.ndarray
    z2p: np.ndarray
    lap_z2: np.ndarray
    a2: np.ndarray
    s2: np.ndarray
    a2p: np.ndarray
    lap_a2: np.ndarray


def _rows(a: np.ndarray) -> np.ndarray:
    """(n, k, m) -> (n·k, m) so contractions run as single matrix products."""
    return a.reshape(-1, a.shape[-1])


def _trace(params: NetworkParams, t, x) -> Tuple[Jet, _Tape]:
    xin = assemble_inputs(t, x, params.d_in)
    w0, w1, w2 = params.w0, params.w1(), params.w2

    # shapes: n samples, k = d + 1 coordinates, m hidden units, r outputs
    n, k = xin.shape
    m = w1.shape[0]
    z1p = w0.T

    # second derivatives only enter through the Laplacian, so they are kept
    # summed over the spatial coordinates: lap_* has shape (n, m)
    a1 = np.tanh(xin @ w0.T + params.b0)
    s1 = 1.0 - a1**2
    a1p = s1[:, None, :] * z1p[None]
    lap_a1 = -2.0 * (a1 * s1) * (z1p[1:] ** 2).sum(axis=0)

    z2 = a1 @ w1.T + params.b1
    z2p = (_rows(a1p) @ w1.T).reshape(n, k, m)
    lap_z2 = lap_a1 @ w1.T
    a2 = np.tanh(z2)
    s2 = 1.0 - a2**2
    a2p = s2[:, None, :] * z2p
    lap_a2 = s2 * lap_z2 - 2.0 * (a2 * s2) * (z2p[:, 1:, :] ** 2).sum(axis=1)

    value = a2 @ w2.T + params.b2
    first = (_rows(a2p) @ w2.T).reshape(n, k, -1)
    jet = Jet(
        value=value,
        dt=first[:, 0, :],
        grad_x=first[:, 1:, :].transpose(0, 2, 1),
        laplacian_x=lap_a2 @ w2.T,
    )
    if not jet.is_finite():
        raise NumericError("non-finite value in forward jet", stage="forward_jet")
    tape = _Tape(xin, w1, a1, s1, a1p, lap_a1, z2p, lap_z2, a2, s2, a2p, lap_a2)
    return jet, tape


def forward_jet(params: NetworkParams, t, x) -> Jet:
    """
    Output, time derivative, spatial gradient and spatial Laplacian.

    Args:
        params: Network parameters
        t: Time (scalar) or times (n,)
        x: Spatial point (d,) or points (n, d)

    Returns:
        Jet: Batched jet with n = number of points
    """
    jet, _ = _trace(params, t, x)
    return jet


def backward_jet(params: NetworkParams, t, x, cotangent: Jet, tape: _Tape = None) -> ParamGrad:
    """
    Gradient of <cotangent, jet> summed over the batch with respect to all
    parameters. For a factored W1 the sigma gradient is diag(Uᵀ G V), with G
    the gradient with respect to the effective W1.
    """
    if tape is None:
        _, tape = _trace(params, t, x)
    n, k = tape.xin.shape
    r = params.out_dim
    d = k - 1
    expected = {
        "value": (n, r),
        "dt": (n, r),
        "grad_x": (n, r, d),
        "laplacian_x": (n, r),
    }
    wrong = {
        name: getattr(cotangent, name).shape
        for name, shape in expected.items()
        if getattr(cotangent, name).shape != shape
    }
    if wrong:
        raise DimensionError(
            f"cotangent shapes {wrong} do not match the jet "
            f"({', '.join(f'{name} {shape}' for name, shape in expected.items())})"
        )
    w0, w1, w2 = params.w0, tape.w1, params.w2
    m = w1.shape[0]
    a1, s1, a1p, lap_a1 = tape.a1, tape.s1, tape.a1p, tape.lap_a1
    a2, s2, a2p, lap_a2 = tape.a2, tape.s2, tape.a2p, tape.lap_a2
    z2p, lap_z2 = tape.z2p, tape.lap_z2
    z1p = w0.T

    cv = cotangent.value
    cp = np.concatenate([cotangent.dt[:, None, :], cotangent.grad_x.transpose(0, 2, 1)], axis=1)
    cl = cotangent.laplacian_x

    # output layer
    g_w2 = cv.T @ a2 + _rows(cp).T @ _rows(a2p) + cl.T @ lap_a2
    g_b2 = cv.sum(axis=0)
    bar_a2 = cv @ w2
    bar_a2p = (_rows(cp) @ w2).reshape(n, k, m)
    bar_lap_a2 = cl @ w2

    # second tanh
    bar_lap_z2 = s2 * bar_lap_a2
    bar_z2p = s2[:, None, :] * bar_a2p
    bar_z2p[:, 1:, :] -= 4.0 * (a2 * s2 * bar_lap_a2)[:, None, :] * z2p[:, 1:, :]
    bar_s2 = (bar_a2p * z2p).sum(axis=1) + bar_lap_a2 * lap_z2
    bar_q2 = -2.0 * bar_lap_a2 * (z2p[:, 1:, :] ** 2).sum(axis=1)
    bar_z2 = (bar_a2 - 2.0 * a2 * bar_s2 + (1.0 - 3.0 * a2**2) * bar_q2) * s2

    # hidden layer
    g_w1 = bar_z2.T @ a1 + _rows(bar_z2p).T @ _rows(a1p) + bar_lap_z2.T @ lap_a1
    g_b1 = bar_z2.sum(axis=0)
    bar_a1 = bar_z2 @ w1
    bar_a1p = (_rows(bar_z2p) @ w1).reshape(n, k, m)
    bar_lap_a1 = bar_lap_z2 @ w1

    # first tanh; z1' = W0 e_i is sample independent and z1'' = 0
    bar_z1p = s1[:, None, :] * bar_a1p
    bar_z1p[:, 1:, :] -= 4.0 * (a1 * s1 * bar_lap_a1)[:, None, :] * z1p[None, 1:, :]
    bar_s1 = (bar_a1p * z1p[None]).sum(axis=1)
    bar_q1 = -2.0 * bar_lap_a1 * (z1p[1:] ** 2).sum(axis=0)
    bar_z1 = (bar_a1 - 2.0 * a1 * bar_s1 + (1.0 - 3.0 * a1**2) * bar_q1) * s1

    g_w0 = bar_z1.T @ tape.xin + bar_z1p.sum(axis=0).T
    g_b0 = bar_z1.sum(axis=0)

    sigma = None
    if params.is_factored:
        hidden = params.hidden
        sigma = ((hidden.u.T @ g_w1) * hidden.v.T).sum(axis=1)

    return ParamGrad(w0=g_w0, b0=g_b0, w1=g_w1, b1=g_b1, w2=g_w2, b2=g_b2, sigma=sigma)


def forward_jet_with_tape(params: NetworkParams, t, x) -> Tuple[Jet, _Tape]:
    """Jet plus the intermediates :func:`backward_jet` reuses."""
    return _trace(params, t, x)
