"""Hot numerical kernels: the adaptive integrator march in log radius.

The second-order radial equation reduces, with s = ln r and w(s) = u(e^s), to

    w'' + (N-2) w' + q(s) w = 0,      q(s) = mu * V(e^s) * e^{2s}.

The kernel marches the 2-vector (w, w') from node to node of a uniform s-grid
with an embedded Cash-Karp 5(4) pair, substepping adaptively inside each node
interval and landing exactly on the nodes. Direction is free: the caller
initializes at the first or the last node, whichever end the tracked branch
dominates from, so round-off injected into the complementary branch decays
instead of being amplified.

Potential kinds are compiled in: 0 = exact inverse square (q == mu),
1 = the interpolating family (closed form), 2 = cubic interpolation in a
pre-sampled q-table (used for arbitrary Python-level potentials).

Compiled with numba when enabled (see backend.py); the same source runs as
plain Python otherwise.
"""

import math

import numpy as np

from .backend import jit_if_enabled

KIND_INVERSE_SQUARE = 0
KIND_VRHO = 1
KIND_TABLE = 2

STATUS_OK = 0
STATUS_STEP_FAILURE = 1
STATUS_OVERFLOW = 2

_OVERFLOW_GUARD = 1e300
_MAX_SUBSTEPS = 4096


def _rk_march(s_nodes, w0, v0, start_at_end, n_minus_2, kind, mu, rho,
              table, table_s0, table_inv_h, rtol):
    n = s_nodes.shape[0]
    w_out = np.zeros(n)
    v_out = np.zeros(n)
    table_n = table.shape[0]

    if start_at_end:
        j = n - 1
        j_stop = 0
        step_dir = -1
    else:
        j = 0
        j_stop = n - 1
        step_dir = 1

    w_out[j] = w0
    v_out[j] = v0
    w = w0
    v = v0

    while j != j_stop:
        s_target = s_nodes[j + step_dir]
        s = s_nodes[j]
        h = s_target - s
        substeps = 0
        done = False
        while not done:
            remaining = s_target - s
            clamped = False
            if (remaining > 0.0 and h >= remaining) or (
                remaining < 0.0 and h <= remaining
            ):
                h = remaining
                clamped = True

            # Cash-Karp 5(4) stages for w' = v, v' = -(N-2) v - q w
            k1w = v
            k1v = -n_minus_2 * v - _q_eval(
                kind, mu, rho, s, table, table_s0, table_inv_h, table_n) * w

            sw = w + h * (0.2 * k1w)
            sv = v + h * (0.2 * k1v)
            k2w = sv
            k2v = -n_minus_2 * sv - _q_eval(
                kind, mu, rho, s + 0.2 * h, table, table_s0, table_inv_h,
                table_n) * sw

            sw = w + h * (0.075 * k1w + 0.225 * k2w)
            sv = v + h * (0.075 * k1v + 0.225 * k2v)
            k3w = sv
            k3v = -n_minus_2 * sv - _q_eval(
                kind, mu, rho, s + 0.3 * h, table, table_s0, table_inv_h,
                table_n) * sw

            sw = w + h * (0.3 * k1w - 0.9 * k2w + 1.2 * k3w)
            sv = v + h * (0.3 * k1v - 0.9 * k2v + 1.2 * k3v)
            k4w = sv
            k4v = -n_minus_2 * sv - _q_eval(
                kind, mu, rho, s + 0.6 * h, table, table_s0, table_inv_h,
                table_n) * sw

            sw = w + h * ((-11.0 / 54.0) * k1w + 2.5 * k2w
                          + (-70.0 / 27.0) * k3w + (35.0 / 27.0) * k4w)
            sv = v + h * ((-11.0 / 54.0) * k1v + 2.5 * k2v
                          + (-70.0 / 27.0) * k3v + (35.0 / 27.0) * k4v)
            k5w = sv
            k5v = -n_minus_2 * sv - _q_eval(
                kind, mu, rho, s + h, table, table_s0, table_inv_h,
                table_n) * sw

            sw = w + h * ((1631.0 / 55296.0) * k1w + (175.0 / 512.0) * k2w
                          + (575.0 / 13824.0) * k3w
                          + (44275.0 / 110592.0) * k4w
                          + (253.0 / 4096.0) * k5w)
            sv = v + h * ((1631.0 / 55296.0) * k1v + (175.0 / 512.0) * k2v
                          + (575.0 / 13824.0) * k3v
                          + (44275.0 / 110592.0) * k4v
                          + (253.0 / 4096.0) * k5v)
            k6w = sv
            k6v = -n_minus_2 * sv - _q_eval(
                kind, mu, rho, s + 0.875 * h, table, table_s0, table_inv_h,
                table_n) * sw

            w5 = w + h * ((37.0 / 378.0) * k1w + (250.0 / 621.0) * k3w
                          + (125.0 / 594.0) * k4w + (512.0 / 1771.0) * k6w)
            v5 = v + h * ((37.0 / 378.0) * k1v + (250.0 / 621.0) * k3v
                          + (125.0 / 594.0) * k4v + (512.0 / 1771.0) * k6v)
            w4 = w + h * ((2825.0 / 27648.0) * k1w
                          + (18575.0 / 48384.0) * k3w
                          + (13525.0 / 55296.0) * k4w
                          + (277.0 / 14336.0) * k5w + 0.25 * k6w)
            v4 = v + h * ((2825.0 / 27648.0) * k1v
                          + (18575.0 / 48384.0) * k3v
                          + (13525.0 / 55296.0) * k4v
                          + (277.0 / 14336.0) * k5v + 0.25 * k6v)

            err = abs(w5 - w4) + abs(v5 - v4)
            scale = rtol * (abs(w) + abs(w5) + abs(v) + abs(v5)) + 1e-300
            ratio = err / scale

            if ratio <= 1.0:
                if clamped:
                    s = s_target
                else:
                    s = s + h
                w = w5
                v = v5
                if abs(w) > _OVERFLOW_GUARD or abs(v) > _OVERFLOW_GUARD:
                    return w_out, v_out, STATUS_OVERFLOW, s
                if s == s_target:
                    done = True
                if ratio > 0.0:
                    fac = 0.9 * ratio ** -0.2
                else:
                    fac = 5.0
                if fac > 5.0:
                    fac = 5.0
                h = h * fac
            else:
                fac = 0.9 * ratio ** -0.2
                if fac < 0.2:
                    fac = 0.2
                h = h * fac

            substeps += 1
            if substeps > _MAX_SUBSTEPS:
                return w_out, v_out, STATUS_STEP_FAILURE, s
        j += step_dir
        w_out[j] = w
        v_out[j] = v

    return w_out, v_out, STATUS_OK, s_nodes[j_stop]


def _q_eval(kind, mu, rho, s, table, table_s0, table_inv_h, table_n):
    if kind == 0:
        return mu
    if kind == 1:
        # mu * (1 + rho e^{2s}) / (1 + e^{2s}), evaluated overflow-free
        if s >= 0.0:
            z = math.exp(-2.0 * s)
            return mu * (z + rho) / (z + 1.0)
        z = math.exp(2.0 * s)
        return mu * (1.0 + rho * z) / (1.0 + z)
    # cubic Lagrange interpolation in the uniform q-table
    x = (s - table_s0) * table_inv_h
    i = int(math.floor(x)) - 1
    if i < 0:
        i = 0
    if i > table_n - 4:
        i = table_n - 4
    u = x - i
    l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0
    l1 = u * (u - 2.0) * (u - 3.0) / 2.0
    l2 = -u * (u - 1.0) * (u - 3.0) / 2.0
    l3 = u * (u - 1.0) * (u - 2.0) / 6.0
    return (l0 * table[i] + l1 * table[i + 1] + l2 * table[i + 2]
            + l3 * table[i + 3])


# Plain-Python reference kept for the fallback path and benchmarks.
rk_march_py = _rk_march

_q_eval = jit_if_enabled(_q_eval)
rk_march = jit_if_enabled(_rk_march)

_EMPTY_TABLE = np.zeros(4)


def march(s_nodes, w0, v0, start_at_end, n_minus_2, kind, mu, rho=0.0,
          table=None, table_s0=0.0, table_inv_h=0.0, rtol=1e-10,
          compiled=True):
    """Convenience wrapper; dispatches to the compiled or plain march."""
    if table is None:
        table = _EMPTY_TABLE
    fn = rk_march if compiled else rk_march_py
    return fn(
        np.asarray(s_nodes, dtype=float), float(w0), float(v0),
        bool(start_at_end), float(n_minus_2), int(kind), float(mu),
        float(rho), np.asarray(table, dtype=float), float(table_s0),
        float(table_inv_h), float(rtol),
    )
