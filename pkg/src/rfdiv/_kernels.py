"""Jit-compiled inner loop of the training recursion.

The recursion is serial in k, so the only way to make it fast is a compiled
scalar loop over precomputed feature rows.  The kernel must match the
reference ``optimizer.step`` semantics exactly: the tracker update and the
averaged-iterate accumulation both use the PRE-update coefficients.
"""

import math

import numpy as np
from numba import njit

# exp() arguments are clamped here; a trained-on-box run never gets close,
# and clamping keeps a misconfigured run finite enough to report on.
_EXP_CLAMP = 700.0


@njit(cache=True)
def train_chunk(theta, theta_sum, Fx, Fy, alpha0, decay, r, bound, z, z_lo, z_hi,
                k0, psi_x_sum, trace_every, trace_out, trace_cursor):
    """Advance the recursion over one chunk of feature rows.

    Fx[row] and Fy[row] are phi(x_k) and phi(y_k) for global step
    k = k0 + row.  The step size at global step k is
    alpha0 * (k + 1)^(-decay); decay = 0 gives the constant schedule since
    x**-0.0 == 1.0.  theta and theta_sum are updated in place; the scalar
    state comes back in the return tuple:

        (z, psi_x_sum, trace_cursor, z_violations, exp_overflows)

    When trace_every > 0, rows (k, z_k, ||theta_k||_inf, running DV value)
    are written to trace_out at steps divisible by trace_every; all traced
    quantities are pre-update, and the running DV value is the mean of
    psi(x_j, theta_j) over j <= k minus log z_k.
    """
    rows, m = Fx.shape
    z_violations = 0
    exp_overflows = 0
    for row in range(rows):
        k = k0 + row
        alpha = alpha0 * (k + 1.0) ** (-decay)
        ar = alpha * r
        s_y = 0.0
        s_x = 0.0
        for i in range(m):
            s_y += Fy[row, i] * theta[i]
            s_x += Fx[row, i] * theta[i]
        if s_y > _EXP_CLAMP:
            s_y = _EXP_CLAMP
            exp_overflows += 1
        e = math.exp(s_y)
        psi_x_sum += s_x
        if trace_every > 0 and k % trace_every == 0:
            norm = 0.0
            for i in range(m):
                v = abs(theta[i])
                if v > norm:
                    norm = v
            trace_out[trace_cursor, 0] = k
            trace_out[trace_cursor, 1] = z
            trace_out[trace_cursor, 2] = norm
            trace_out[trace_cursor, 3] = psi_x_sum / (k + 1) - math.log(z)
            trace_cursor += 1
        coef = e / z
        for i in range(m):
            theta_sum[i] += theta[i]
            t = theta[i] + ar * (Fx[row, i] - coef * Fy[row, i])
            if t > bound:
                t = bound
            elif t < -bound:
                t = -bound
            theta[i] = t
        z = z + alpha * (e - z)
        if z < z_lo or z > z_hi:
            z_violations += 1
    return z, psi_x_sum, trace_cursor, z_violations, exp_overflows
