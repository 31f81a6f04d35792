"""Hot numeric kernels: the augmented SIPNS right-hand side and a
Dormand-Prince 5(4) stepper with PI step control and quartic dense output.

Everything here operates on flat float64 arrays so the same source compiles
under numba or runs as plain numpy (see ``_accel``). The parameter vector
follows ``PARAM_NAMES`` order; the state vector is (S, I, P, N, J) where J
is the running profit integral.
"""

import numpy as np

from ._accel import jit

PARAM_NAMES = (
    "mu",
    "delta_I",
    "delta_P",
    "delta_N",
    "beta_P",
    "beta_N",
    "alpha_P",
    "alpha_N",
    "gamma_P",
    "gamma_I",
)

NEG_TOL = 1e-9

# status codes returned by ``dopri5``
OK = 0
MAX_STEPS = 1
NEGATIVE = 2
NON_FINITE = 3
STEP_UNDERFLOW = 4

# Dormand-Prince tableau
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = np.array(
    [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0],
        [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0],
        [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
    ]
)
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between the 5th- and 4th-order weights
E = np.array(
    [
        71 / 57600,
        0.0,
        -71 / 16695,
        71 / 1920,
        -17253 / 339200,
        22 / 525,
        -1 / 40,
    ]
)
# quartic continuous extension, y(t + th*h) = y + h * K^T (DENSE @ [th, th^2, th^3, th^4])
DENSE = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

# PI controller constants
SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 10.0
PI_BETA = 0.04
PI_ALPHA = 0.2 - 0.75 * PI_BETA


@jit
def rhs(p, y, out):
    mu = p[0]
    d_i = p[1]
    d_p = p[2]
    d_n = p[3]
    b_p = p[4]
    b_n = p[5]
    a_p = p[6]
    a_n = p[7]
    g_p = p[8]
    g_i = p[9]
    s = y[0]
    i = y[1]
    pos = y[2]
    neg = y[3]
    gain = b_p * pos * s
    out[0] = mu - gain - b_n * neg * s + g_p * pos + g_i * i
    out[1] = gain - (a_p + a_n + g_i + d_i) * i
    out[2] = a_p * i - (g_p + d_p) * pos
    out[3] = a_n * i - d_n * neg
    out[4] = gain


@jit
def jacobian(p, y, out):
    d_i = p[1]
    d_p = p[2]
    d_n = p[3]
    b_p = p[4]
    b_n = p[5]
    a_p = p[6]
    a_n = p[7]
    g_p = p[8]
    g_i = p[9]
    s = y[0]
    pos = y[2]
    neg = y[3]
    out[:, :] = 0.0
    out[0, 0] = -b_p * pos - b_n * neg
    out[0, 1] = g_i
    out[0, 2] = -b_p * s + g_p
    out[0, 3] = -b_n * s
    out[1, 0] = b_p * pos
    out[1, 1] = -(a_p + a_n + g_i + d_i)
    out[1, 2] = b_p * s
    out[2, 1] = a_p
    out[2, 2] = -(g_p + d_p)
    out[3, 1] = a_n
    out[3, 3] = -d_n


@jit
def _rms_scaled(v, y, rtol, atol):
    acc = 0.0
    for k in range(v.shape[0]):
        sc = atol + rtol * abs(y[k])
        acc += (v[k] / sc) ** 2
    return np.sqrt(acc / v.shape[0])


@jit
def initial_step(p, y0, f0, t_span, rtol, atol):
    """Error-based starting step (Hairer, Norsett & Wanner, II.4)."""
    d0 = _rms_scaled(y0, y0, rtol, atol)
    d1 = _rms_scaled(f0, y0, rtol, atol)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, t_span)
    y1 = y0 + h0 * f0
    f1 = np.empty_like(y0)
    rhs(p, y1, f1)
    d2 = _rms_scaled(f1 - f0, y0, rtol, atol) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, t_span)


@jit
def dense_eval(y, K, h, theta, out):
    """Evaluate the quartic interpolant at fraction ``theta`` of the step."""
    t1 = theta
    t2 = t1 * theta
    t3 = t2 * theta
    t4 = t3 * theta
    for k in range(y.shape[0]):
        acc = 0.0
        for j in range(7):
            q = DENSE[j, 0] * t1 + DENSE[j, 1] * t2 + DENSE[j, 2] * t3 + DENSE[j, 3] * t4
            acc += K[j, k] * q
        out[k] = y[k] + h * acc


@jit
def dopri5(p, y0, t_end, rtol, atol, max_steps, grid, record, fixed_h):
    """Integrate the augmented system from t=0 to ``t_end``.

    ``grid`` holds ascending output times in [0, t_end]; states there come
    from the dense output. With ``record`` set, every accepted step is also
    stored. ``fixed_h > 0`` disables error control (used for order studies).

    Returns ``(status, grid_states, n_grid, step_times, step_states,
    n_recorded, n_accepted, n_rejected, t_reached)``.
    """
    n = y0.shape[0]
    m = grid.shape[0]
    y_grid = np.zeros((m, n))
    cap = 256 if record else 1
    t_rec = np.empty(cap)
    y_rec = np.empty((cap, n))
    n_rec = 0

    t = 0.0
    y = y0.copy()
    gi = 0
    while gi < m and grid[gi] <= 0.0:
        y_grid[gi, :] = y
        gi += 1
    if record:
        t_rec[0] = 0.0
        y_rec[0, :] = y
        n_rec = 1

    K = np.empty((7, n))
    ytmp = np.empty(n)
    y_new = np.empty(n)
    err = np.empty(n)
    rhs(p, y, K[0])

    if fixed_h > 0.0:
        h = fixed_h
    else:
        h = initial_step(p, y, K[0], t_end, rtol, atol)
    fac_old = 1e-4
    last_rejected = False
    n_acc = 0
    n_rej = 0
    status = OK

    while t < t_end:
        if n_acc + n_rej >= max_steps:
            status = MAX_STEPS
            break
        if h < 1e-14 * max(1.0, abs(t)):
            status = STEP_UNDERFLOW
            break
        last = False
        if t + h >= t_end * (1.0 - 1e-13):
            h = t_end - t
            last = True

        for s in range(1, 7):
            for k in range(n):
                acc = 0.0
                for j in range(s):
                    acc += A[s, j] * K[j, k]
                ytmp[k] = y[k] + h * acc
            rhs(p, ytmp, K[s])
        # stage 7 is evaluated at the 5th-order solution (FSAL)
        for k in range(n):
            y_new[k] = ytmp[k]
            acc = 0.0
            for j in range(7):
                acc += E[j] * K[j, k]
            err[k] = h * acc

        finite = True
        for k in range(n):
            if not np.isfinite(y_new[k]):
                finite = False
        if not finite:
            status = NON_FINITE
            break

        if fixed_h > 0.0:
            err_norm = 0.0
        else:
            err_norm = 0.0
            for k in range(n):
                sc = atol + rtol * max(abs(y[k]), abs(y_new[k]))
                r = abs(err[k]) / sc
                if r > err_norm:
                    err_norm = r

        if err_norm <= 1.0:
            t_new = t_end if last else t + h
            while gi < m and grid[gi] <= t_new:
                if grid[gi] >= t_new:
                    y_grid[gi, :] = y_new
                else:
                    dense_eval(y, K, h, (grid[gi] - t) / h, y_grid[gi])
                for k in range(4):
                    if y_grid[gi, k] < -NEG_TOL:
                        status = NEGATIVE
                gi += 1
            for k in range(4):
                if y_new[k] < -NEG_TOL:
                    status = NEGATIVE
            if status != OK:
                break

            t = t_new
            y[:] = y_new
            K[0, :] = K[6, :]
            n_acc += 1
            if record:
                if n_rec == cap:
                    cap *= 2
                    t_grow = np.empty(cap)
                    y_grow = np.empty((cap, n))
                    t_grow[:n_rec] = t_rec[:n_rec]
                    y_grow[:n_rec, :] = y_rec[:n_rec, :]
                    t_rec = t_grow
                    y_rec = y_grow
                t_rec[n_rec] = t
                y_rec[n_rec, :] = y
                n_rec += 1

            if fixed_h <= 0.0:
                fac11 = max(err_norm, 1e-10) ** PI_ALPHA
                fac = fac11 / fac_old**PI_BETA
                fac = max(1.0 / FAC_MAX, min(1.0 / FAC_MIN, fac / SAFETY))
                h_next = h / fac
                if last_rejected:
                    h_next = min(h_next, h)
                fac_old = max(err_norm, 1e-4)
                h = h_next
            last_rejected = False
        else:
            n_rej += 1
            fac11 = err_norm**PI_ALPHA
            h = h / min(1.0 / FAC_MIN, fac11 / SAFETY)
            last_rejected = True

    return status, y_grid, gi, t_rec[:n_rec], y_rec[:n_rec], n_rec, n_acc, n_rej, t
