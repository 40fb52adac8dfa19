# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see _pycore for the semantics contract.

Arithmetic mirrors _pycore expression by expression so the two backends
agree to floating-point roundoff, and RNG draws go through the same
bit-generator stream as Generator.random(), so sampled paths agree
exactly for a given seed.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport INFINITY, NAN
from numpy.random cimport bitgen_t

BACKEND_NAME = "compiled"


cdef inline double _cvar_atoms(const double[:, ::1] c, Py_ssize_t a,
                               const double[::1] eta, double alpha) noexcept nogil:
    cdef Py_ssize_t X = c.shape[0]
    cdef Py_ssize_t j, x
    cdef double best = INFINITY
    cdef double z, s, diff, h
    for j in range(X):
        z = c[j, a]
        s = 0.0
        for x in range(X):
            diff = c[x, a] - z
            if diff > 0.0:
                s += eta[x] * diff
        h = z + s / alpha
        if h < best:
            best = h
    return best


cdef inline int _decide_y(const double[:, ::1] B, const double[:, ::1] c, double alpha,
                          const double[::1] q, Py_ssize_t y,
                          double[::1] eta) noexcept nogil:
    cdef Py_ssize_t X = B.shape[0]
    cdef Py_ssize_t x
    cdef double s = 0.0
    cdef double hb, hs
    for x in range(X):
        eta[x] = B[x, y] * q[x]
        s += eta[x]
    if s <= 0.0:
        return 0
    for x in range(X):
        eta[x] /= s
    hb = _cvar_atoms(c, 0, eta, alpha)
    hs = _cvar_atoms(c, 1, eta, alpha)
    return 0 if hb <= hs else 1


cdef inline void _predict_and_decide(const double[:, ::1] B, const double[:, ::1] P,
                                     const double[:, ::1] c, double alpha,
                                     const double[::1] pi, double[::1] q,
                                     double[::1] eta, signed char[::1] acts) noexcept nogil:
    cdef Py_ssize_t X = B.shape[0], Y = B.shape[1]
    cdef Py_ssize_t x, j, y
    cdef double s
    for j in range(X):
        s = 0.0
        for x in range(X):
            s += P[x, j] * pi[x]
        q[j] = s
    for y in range(Y):
        acts[y] = _decide_y(B, c, alpha, q, y, eta)


cdef inline double _apply_action(const double[:, ::1] B, const double[::1] q,
                                 const signed char[::1] acts, Py_ssize_t a,
                                 double[::1] pi, double[::1] num) noexcept nogil:
    cdef Py_ssize_t X = B.shape[0], Y = B.shape[1]
    cdef Py_ssize_t x, y
    cdef double rx, sigma = 0.0
    for x in range(X):
        rx = 0.0
        for y in range(Y):
            if acts[y] == a:
                rx += B[x, y]
        num[x] = rx * q[x]
        sigma += num[x]
    if sigma <= 0.0:
        return sigma
    for x in range(X):
        pi[x] = num[x] / sigma
    return sigma


cdef inline Py_ssize_t _inv_cdf_vec(const double[::1] cum, double u) noexcept nogil:
    cdef Py_ssize_t j = 0, last = cum.shape[0] - 1
    while j < last and cum[j] < u:
        j += 1
    return j


cdef inline Py_ssize_t _inv_cdf(const double[:, ::1] cum, Py_ssize_t row,
                                double u) noexcept nogil:
    cdef Py_ssize_t j = 0, last = cum.shape[1] - 1
    while j < last and cum[row, j] < u:
        j += 1
    return j


def h_diff_grid(const double[:, ::1] B, const double[:, ::1] P,
                const double[:, ::1] c, double alpha, const double[::1] t):
    cdef Py_ssize_t n = t.shape[0], Y = B.shape[1]
    out_arr = np.empty((n, Y), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, y
    cdef double tt, q1, q2, w1, w2, s, e, ha, hb, cand
    for i in range(n):
        tt = t[i]
        q1 = P[0, 0] * (1.0 - tt) + P[1, 0] * tt
        q2 = P[0, 1] * (1.0 - tt) + P[1, 1] * tt
        for y in range(Y):
            w1 = B[0, y] * q1
            w2 = B[1, y] * q2
            s = w1 + w2
            if s <= 0.0:
                out[i, y] = NAN
                continue
            e = w2 / s
            ha = c[0, 0] + max(c[1, 0] - c[0, 0], 0.0) * e / alpha
            cand = c[1, 0] + max(c[0, 0] - c[1, 0], 0.0) * (1.0 - e) / alpha
            if cand < ha:
                ha = cand
            hb = c[0, 1] + max(c[1, 1] - c[0, 1], 0.0) * e / alpha
            cand = c[1, 1] + max(c[0, 1] - c[1, 1], 0.0) * (1.0 - e) / alpha
            if cand < hb:
                hb = cand
            out[i, y] = ha - hb
    return out_arr


def replay_beliefs(const double[:, ::1] B, const double[:, ::1] P,
                   const double[:, ::1] c, double alpha, const double[::1] pi0,
                   const cnp.int64_t[::1] actions):
    cdef Py_ssize_t T = actions.shape[0], X = B.shape[0], Y = B.shape[1]
    pis_arr = np.zeros((T + 1, X), dtype=np.float64)
    sig_arr = np.zeros(T, dtype=np.float64)
    q_arr = np.empty(X, dtype=np.float64)
    eta_arr = np.empty(X, dtype=np.float64)
    num_arr = np.empty(X, dtype=np.float64)
    acts_arr = np.empty(Y, dtype=np.int8)
    pi_arr = np.array(pi0, dtype=np.float64)
    cdef double[:, ::1] pis = pis_arr
    cdef double[::1] sigmas = sig_arr
    cdef double[::1] q = q_arr
    cdef double[::1] eta = eta_arr
    cdef double[::1] num = num_arr
    cdef signed char[::1] acts = acts_arr
    cdef double[::1] pi = pi_arr
    cdef Py_ssize_t k, x
    cdef double sigma
    for x in range(X):
        pis[0, x] = pi[x]
    for k in range(T):
        _predict_and_decide(B, P, c, alpha, pi, q, eta, acts)
        sigma = _apply_action(B, q, acts, actions[k], pi, num)
        sigmas[k] = sigma
        if sigma <= 0.0:
            return pis_arr[: k + 1], sig_arr[: k + 1], k + 1
        for x in range(X):
            pis[k + 1, x] = pi[x]
    return pis_arr, sig_arr, 0


def run_episode(object gen, const double[:, ::1] B, const double[:, ::1] P,
                const double[:, ::1] c, double alpha, const double[::1] pi0,
                const double[::1] cum_pi0, const double[:, ::1] cumP,
                const double[:, ::1] cumB, const double[::1] grid,
                const signed char[::1] policy_actions, const double[::1] f,
                double d, double rho, Py_ssize_t horizon, bint record):
    cdef Py_ssize_t X = B.shape[0], g = grid.shape[0]
    cdef bitgen_t *rng
    capsule = gen.bit_generator.capsule
    rng = <bitgen_t *> PyCapsule_GetPointer(capsule, b"BitGenerator")

    xs_arr = ys_arr = acts_out_arr = pis_arr = us_arr = None
    cdef cnp.int64_t[::1] xs = None
    cdef cnp.int64_t[::1] ys = None
    cdef cnp.int64_t[::1] acts_out = None
    cdef cnp.int64_t[::1] us = None
    cdef double[:, ::1] pis = None
    if record:
        xs_arr = np.zeros(horizon + 1, dtype=np.int64)
        ys_arr = np.zeros(horizon, dtype=np.int64)
        acts_out_arr = np.zeros(horizon, dtype=np.int64)
        pis_arr = np.zeros((horizon + 1, X), dtype=np.float64)
        us_arr = np.zeros(horizon, dtype=np.int64)
        xs = xs_arr
        ys = ys_arr
        acts_out = acts_out_arr
        pis = pis_arr
        us = us_arr

    q_arr = np.empty(X, dtype=np.float64)
    eta_arr = np.empty(X, dtype=np.float64)
    num_arr = np.empty(X, dtype=np.float64)
    dec_arr = np.empty(B.shape[1], dtype=np.int8)
    pi_arr = np.array(pi0, dtype=np.float64)
    cdef double[::1] q = q_arr
    cdef double[::1] eta = eta_arr
    cdef double[::1] num = num_arr
    cdef signed char[::1] dec = dec_arr
    cdef double[::1] pi = pi_arr

    cdef Py_ssize_t x, k, y, j, xi, steps = 0
    cdef long tau = 0, tau0 = -1
    cdef double cost = 0.0, disc = 1.0, sigma, fdot
    cdef int a, u

    with gen.bit_generator.lock:
        x = _inv_cdf_vec(cum_pi0, rng.next_double(rng.state))
        if x == 0:
            tau0 = 0
        if record:
            xs[0] = x
            for xi in range(X):
                pis[0, xi] = pi[xi]
        for k in range(1, horizon + 1):
            x = _inv_cdf(cumP, x, rng.next_double(rng.state))
            if tau0 < 0 and x == 0:
                tau0 = k
            y = _inv_cdf(cumB, x, rng.next_double(rng.state))
            _predict_and_decide(B, P, c, alpha, pi, q, eta, dec)
            a = dec[y]
            sigma = _apply_action(B, q, dec, a, pi, num)
            if sigma <= 0.0:
                raise FloatingPointError(f"zero action probability at step {k}")
            j = <Py_ssize_t>(pi[1] * (g - 1) + 0.5)
            if j < 0:
                j = 0
            elif j > g - 1:
                j = g - 1
            u = policy_actions[j]
            steps = k
            if record:
                xs[k] = x
                ys[k - 1] = y
                acts_out[k - 1] = a
                for xi in range(X):
                    pis[k, xi] = pi[xi]
                us[k - 1] = u
            if u == 1:
                tau = k
                fdot = 0.0
                for xi in range(X):
                    fdot += f[xi] * pi[xi]
                cost += disc * fdot
                break
            cost += disc * d * pi[0]
            disc *= rho

    if record:
        return (int(steps), int(tau), int(tau0), float(cost),
                xs_arr[: steps + 1], ys_arr[:steps], acts_out_arr[:steps],
                pis_arr[: steps + 1], us_arr[:steps])
    return int(steps), int(tau), int(tau0), float(cost), None, None, None, None, None
