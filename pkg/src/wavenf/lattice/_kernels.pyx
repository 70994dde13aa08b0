# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernels for the oscillator chain.

Mirrors ``_kernels_py`` exactly: in-place velocity-Verlet and its
fourth-order triple-jump composition, with the bond force
phi'(z) = z + alpha z^2 + beta z^3 + gamma z^(degree - 1).
"""

from libc.math cimport pow

import numpy as np

cdef double _W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
cdef double _W0 = 1.0 - 2.0 * _W1


cdef inline double _phi_prime(double z, double alpha, double beta, double gamma, int degree) nogil:
    cdef double out = z + alpha * z * z + beta * z * z * z
    if degree:
        out += gamma * pow(z, degree - 1)
    return out


cdef void _half_kick(double[::1] q, double[::1] p, double[::1] pull, double h,
                     double alpha, double beta, double gamma, int degree) nogil:
    cdef Py_ssize_t n = q.shape[0]
    cdef Py_ssize_t j
    for j in range(n - 1):
        pull[j] = _phi_prime(q[j + 1] - q[j], alpha, beta, gamma, degree)
    pull[n - 1] = _phi_prime(q[0] - q[n - 1], alpha, beta, gamma, degree)
    p[0] += h * (pull[0] - pull[n - 1])
    for j in range(1, n):
        p[j] += h * (pull[j] - pull[j - 1])


cdef void _verlet(double[::1] q, double[::1] p, double[::1] pull, double dt,
                  double alpha, double beta, double gamma, int degree) nogil:
    cdef Py_ssize_t n = q.shape[0]
    cdef Py_ssize_t j
    _half_kick(q, p, pull, 0.5 * dt, alpha, beta, gamma, degree)
    for j in range(n):
        q[j] += dt * p[j]
    _half_kick(q, p, pull, 0.5 * dt, alpha, beta, gamma, degree)


def run_verlet(double[::1] q, double[::1] p, double dt, long steps,
               double alpha, double beta, double gamma, int degree):
    scratch = np.empty(q.shape[0])
    cdef double[::1] pull = scratch
    cdef long i
    with nogil:
        for i in range(steps):
            _verlet(q, p, pull, dt, alpha, beta, gamma, degree)


def run_yoshida4(double[::1] q, double[::1] p, double dt, long steps,
                 double alpha, double beta, double gamma, int degree):
    scratch = np.empty(q.shape[0])
    cdef double[::1] pull = scratch
    cdef long i
    with nogil:
        for i in range(steps):
            _verlet(q, p, pull, dt * _W1, alpha, beta, gamma, degree)
            _verlet(q, p, pull, dt * _W0, alpha, beta, gamma, degree)
            _verlet(q, p, pull, dt * _W1, alpha, beta, gamma, degree)
