# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels; arithmetic mirrors ``_kernels_py`` step for step."""

from libc.math cimport cos

import numpy as np


def integrate_quadrupole(double c_cos, double c_dc, double omega, double gamma,
                         a_ext, r_init, v_init, double dt, long n_steps,
                         double escape_radius_sq):
    """See ``_kernels_py.integrate_quadrupole``."""
    pos_arr = np.empty((n_steps + 1, 3), dtype=np.float64)
    vel_arr = np.empty((n_steps + 1, 3), dtype=np.float64)
    cdef double[:, ::1] pos = pos_arr
    cdef double[:, ::1] vel = vel_arr

    cdef double x = r_init[0], y = r_init[1], z = r_init[2]
    cdef double vx = v_init[0], vy = v_init[1], vz = v_init[2]
    cdef double aex = a_ext[0], aey = a_ext[1], aez = a_ext[2]

    pos[0, 0] = x; pos[0, 1] = y; pos[0, 2] = z
    vel[0, 0] = vx; vel[0, 1] = vy; vel[0, 2] = vz

    cdef double half_dt = 0.5 * dt
    cdef double half_dt2 = 0.5 * dt * dt
    cdef double vdiv = 1.0 / (1.0 + gamma * half_dt)
    cdef double vmul = 1.0 - gamma * half_dt

    cdef double t = 0.0
    cdef double q1 = c_cos * cos(t) + c_dc
    cdef double ax0 = -0.5 * q1 * x + aex
    cdef double ay0 = -0.5 * q1 * y + aey
    cdef double az0 = q1 * z + aez
    cdef double ax1, ay1, az1

    cdef long n_done = n_steps
    cdef long i
    for i in range(1, n_steps + 1):
        x += vx * dt + half_dt2 * (ax0 - gamma * vx)
        y += vy * dt + half_dt2 * (ay0 - gamma * vy)
        z += vz * dt + half_dt2 * (az0 - gamma * vz)

        t = i * dt
        q1 = c_cos * cos(omega * t) + c_dc
        ax1 = -0.5 * q1 * x + aex
        ay1 = -0.5 * q1 * y + aey
        az1 = q1 * z + aez

        vx = (vx * vmul + half_dt * (ax0 + ax1)) * vdiv
        vy = (vy * vmul + half_dt * (ay0 + ay1)) * vdiv
        vz = (vz * vmul + half_dt * (az0 + az1)) * vdiv

        pos[i, 0] = x; pos[i, 1] = y; pos[i, 2] = z
        vel[i, 0] = vx; vel[i, 1] = vy; vel[i, 2] = vz
        ax0 = ax1; ay0 = ay1; az0 = az1

        if x * x + y * y + z * z > escape_radius_sq:
            n_done = i
            break

    return pos_arr[: n_done + 1], vel_arr[: n_done + 1], n_done


def monodromy(double a, double q, double gamma_norm, long n_steps=400):
    """See ``_kernels_py.monodromy``."""
    cdef double h = 3.141592653589793 / n_steps
    cdef double u1 = 1.0, du1 = 0.0
    cdef double u2 = 0.0, du2 = 1.0
    cdef double g = gamma_norm
    cdef double tau, c0, c1, c2, c3
    cdef double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v
    cdef long i

    for i in range(n_steps):
        tau = i * h

        c0 = a - 2.0 * q * cos(2.0 * tau)
        c1 = a - 2.0 * q * cos(2.0 * (tau + 0.5 * h))
        c2 = c1
        c3 = a - 2.0 * q * cos(2.0 * (tau + h))

        k1u = du1
        k1v = -c0 * u1 - g * du1
        k2u = du1 + 0.5 * h * k1v
        k2v = -c1 * (u1 + 0.5 * h * k1u) - g * k2u
        k3u = du1 + 0.5 * h * k2v
        k3v = -c2 * (u1 + 0.5 * h * k2u) - g * k3u
        k4u = du1 + h * k3v
        k4v = -c3 * (u1 + h * k3u) - g * k4u
        u1 += h * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0
        du1 += h * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0

        k1u = du2
        k1v = -c0 * u2 - g * du2
        k2u = du2 + 0.5 * h * k1v
        k2v = -c1 * (u2 + 0.5 * h * k1u) - g * k2u
        k3u = du2 + 0.5 * h * k2v
        k3v = -c2 * (u2 + 0.5 * h * k2u) - g * k3u
        k4u = du2 + h * k3v
        k4v = -c3 * (u2 + h * k3u) - g * k4u
        u2 += h * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0
        du2 += h * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0

    return u1, u2, du1, du2
