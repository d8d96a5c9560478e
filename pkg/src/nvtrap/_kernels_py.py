"""Pure-Python reference kernels.

Same contracts as the compiled module ``_kernels_cy``; the arithmetic is kept
step-for-step identical so both backends agree to floating-point
reproducibility. ``nvtrap.backend`` picks whichever is available.
"""

import math

import numpy as np


def integrate_quadrupole(c_cos, c_dc, omega, gamma, a_ext, r_init, v_init,
                         dt, n_steps, escape_radius_sq):
    """Damped motion in an ideal oscillating quadrupole plus constant forcing.

    Acceleration field:
        a(r, t) = (c_cos * cos(omega t) + c_dc) * (-x/2, -y/2, z)
                  - gamma * v + a_ext

    c_cos, c_dc are Q*kappa*V/(m r0^2) prefactors (1/s^2), a_ext a constant
    acceleration vector. Velocity-Verlet step with the linear drag solved
    trapezoidally (reduces to plain velocity Verlet at gamma = 0).

    Returns (positions, velocities, n_done): arrays of shape (n_steps+1, 3);
    n_done < n_steps means |r|^2 exceeded escape_radius_sq at that sample and
    integration stopped (arrays are truncated to n_done+1 rows).
    """
    pos = np.empty((n_steps + 1, 3), dtype=np.float64)
    vel = np.empty((n_steps + 1, 3), dtype=np.float64)

    x, y, z = float(r_init[0]), float(r_init[1]), float(r_init[2])
    vx, vy, vz = float(v_init[0]), float(v_init[1]), float(v_init[2])
    aex, aey, aez = float(a_ext[0]), float(a_ext[1]), float(a_ext[2])

    pos[0, 0], pos[0, 1], pos[0, 2] = x, y, z
    vel[0, 0], vel[0, 1], vel[0, 2] = vx, vy, vz

    half_dt = 0.5 * dt
    half_dt2 = 0.5 * dt * dt
    vdiv = 1.0 / (1.0 + gamma * half_dt)
    vmul = 1.0 - gamma * half_dt

    t = 0.0
    q1 = c_cos * math.cos(t) + c_dc  # omega*t = 0 at start
    ax0 = -0.5 * q1 * x + aex
    ay0 = -0.5 * q1 * y + aey
    az0 = q1 * z + aez

    n_done = n_steps
    for i in range(1, n_steps + 1):
        # position update uses the full acceleration including drag at step start
        x += vx * dt + half_dt2 * (ax0 - gamma * vx)
        y += vy * dt + half_dt2 * (ay0 - gamma * vy)
        z += vz * dt + half_dt2 * (az0 - gamma * vz)

        t = i * dt
        q1 = c_cos * math.cos(omega * t) + c_dc
        ax1 = -0.5 * q1 * x + aex
        ay1 = -0.5 * q1 * y + aey
        az1 = q1 * z + aez

        vx = (vx * vmul + half_dt * (ax0 + ax1)) * vdiv
        vy = (vy * vmul + half_dt * (ay0 + ay1)) * vdiv
        vz = (vz * vmul + half_dt * (az0 + az1)) * vdiv

        pos[i, 0], pos[i, 1], pos[i, 2] = x, y, z
        vel[i, 0], vel[i, 1], vel[i, 2] = vx, vy, vz
        ax0, ay0, az0 = ax1, ay1, az1

        if x * x + y * y + z * z > escape_radius_sq:
            n_done = i
            break

    return pos[: n_done + 1], vel[: n_done + 1], n_done


def monodromy(a, q, gamma_norm, n_steps=400):
    """One-period state-transition matrix of the damped canonical equation.

    Integrates u'' + gamma_norm u' + (a - 2 q cos 2tau) u = 0 over one drive
    period tau in [0, pi] with fixed-step RK4, propagating the two basis
    solutions (1,0) and (0,1). Returns (m11, m12, m21, m22).
    """
    h = math.pi / n_steps
    # columns of the fundamental matrix
    u1, du1 = 1.0, 0.0
    u2, du2 = 0.0, 1.0
    g = gamma_norm

    for i in range(n_steps):
        tau = i * h

        c0 = a - 2.0 * q * math.cos(2.0 * tau)
        c1 = a - 2.0 * q * math.cos(2.0 * (tau + 0.5 * h))
        c2 = c1
        c3 = a - 2.0 * q * math.cos(2.0 * (tau + h))

        # RK4 on (u, du) for both columns; acceleration = -c*u - g*du
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
