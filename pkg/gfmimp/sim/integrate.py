"""Classical fixed-step Runge-Kutta integration."""

import numpy as np


def rk4_step(fun, t, x, dt):
    """Advance ``dx/dt = fun(t, x)`` by one classical RK4 step.

    Parameters
    ----------
    fun : callable
        ``fun(t, x)`` returning the derivatives as a sequence of floats.
    t : float
        Current time.
    x : array_like of float
        Current state.
    dt : float
        Step size.

    Returns
    -------
    numpy.ndarray
    """
    x = np.asarray(x, dtype=float)
    half = 0.5 * dt
    k1 = np.asarray(fun(t, x), dtype=float)
    k2 = np.asarray(fun(t + half, x + half * k1), dtype=float)
    k3 = np.asarray(fun(t + half, x + half * k2), dtype=float)
    k4 = np.asarray(fun(t + dt, x + dt * k3), dtype=float)
    return x + dt / 6. * (k1 + 2. * (k2 + k3) + k4)
