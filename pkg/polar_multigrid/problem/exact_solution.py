import numpy as np


class ExactSolution:
    """
    Manufactured solution u(r, theta) with analytic first derivatives.
    Subclasses work on numpy arrays.
    """
    def value(self, r, theta) -> np.ndarray:
        raise NotImplementedError()

    def d_r(self, r, theta) -> np.ndarray:
        raise NotImplementedError()

    def d_theta(self, r, theta) -> np.ndarray:
        raise NotImplementedError()


class PolarOscillation(ExactSolution):
    """u = 0.4096 (r/Rmax)^6 (1 - r/Rmax)^6 cos(11 theta)"""
    amplitude = 0.4096
    frequency = 11

    def __init__(self, rmax: float):
        self.rmax = rmax

    def _radial(self, r):
        rho = r / self.rmax
        return self.amplitude * rho**6 * (1 - rho)**6

    def _radial_derivative(self, r):
        rho = r / self.rmax
        d_rho = 6 * rho**5 * (1 - rho)**6 - 6 * rho**6 * (1 - rho)**5
        return self.amplitude * d_rho / self.rmax

    def value(self, r, theta):
        return self._radial(r) * np.cos(self.frequency * theta)

    def d_r(self, r, theta):
        return self._radial_derivative(r) * np.cos(self.frequency * theta)

    def d_theta(self, r, theta):
        return -self.frequency * self._radial(r) * np.sin(self.frequency * theta)
