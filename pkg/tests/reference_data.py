"""Reference values shared by the test modules.

``MODE_TABLE`` is the published convergence table for the first four
oscillatory mode frequencies (imaginary parts) of the two discretizations
at increasing mesh resolution, used as the quantitative regression target.
``mode_limits`` is the independent closed-form oracle for the mesh limit:
the composite's first modes are the fixed-free wave modes of the magnetic
flux with speed sqrt(beta/mu), and the gamma coupling of the reference
configuration shifts them by less than 1e-4 relative.
"""
import math

# rows: segments N -> (fem modes 1..4, mfem modes 1..4)
MODE_TABLE = {
    12: ((1.4350, 4.3295, 7.2982, 10.3913), (1.4360, 4.3580, 7.4371, 10.8043)),
    16: ((1.4345, 4.3174, 7.2419, 10.2360), (1.4351, 4.3332, 7.3172, 10.4522)),
    20: ((1.4343, 4.3118, 7.2158, 10.1644), (1.4347, 4.3218, 7.2633, 10.2982)),
    24: ((1.4342, 4.3087, 7.2017, 10.1255), (1.4344, 4.3157, 7.2343, 10.2169)),
    28: ((1.4341, 4.3069, 7.1932, 10.1022), (1.4343, 4.3120, 7.2171, 10.1686)),
    32: ((1.4341, 4.3057, 7.1877, 10.0870), (1.4342, 4.3096, 7.2059, 10.1375)),
    36: ((1.4340, 4.3049, 7.1839, 10.0766), (1.4342, 4.3080, 7.1982, 10.1163)),
    40: ((1.4340, 4.3043, 7.1812, 10.0692), (1.4341, 4.3068, 7.1928, 10.1012)),
    100: ((1.4339, 4.3022, 7.1715, 10.0426), (1.4340, 4.3026, 7.1734, 10.0477)),
}

SWEEP_N_VALUES = tuple(sorted(MODE_TABLE))


def mode_limits(params, count=4):
    """Closed-form fixed-free wave frequencies (2k-1) (pi/2) sqrt(beta/mu) / L."""
    c = math.sqrt(params.beta / params.mu)
    return [(2 * k - 1) * 0.5 * math.pi * c / params.length for k in range(1, count + 1)]


def richardson_limit(n1, f1, n2, f2):
    """Extrapolate a second-order-convergent sequence to the mesh limit."""
    r2 = (n2 / n1) ** 2
    return (r2 * f2 - f1) / (r2 - 1.0)
