"""Published optimized bowl exponents and coefficients for N = 4..20.

Potential ``100 eps |(L/2 - x)/(L/2)|^tau`` on ``L = 100 ell``. Only the first
half of each (mirror-symmetric) coefficient list is stored;
:func:`full_alpha` restores the rest.
"""

import numpy as np

TAU = {
    4: 2.993540, 5: 3.260198, 6: 3.426142, 7: 3.552248, 8: 3.650098, 9: 3.728815,
    10: 3.793287, 11: 3.847014, 12: 3.892360, 13: 3.931069, 14: 3.964425,
    15: 3.993409, 16: 4.018780, 17: 4.041134, 18: 4.060946, 19: 4.078598,
    20: 4.094403,
}

HALF_ALPHA = {
    4: (0.0475251, 0.0548772),
    5: (0.0510611, 0.0625369),
    6: (0.0579675, 0.0745497, 0.0766875),
    7: (0.0658202, 0.0880452, 0.0926727),
    8: (0.0743862, 0.1027688, 0.1106852, 0.1116192),
    9: (0.0834554, 0.1184395, 0.1303163, 0.1326455),
    10: (0.0929392, 0.1349339, 0.1513421, 0.1557556, 0.1562500),
    11: (0.1027691, 0.1521459, 0.1735853, 0.1807227, 0.1820661),
    12: (0.1128996, 0.1700001, 0.1969183, 0.2073502, 0.2100762, 0.2103721),
    13: (0.1232943, 0.1884324, 0.2212349, 0.2354734, 0.2401236, 0.2409746),
    14: (0.1339250, 0.2073901, 0.2464477, 0.2649561, 0.2720442, 0.2738566, 0.2740494),
    15: (0.1447681, 0.2268279, 0.2724815, 0.2956824, 0.3056874, 0.3089038, 0.3094809),
    16: (0.1558040, 0.2467065, 0.2992711, 0.3275525, 0.3409190, 0.3459820, 0.3472557,
         0.3473895),
    17: (0.1670160, 0.2669916, 0.3267593, 0.3604793, 0.3776203, 0.3849582, 0.3872880,
         0.3877002),
    18: (0.1783897, 0.2876529, 0.3548955, 0.3943860, 0.4156856, 0.4257072, 0.4294682,
         0.4304027, 0.4305001),
    19: (0.1899124, 0.3086636, 0.3836347, 0.4292043, 0.4550208, 0.4681135, 0.4736811,
         0.4754314, 0.4757379),
    20: (0.2015732, 0.3299996, 0.4129363, 0.4648732, 0.4955414, 0.5120715, 0.5198130,
         0.5226962, 0.5234059, 0.5234795),
}


def full_alpha(N: int) -> np.ndarray:
    """All ``N - 1`` coefficients, using ``alpha_k = alpha_{N-k}``."""
    half = HALF_ALPHA[N]
    out = np.empty(N - 1)
    for k in range(1, N):
        out[k - 1] = half[min(k, N - k) - 1]
    return out
