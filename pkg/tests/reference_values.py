"""Frozen reference values produced by tools/derive_reference_values.py
(mpmath at 40 digits, independent of the package code).

Setting: truncated exponential loss m=0.1, M=10; weighting theta=0.5;
W0=15, rho=0.2; CARA utility alpha=0.02.
"""

LANDMARKS = {
    0.3: {"a": 0.013234602067340407, "b": 0.15588280909111806, "c": 0.14031705889651863,
          "lambda_hat": 0.88833923351155327},
    0.5: {"a": 0.067243234535305269, "b": 0.38448791010309979, "c": 0.27813209923721301,
          "lambda_hat": 0.88686214121100828},
    0.8: {"a": 0.16082113331476467, "b": 0.47019030279682253, "c": 0.42520660069369253,
          "lambda_hat": 0.94671688484432735},
}

EXPECTED_LOSS = 4.1802329313067358
K_C = 1.6560233158952714
PI_C = 3.0290515384937573

# linear utility, premium 4
YAARI_PI4 = {"d": 0.016246232134659709, "e": 0.15489936153267369, "lambda": 0.91309714613292729}

# CARA alpha=0.02
CARA_L = 0.26945581251761846
CARA_K = 1.6078591481431428
CARA_PI_HAT = 3.0868485397963116
CARA_PI3_DEDUCTIBLE = 0.28251080376124943
CARA_PI3_DEDUCTIBLE_LOSS = 1.9672180910203026
CARA_PI4 = {"z2": 0.015552973048104591, "z1": 0.15416385949857512}
