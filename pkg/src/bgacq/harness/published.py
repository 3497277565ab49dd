"""Published reference values used for side-by-side comparison columns."""


def _pm(re, im):
    return [complex(re, im), complex(re, -im)]


GENERATOR_SPECTRA = {
    (0, 1, 3): [5.5] + _pm(3.6, 2.8),
    (0, 2, 4): _pm(5.7, 1.1) + _pm(3.3, 4.9),
    (1, 2, 5): _pm(3.7, 7.0) + [7.8] + _pm(6.3, 2.9),
    (0, 1, 12): _pm(19, 2.1) + _pm(18, 5.9) + _pm(11, 12) + _pm(12, 11)
    + _pm(16, 8.7) + _pm(13, 11),
    (0, 2, 12): _pm(5.7, 14) + _pm(7.6, 14) + _pm(10, 12) + _pm(12, 8.4)
    + _pm(13, 4.4) + _pm(13, 1.0),
    (1, 2, 12): _pm(8.2, 17) + _pm(10, 15) + _pm(13, 13) + _pm(15, 8.7)
    + _pm(15, 5.1) + _pm(16, 1.8),
}

R_INFINITY = {
    (0, 1, 3): 5.9e-1, (0, 1, 12): 4.5e-3, (0, 1, 24): 6.9e-6, (0, 1, 48): 1.6e-11,
    (0, 2, 4): 4.3e-2, (0, 2, 12): 4.4e-4, (0, 2, 24): 1.4e-8, (0, 2, 48): 1.5e-17,
    (1, 2, 5): 7.4e-1, (1, 2, 12): 7.6e-2, (1, 2, 24): 1.5e-3, (1, 2, 48): 6.3e-7,
}

MIN_BLOCK_SIZE = {
    (0, 1): 3, (0, 2): 4, (1, 2): 5, (1, 3): 6,
    (2, 3): 7, (2, 4): 10, (3, 4): 13, (3, 5): 13,
}

EXAMPLE1_NS = [8, 16, 32, 64, 128, 256]

# mu -> (errors, orders) for the last block
EXAMPLE1 = {
    -0.2: ([2.8e-4, 3.1e-5, 3.8e-6, 4.6e-7, 5.7e-8, 7.0e-9], [None, 3.2, 3.1, 3.0, 3.0, 3.0]),
    -0.8: ([1.1e-4, 1.3e-5, 1.5e-6, 1.8e-7, 2.2e-8, 2.7e-9], [None, 3.1, 3.1, 3.0, 3.0, 3.0]),
    -1.8: ([9.8e-6, 5.3e-7, 5.0e-8, 5.3e-9, 6.2e-10, 7.9e-11], [None, 4.2, 3.4, 3.2, 3.1, 3.0]),
    0.0: ([3.6e-4, 3.7e-5, 4.3e-6, 5.2e-7, 6.4e-8, 7.9e-9], [None, 3.3, 3.1, 3.0, 3.0, 3.0]),
    0.8: ([1.2e-3, 1.2e-4, 1.6e-5, 2.1e-6, 2.6e-7, 3.2e-8], [None, 3.3, 2.8, 2.9, 3.0, 3.1]),
    1.8: ([4.3e-2, 5.6e-3, 9.6e-4, 1.9e-4, 4.3e-5, 9.1e-6], [None, 2.9, 2.6, 2.4, 2.1, 2.2]),
}

EXAMPLE2_NS = [8, 24, 40, 56, 72]

# (alpha, (k1, k2, m)) -> (errors, orders)
EXAMPLE2 = {
    (0.5, (0, 1, 3)): ([1.2e-2, 3.4e-4, 6.7e-5, 2.3e-5, 1.1e-5], [None, 3.2, 3.2, 3.1, 3.1]),
    (0.5, (0, 2, 4)): ([7.3e-4, 8.9e-6, 1.1e-6, 3.0e-7, 1.1e-7], [None, 4.0, 4.0, 4.0, 4.0]),
    (0.5, (1, 2, 5)): ([1.3e-6, 1.1e-8, 8.0e-10, 1.4e-10, 3.8e-11], [None, 4.4, 5.1, 5.1, 5.2]),
    (0.9, (0, 1, 3)): ([1.5e-2, 4.3e-4, 8.7e-5, 3.0e-5, 1.4e-5], [None, 3.2, 3.1, 3.1, 3.1]),
    (0.9, (0, 2, 4)): ([1.3e-3, 1.5e-5, 2.0e-6, 5.1e-7, 1.9e-7], [None, 4.0, 4.0, 4.0, 4.0]),
    (0.9, (1, 2, 5)): ([1.7e-6, 1.7e-8, 1.5e-9, 2.9e-10, 8.0e-11], [None, 4.2, 4.8, 4.9, 5.1]),
}

# printed expansion of lambda_hat - i w per scheme:
# (real order, real coeff, imag order, imag coeff)
DISSIPATION = {
    (0, 1, 3): (3, 5.1e-4, 4, 7.6e-4),
    (0, 2, 4): (5, 6.7e-5, 4, -6.2e-5),
    (1, 2, 5): (5, 4.9e-7, 6, -8.8e-8),
    (0, 1, 12): (3, 2.0e-5, 4, 2.1e-5),
    (0, 2, 12): (5, 1.2e-6, 4, -1.1e-6),
    (1, 2, 12): (5, -2.0e-8, 6, -2.0e-8),
}
