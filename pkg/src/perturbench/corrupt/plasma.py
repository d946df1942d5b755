"""Diamond-square plasma fractal used as the fog density field.

Classic midpoint displacement on a power-of-two torus grid: each round
fills square centers then diamond centers with the neighbor mean plus
uniform noise of amplitude ``wibble``, and the amplitude decays by the
``wibbledecay`` factor between rounds.  Larger decay kills high-frequency
detail faster, giving smoother fog.  The output is normalized to [0, 1].

Noise comes from the package's counter-based generator, so the field is a
pure function of (mapsize, wibbledecay, seed).
"""

from __future__ import annotations

import numpy as np

from ..rng import Rng


def next_power_of_two(x: int) -> int:
    return 1 if x <= 1 else 2 ** (x - 1).bit_length()


def plasma_fractal(mapsize: int, wibbledecay: float, rng: Rng) -> np.ndarray:
    if mapsize & (mapsize - 1) != 0 or mapsize < 1:
        raise ValueError(f"mapsize must be a power of two, got {mapsize}")
    maparray = np.zeros((mapsize, mapsize), dtype=np.float64)
    stepsize = mapsize
    wibble = 100.0

    def noise(shape) -> np.ndarray:
        n = int(np.prod(shape))
        u = rng.bulk_u64(n) >> np.uint64(11)
        uniform = u.astype(np.float64) * (2.0**-53)  # [0, 1)
        return (wibble * (2.0 * uniform - 1.0)).reshape(shape)

    def wibbledmean(array: np.ndarray) -> np.ndarray:
        return array / 4.0 + noise(array.shape)

    def fillsquares():
        """Square centers get the mean of their four corners plus noise."""
        cornerref = maparray[0:mapsize:stepsize, 0:mapsize:stepsize]
        squareaccum = cornerref + np.roll(cornerref, shift=-1, axis=0)
        squareaccum += np.roll(squareaccum, shift=-1, axis=1)
        maparray[
            stepsize // 2 : mapsize : stepsize, stepsize // 2 : mapsize : stepsize
        ] = wibbledmean(squareaccum)

    def filldiamonds():
        """Diamond centers get the mean of their four neighbors plus noise."""
        drgrid = maparray[
            stepsize // 2 : mapsize : stepsize, stepsize // 2 : mapsize : stepsize
        ]
        ulgrid = maparray[0:mapsize:stepsize, 0:mapsize:stepsize]
        ldrsum = drgrid + np.roll(drgrid, 1, axis=0)
        lulsum = ulgrid + np.roll(ulgrid, -1, axis=1)
        maparray[0:mapsize:stepsize, stepsize // 2 : mapsize : stepsize] = wibbledmean(
            ldrsum + lulsum
        )
        tdrsum = drgrid + np.roll(drgrid, 1, axis=1)
        tulsum = ulgrid + np.roll(ulgrid, -1, axis=0)
        maparray[stepsize // 2 : mapsize : stepsize, 0:mapsize:stepsize] = wibbledmean(
            tdrsum + tulsum
        )

    while stepsize >= 2:
        fillsquares()
        filldiamonds()
        stepsize //= 2
        wibble /= wibbledecay

    maparray -= maparray.min()
    peak = maparray.max()
    if peak > 0:
        maparray /= peak
    return maparray.astype(np.float32)
