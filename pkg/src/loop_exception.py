"""
A module containing custom exception classes for numerical failures of plants, controllers, maps and the CLI.
"""


class QuantityOverflowError(OverflowError):
    """ Raised when exp() of an evolution or map step overflows the float range

    Attributes:
        exponent (float): Exponent that could not be evaluated.
    """

    exponent: float

    def __init__(self, exponent: float):
        self.exponent = exponent
        super().__init__(f"Quantity overflow: exp({exponent:.6g}) is out of float range")


class IntegrationFailureError(ArithmeticError):
    """ Raised when an ODE right-hand side returns a non-finite derivative """
    def __init__(self, t: float):
        self.t = t
        super().__init__(f"Integration failure: non-finite derivative at t={t:.17g}")


class NonMonotoneTimeError(ValueError):
    """ Raised when two measurements are not ordered in time """
    def __init__(self, t_prev: float, t_now: float):
        super().__init__(f"Non-monotone time: {t_now!r} does not follow {t_prev!r}")


class DegenerateGainError(ZeroDivisionError):
    """ Raised when the control gain estimate is zero and no increment can be computed """
    def __init__(self):
        super().__init__("Degenerate gain estimate: delta_N estimate is zero")


class InvalidMeasurementError(ValueError):
    """ Raised when a finite-difference rate is requested from an unusable Q pair """
    def __init__(self, q_now: float, q_prev: float):
        super().__init__(f"Invalid measurement pair: Q_now={q_now!r}, Q_prev={q_prev!r}")


class FixedPointNotConsciousError(ArithmeticError):
    """ Raised when the Algorithm-2 fixed point has a non-positive quantity """
    def __init__(self, q_bar: float, dt: float):
        self.q_bar = q_bar
        super().__init__(f"Fixed point not conscious: Q_bar={q_bar:.6g} <= 0 at dt={dt:.6g}")


class OrbitDivergedError(OverflowError):
    """ Raised when an orbit leaves the float range

    Attributes:
        last_point (tuple): Last finite iterate.
        iteration (int): Index of the failed iteration.
    """
    def __init__(self, last_point: tuple, iteration: int):
        self.last_point = last_point
        self.iteration = iteration
        super().__init__(f"Orbit diverged at iteration {iteration}, last finite point {last_point}")


class NoFlipInBracketError(ValueError):
    """ Raised when the detected period does not double across a refinement bracket """
    def __init__(self, lo: float, hi: float, period_lo, period_hi):
        super().__init__(f"No flip in bracket [{lo}, {hi}]: period {period_lo} -> {period_hi}")


class EquivalenceModeError(ValueError):
    """ Raised when a map equivalence check is requested for a non-idealized loop """
    def __init__(self, plant_mode: str, measurement_mode: str):
        super().__init__(
            f"Equivalence requires idealized mode (exact plant, instantaneous lambda), "
            f"got plant={plant_mode}, measurement={measurement_mode}"
        )


class InvalidConfigError(ValueError):
    """ Raised when a parameter set violates its invariants """
    def __init__(self, description: str):
        super().__init__(description)


class UsageError(ValueError):
    """ Raised when command line arguments or config file values are unusable

    Attributes:
        key (str): The offending flag or config key.
    """
    def __init__(self, key: str, description: str):
        self.key = key
        super().__init__(f"{key}: {description}")
