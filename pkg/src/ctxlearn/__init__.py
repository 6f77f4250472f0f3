"""Zero-sum game payoff learning with bias-encoding quantum circuit models,
classical Fourier surrogates, exact KL evaluation against the game oracle,
and contextuality certification of the trained behaviours."""

__version__ = "0.1.0"
