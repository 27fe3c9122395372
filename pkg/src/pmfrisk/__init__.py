"""Distribution model risk for discrete pricing measures.

Quantifies how option prices vary over the convex polytope of pmfs with a
fixed support grid and fixed mean: extremal two-point measures give
analytical price bounds on multinomial lattices, the minimal-entropy
martingale measure anchors entropy balls, and uniform polytope sampling
turns both into price and entropy distributions.
"""
from .calibration import (PentanomialCalibration, ReturnMoments, annualize,
                          calibrate_pentanomial, estimate_moments)
from .entropy import (EntropyBall, MemmSolution, ball_mask,
                      entropy_distribution, in_ball, relative_entropy,
                      solve_memm)
from .errors import (ArbitrageViolation, BracketNotFound,
                     CalibrationDegenerate, ConvergenceFailure,
                     DegeneratePolytope, DimensionMismatch, EmptyBatch,
                     EmptyPolytope, GridMismatch, InsufficientData,
                     InvalidFactors, PmfRiskError, ProbabilityOutOfRange)
from .kernels import get_backend
from .lattice import (AmplitudeGrid, LatticeSpec, NodeGrid, build_lattice,
                      equivalent_filter, lattice_json_dict,
                      risk_neutral_generators)
from .polytope import (Generator, GeneratorSet, Pmf, SupportGrid, combine,
                       contains, convex_order_extremes, enumerate_generators,
                       expectation_bounds, model_risk)
from .pricing import (AnalyticalBounds, OptionSpec, PriceQuote, SampleReport,
                      TerminalDistribution, analytical_bounds,
                      no_arbitrage_envelope, price_american,
                      price_distribution, price_european, price_option,
                      terminal_distribution)
from .sampler import (AffineChart, EmpiricalCdf, SampleBatch,
                      SimplexPartition, build_chart, empirical_cdf,
                      sample_polytope, sample_uniform, triangulate)

__version__ = "0.1.0"
