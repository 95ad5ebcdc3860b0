import logging

from opconvex.cli import __version__
from opconvex.config import DEFAULT_TOLERANCES, Tolerances
from opconvex.errors import (ConfigError, DerivativeError, DomainError,
                             EigensolverError, NotHermitianError,
                             OpConvexError, SerializationError, ShapeError)
from opconvex.funcalc import (FunctionSpec, TensorVector, custom,
                              exponent_product, fraction_product,
                              func_calc_tensor, func_calc_variant,
                              reciprocal_product, resolvent_sum, trace_form)
from opconvex.means import geometric_mean, harmonic_mean

logging.getLogger(__name__).addHandler(logging.NullHandler())
