"""Conservation laws of PDE systems in Cauchy-Kovalevskaya form via
multipliers: determining systems, exact ansatz solving and homotopy
construction of conserved densities."""

from .density import (DensityPair, HomotopyBase, TrivialDensity, build_densities,
                      build_densities_scalar, build_offshell_densities, construct,
                      k_terms, normalize_density, offshell_residual, random_check,
                      triviality_test, verify_conservation)
from .determining import (AnsatzConfig, CheckReport, DeterminingSystem, MultiplierSet,
                          adjoint_equations, build_determining_system,
                          check_candidate, count_extra_equations, extra_equations,
                          generated_extra_count, is_variational, omega_chain,
                          solve_ansatz, symmetry_equations)
from .errors import (ConslawError, DSLSyntaxError, EmptyAnsatz, IncompletePoint,
                     NotAMultiplier, NotChainConsistent, NotCKForm, NotNormalForm,
                     UnknownSymbol, UnsupportedBase, UnsupportedExpression)
from .frontend import (ConversionMap, SourceSpec, lift_multiplier, load,
                       lower_multiplier, parse_dsl, parse_expression,
                       scalar_to_system, to_first_order, validate_ck)
from .jet import (DiffPoly, JetVar, PDESystem, Point, canonicalize, eval_at,
                  integrate_unit, partial_wrt, random_point, restrict_to_solutions,
                  total_derivative)
from .kernels import BACKEND
from .operators import (OperatorMatrix, TestFunction, adjointize, euler,
                        helmholtz_defect, is_divergence, linearize, restricted_euler,
                        trilinear_S, trilinear_S_constructive)
from .printing import to_dsl

__version__ = "0.1.0"
