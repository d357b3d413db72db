"""Numerical semigroup of annuli: welding, composition, exponentials and the
Virasoro central extension, all on truncated Fourier series."""
from .errors import (AnnuliError, CompositionError, FlowError, GeometryError, PathError,
                     ResolutionError, UnderResolvedWarning, WeldingError)
from .fourier import (DEFAULT_N, FourierSeries, analyze, differentiate, evaluate, grid,
                      hilbert, multiply, project_exterior, project_interior)
from .geometry import (CircleDiffeo, JordanCurve, RiemannMap, diffeo_compose, diffeo_invert,
                       riemann_exterior, riemann_exterior_map, riemann_interior,
                       riemann_interior_map, winding_numbers)
from .welding import (WeldingSolution, equation_residual, linear_homotopy, weld, weld_far,
                      welding_kernel)
from .annulus import (NormalizedAnnulus, act_on_disc, boundary_integrals, cauchy_consistency,
                      compose, dagger, disc_annulus, from_diffeo, from_embedded,
                      from_univalent)
from .exponential import (Framing, LiePath, beltrami, cauchy_reconstruct, concat, exp_univ,
                          make_sitting_instants, path_from_framing, pullback_field_residual,
                          xholo_residual)
from .virasoro import (CurveFamily2D, VirasoroElement, bracket, cocycle, form_integral,
                       form_integrand, frame_tangent, reparametrization_family,
                       velement_compose, velement_equal, winding_thin_loop, witt)
from . import io

__version__ = "0.1.0"
