"""Central numerical tolerances.

Every cutoff that decides a yes/no question lives here so tests can assert
the deciding code actually uses the shared constant.
"""

# structural validation
SKEW_TOL = 1e-14          # |A + A^T| on algebra elements
ORTHO_TOL = 1e-10         # |g^T g - I| on group elements
CLOSURE_TOL = 1e-12       # bracket closure residual for subalgebras
GRAM_TOL = 1e-12          # basis orthonormality residual
SUBSPACE_TOL = 1e-10      # membership / containment residuals
FIBER_COMMUTE_TOL = 1e-10  # [phi_fiber, ad_W|m] residual for W in k

# linear algebra
COND_CAP = 1e12           # refuse solves beyond this condition number
NULLSPACE_RTOL = 1e-9     # centralizer cutoff, relative to the top singular value

# search
GRAD_TOL = 1e-9           # stop |[phi^-1 X, X]| below this in the orbit ascent
MAX_ITERS = 10_000
SECOND_ORDER_TOL = 1e-8   # slack for the second-order maximality probe
FATNESS_ZERO = 1e-8       # deficit below this counts as a commuting witness
FATNESS_FAT = 1e-6        # deficit above this counts as fat
COMMUTE_TOL = 1e-10       # |[x0, y0]| allowed for certificate inputs
GENERIC_RESAMPLES = 100

# curvature
PLANE_GRAM_TOL = 1e-12    # reject nearly dependent plane spans
K_PROJECTION_TOL = 1e-10  # inputs must be h0-orthogonal to k within this
FD_STEP_DEFAULT = 1e-4
FD_STEP_RANGE = (1e-6, 1e-2)
SECTION_RADIUS = 0.1      # radius of the m-ball parametrizing the fiber section
