from sciutil import SciException

# Messages are formatted at the raise site with str.format.
KAPPA_RANGE_ERR = 'Cutoff threshold kappa must lie strictly between 0 and 1/2, got: {0}'
GRID_PARITY_ERR = 'Grid needs an even number of points per axis (at least 8), got n={0}.'
GRID_WIDTH_ERR = 'Grid half-width L must be positive, got L={0}.'
GRID_MISMATCH_ERR = 'Fields live on different grids: {0} vs {1}.'
FIELD_SHAPE_ERR = 'Expected values of shape {0}, got {1}.'
NON_FINITE_ERR = 'Non-finite value {0} at index {1} (velocity {2}).'
DOMAIN_ERR = '{0}: argument outside the domain ({1}).'
ORDER_ERR = 'Weighted norms support derivative orders 0..{0}, got {1}.'
WEIGHT_ERR = 'Unknown weight "{0}", use one of: {1}.'
KERNEL_RESOLUTION_ERR = 'dt={0} exceeds eps/4={1}: the memory kernel varies on the scale eps ' \
                        'and must be resolved by at least four steps per unit lag.'
CFL_ERR = 'dt={0} exceeds the diffusion limit cfl_factor*dv^2/k_max={1} (k_max={2}). ' \
          'Reduce dt or cfl_factor.'
WINDOW_CAP_ERR = 'The certified memory window needs W={0} lags, above the cap of {1}.\n' \
                 'Use a larger dt or a looser tail_tol.'
HORIZON_ERR = 't_end={0} is outside (0, 1]: the memory equation is only posed on short horizons.'
MODE_ERR = 'Unknown history mode "{0}", use "windowed" or "naive".'
POSITIVE_ERR = '{0} must be positive, got {1}.'
EPS_ORDER_ERR = 'eps_list must be strictly decreasing, got {0}.'
DECAY_RATE_ERR = 'Time-averaged norms need a decay rate A >= 1, got A={0}.'
PERTURBATION_ERR = 'Invalid perturbation: {0}.'
PERTURBATION_BOUND_ERR = 'Perturbation violates v0 <= C exp(-|v|/2) with C={0} (max on grid {1}).'
UNKNOWN_KEY_ERR = 'Unknown configuration key(s) in {0}: {1}.'
SCENARIO_ERR = 'Unknown scenario "{0}", use one of: {1}.'
SCENARIO_MISMATCH_ERR = 'Config selects scenario "{0}" but the command asked for "{1}".'
CONFIG_PARSE_ERR = 'Could not parse the configuration document: {0}'
HISTORY_ERR = 'History entry for step {0} is not stored (available {1}..{2}).'
GROWTH_ERR = 'Sup norm {0:.3e} exceeded {1:g} times the initial sup norm at t={2:.6g}.'
NON_FINITE_STATE_ERR = 'Non-finite state at t={0:.6g}.'
VKF_MAGIC_ERR = 'Not a VKF1 field dump: {0}'
VKF_SIZE_ERR = 'Truncated or oversized VKF1 dump: {0}'
ORACLE_ERR = '{0}: quadrature did not converge, achieved error {1:.3e} (tolerance {2:.1e}).'


class SciLandauException(SciException):
    def __init__(self, message=''):
        Exception.__init__(self, message)


class ConfigError(SciLandauException):
    pass


class DomainError(SciLandauException):
    pass


class FieldError(SciLandauException):
    pass


class HistoryError(SciLandauException):
    """ Internal contract violation: the solver asked for history it never stored. """
    pass


class OracleError(SciLandauException):
    def __init__(self, message='', achieved=None):
        SciLandauException.__init__(self, message)
        self.achieved = achieved


class SolverAbort(SciLandauException):
    """
    Raised when a run leaves the regime where it can be trusted. Keeps what was computed
    so far so the harness can still persist it.
    """

    def __init__(self, message='', trajectory=None, snapshot=None):
        SciLandauException.__init__(self, message)
        self.reason = message
        self.trajectory = trajectory
        self.snapshot = snapshot
