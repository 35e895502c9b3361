""" Numeric defaults shared by the analysis and simulation modules """

# Orbit iteration
TRANSIENT = 10_000
SAMPLES = 10_000
PERIOD_REL_TOL = 1e-8
MAX_PERIOD = 64

# Lyapunov estimation
LYAPUNOV_CLAMP = 50.0                # per-term bound on ln|derivative|
CHAOS_THRESHOLD = 0.005              # exponent above which a scan cell counts as chaotic
CHAOS_SUSTAIN = 2                    # consecutive chaotic cells needed to declare onset

# Bifurcation refinement
FLIP_TOL = 1e-6
CYCLE_MAX_EVAL = 200                 # map compositions per cycle search
CYCLE_XTOL = 1e-13
CYCLE_TOL = 1e-10                    # accepted residual of F^p(x) - x, relative to |x|
WARM_START_NUDGE = 1e-6              # relative offset of a warm seed off the previous attractor

# Closed loop
SETTLE_WINDOW = 50                   # consecutive control instants
SETTLE_REL_CHANGE = 1e-9
ODE_SUBSTEPS = 100                   # RK4 micro-steps per control step
GAIN_GUARD = 1e-12                   # gain update skipped when |dN| <= GAIN_GUARD * (1 + |N scale|)

# Maps
RADICAND_TOL = 1e-14

# Serialization
FLOAT_DIGITS = 17

# CLI exit codes
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4
