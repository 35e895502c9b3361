""" Published parameter sets used by examples, tests and the CLI """

# Algorithm-1 strange attractor on the invariant curve
MAP1_ATTRACTOR = dict(lambda_tilde=1.0, Q_setpoint=1.0, delta_t=0.1534, dt=1.35)

# Algorithm-2 numerical investigation
MAP2_REFERENCE = dict(
    lambda_tilde=4.0,
    Q_setpoint=1.0,
    delta_t=0.25,
    delta_N=0.2,
    delta_N_tilde=0.5,
)
MAP2_N0 = 1.0
MAP2_FLIP_DT = 1.65685
MAP2_CASCADE = (1.84664, 1.87434, 1.87924, 1.88027, 1.88049)

# Reduced map (q -> q exp(a(1 - q)))
REDUCED_CASCADE = (2.5265, 2.6564, 2.6846, 2.6907)
REDUCED_CHAOS_ONSET = 2.6924

# Idealized-vs-real study: small drift keeps the O(dt) steady offset measurable
CONVERGENCE_DT_LADDER = (0.4, 0.2, 0.1, 0.05)
CONVERGENCE_ALG1 = dict(lambda_tilde=1.0, Q_setpoint=1.0, delta_t=0.005, delta_N=0.2, delta_N_tilde=0.3)
CONVERGENCE_ALG2 = dict(lambda_tilde=1.0, Q_setpoint=1.0, delta_t=0.01, delta_N=0.2, delta_N_tilde=0.5)
