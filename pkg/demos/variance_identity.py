"""
The loss of a converged value table is the reward variance
===========================================================

Freeze the table at its optimal values and keep pulling one arm. The TD
error is then just the reward's deviation from its mean, so the mean squared
error settles on the arm's variance. A learner that minimises this loss is
rewarded for picking quiet arms, not good ones.
"""
from asrnlab import broken_armed_bandit, var_delta_oracle

env = broken_armed_bandit()
for arm in ("left", "right"):
    est = var_delta_oracle(env, arm, gamma=0.95, n_samples=100_000, seed=0)
    sigma = env.arms[env.arm_index(arm)].sigma
    print(f"{arm:5s}  E[delta^2] = {est:7.4f}   variance = {sigma ** 2:g}")

# The left arm pays a constant 0 and costs nothing; the right arm pays 1 on
# average and costs about 6.25 in loss.
